#include "fosi/spectral.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "fosi/rng.hpp"

namespace fosi {

int heuristic_m(std::int64_t n, int k, int l) {
  if (n < 1) throw std::invalid_argument("heuristic_m: n must be >= 1");
  if (k < 0 || l < 0 || k + l < 1)
    throw std::invalid_argument("heuristic_m: need k, l >= 0 and k + l >= 1");
  if (static_cast<std::int64_t>(k) + l > n)
    throw std::invalid_argument("heuristic_m: k + l exceeds the dimension");
  const auto log_term =
      static_cast<std::int64_t>(std::ceil(2.0 * std::log(static_cast<double>(n))));
  const std::int64_t m = std::max<std::int64_t>(4ll * (k + l), log_term);
  return static_cast<int>(std::min(m, n));
}

LanczosFactorization lanczos(
    const std::function<Vector(const Vector&)>& apply_op, int n, int m,
    std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("lanczos: n must be >= 1");
  if (m < 1 || m > n) throw std::invalid_argument("lanczos: need 1 <= m <= n");

  constexpr double kBreakdown = 1e-12;

  LanczosFactorization fac;
  fac.basis.resize(n, m);
  fac.diag.resize(m);
  fac.offdiag = Vector::Zero(std::max(m - 1, 0));

  Rng rng(seed);
  Vector v = rng.normal_vector(n);
  v /= v.norm();
  fac.basis.col(0) = v;

  Vector w(n);
  int performed = 0;
  for (int j = 0; j < m; ++j) {
    w = apply_op(fac.basis.col(j));
    if (!w.allFinite())
      throw std::runtime_error("lanczos: operator returned non-finite values at iteration " +
                               std::to_string(j));
    fac.diag[j] = fac.basis.col(j).dot(w);
    w -= fac.diag[j] * fac.basis.col(j);
    if (j > 0) w -= fac.offdiag[j - 1] * fac.basis.col(j - 1);

    // Full reorthogonalization: two MGS passes over all previous vectors.
    auto prior = fac.basis.leftCols(j + 1);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= j; ++i) {
        w -= prior.col(i).dot(w) * prior.col(i);
      }
    }

    performed = j + 1;
    if (j + 1 == m) break;

    const double beta = w.norm();
    if (beta < kBreakdown) {
      fac.truncated = true;
      break;
    }
    fac.offdiag[j] = beta;
    fac.basis.col(j + 1) = w / beta;
  }

  fac.iterations = performed;
  if (performed < m) {
    fac.basis.conservativeResize(n, performed);
    fac.diag.conservativeResize(performed);
    fac.offdiag.conservativeResize(std::max(performed - 1, 0));
  }
  return fac;
}

namespace {

// sqrt(a^2 + b^2) without overflow.
double pythag(double a, double b) { return std::hypot(a, b); }

void sort_pairs_descending(Vector& values, Matrix& vectors) {
  const Eigen::Index m = values.size();
  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return values[a] > values[b]; });
  Vector sorted_values(m);
  Matrix sorted_vectors(vectors.rows(), m);
  for (Eigen::Index i = 0; i < m; ++i) {
    sorted_values[i] = values[order[i]];
    sorted_vectors.col(i) = vectors.col(order[i]);
  }
  values.swap(sorted_values);
  vectors.swap(sorted_vectors);
}

}  // namespace

void tridiag_eigh(const Vector& diag, const Vector& offdiag, Vector& eigenvalues,
                  Matrix& eigenvectors) {
  const Eigen::Index m = diag.size();
  if (m < 1) throw std::invalid_argument("tridiag_eigh: empty matrix");
  if (offdiag.size() != std::max<Eigen::Index>(m - 1, 0))
    throw std::invalid_argument("tridiag_eigh: off-diagonal size mismatch");

  Vector d = diag;
  Vector e(m);
  e.head(m - 1) = offdiag;
  e[m - 1] = 0.0;
  Matrix q = Matrix::Identity(m, m);

  const long sweep_budget = 50 * static_cast<long>(m);
  long sweeps = 0;

  for (Eigen::Index l = 0; l < m; ++l) {
    while (true) {
      // Find the first negligible off-diagonal at or after l.
      Eigen::Index split = l;
      for (; split < m - 1; ++split) {
        const double scale = std::abs(d[split]) + std::abs(d[split + 1]);
        if (std::abs(e[split]) <= std::numeric_limits<double>::epsilon() * scale)
          break;
      }
      if (split == l) break;

      if (++sweeps > sweep_budget)
        throw std::runtime_error("tridiag_eigh: QL iteration failed to converge");

      // Wilkinson shift from the leading 2x2 block of the active window.
      double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
      double r = pythag(g, 1.0);
      g = d[split] - d[l] + e[l] / (g + std::copysign(r, g));

      double s = 1.0;
      double c = 1.0;
      double p = 0.0;
      bool underflow = false;
      for (Eigen::Index i = split - 1; i >= l; --i) {
        double f = s * e[i];
        const double b = c * e[i];
        r = pythag(f, g);
        e[i + 1] = r;
        if (r == 0.0) {
          // Recover from underflow: split the problem here and retry.
          d[i + 1] -= p;
          e[split] = 0.0;
          underflow = true;
          break;
        }
        s = f / r;
        c = g / r;
        g = d[i + 1] - p;
        r = (d[i] - g) * s + 2.0 * c * b;
        p = s * r;
        d[i + 1] = g + p;
        g = c * r - b;

        // Accumulate the rotation into the eigenvector matrix.
        for (Eigen::Index row = 0; row < m; ++row) {
          f = q(row, i + 1);
          q(row, i + 1) = s * q(row, i) + c * f;
          q(row, i) = c * q(row, i) - s * f;
        }
      }
      if (underflow) continue;
      d[l] -= p;
      e[l] = g;
      e[split] = 0.0;
    }
  }

  eigenvalues = d;
  eigenvectors = q;
  sort_pairs_descending(eigenvalues, eigenvectors);
}

SpectrumEstimate ese_operator(const std::function<Vector(const Vector&)>& apply_op,
                              int n, int k, int l, std::uint64_t seed) {
  if (k < 0 || l < 0 || k + l < 1)
    throw std::invalid_argument("ese: need k, l >= 0 and k + l >= 1");
  const int m = heuristic_m(n, k, l);
  if (k + l > m) throw std::invalid_argument("ese: k + l exceeds the Krylov dimension");

  const LanczosFactorization fac = lanczos(apply_op, n, m, seed);
  if (fac.iterations < k + l)
    throw std::runtime_error("ese: insufficient Krylov dimension (breakdown after " +
                             std::to_string(fac.iterations) + " iterations, need " +
                             std::to_string(k + l) + ")");

  Vector ritz;
  Matrix q;
  tridiag_eigh(fac.diag, fac.offdiag, ritz, q);

  SpectrumEstimate est;
  est.k = k;
  est.l = l;
  est.truncated = fac.truncated;
  est.top_ritz = ritz[0];
  est.bottom_ritz = ritz[ritz.size() - 1];
  est.lam_hat.resize(k + l);
  est.v_hat.resize(n, k + l);
  est.u.resize(k + l);

  const Eigen::Index mm = ritz.size();
  for (int i = 0; i < k; ++i) {
    est.lam_hat[i] = ritz[i];
    est.v_hat.col(i) = fac.basis * q.col(i);
  }
  for (int i = 0; i < l; ++i) {
    const Eigen::Index src = mm - l + i;
    est.lam_hat[k + i] = ritz[src];
    est.v_hat.col(k + i) = fac.basis * q.col(src);
  }
  for (Eigen::Index i = 0; i < est.u.size(); ++i) {
    est.u[i] = 1.0 / std::max(std::abs(est.lam_hat[i]), kEseDivisorFloor);
  }
  return est;
}

SpectrumEstimate ese(const ObjectiveProblem& problem, const Vector& theta,
                     int k, int l, std::uint64_t seed) {
  auto apply_op = [&](const Vector& v) { return problem.hvp(theta, v); };
  return ese_operator(apply_op, problem.n, k, l, seed);
}

}  // namespace fosi
