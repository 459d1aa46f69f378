#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

#include "fosi/objective.hpp"

namespace fosi {

// Krylov factorization A U ~= U T with U orthonormal (full
// reorthogonalization) and T symmetric tridiagonal, stored as its diagonal
// and off-diagonal.
struct LanczosFactorization {
  Matrix basis;              // n x m, orthonormal columns
  Vector diag;               // m
  Vector offdiag;            // m - 1
  int iterations = 0;        // m actually performed
  bool truncated = false;    // residual vanished before the requested m
};

// Extreme eigenpair estimates: the k largest then the l smallest eigenvalue
// estimates (each block nonincreasing), their orthonormal eigenvector
// estimates, and the inverse magnitudes u = 1 / max(|lambda|, eps_div).
struct SpectrumEstimate {
  int k = 0;
  int l = 0;
  Vector lam_hat;            // k + l
  Matrix v_hat;              // n x (k + l)
  Vector u;                  // k + l, strictly positive
  double top_ritz = 0.0;     // largest Ritz value of the full tridiagonal
  double bottom_ritz = 0.0;  // smallest Ritz value of the full tridiagonal
  bool truncated = false;

  Eigen::Index size() const { return lam_hat.size(); }
};

// Divisor floor used when inverting eigenvalue magnitudes.
inline constexpr double kEseDivisorFloor = 1e-8;

// Lanczos iteration count for estimating k + l extreme eigenpairs in
// dimension n: min(max(4(k + l), ceil(2 ln n)), n).
int heuristic_m(std::int64_t n, int k, int l);

// Lanczos with full reorthogonalization (two MGS passes against all previous
// basis vectors per iteration). The initial vector is a normalized Gaussian
// draw from the seeded RNG. Stops early, flagged, if the residual norm drops
// below 1e-12.
LanczosFactorization lanczos(
    const std::function<Vector(const Vector&)>& apply_op, int n, int m,
    std::uint64_t seed);

// Full eigendecomposition of a symmetric tridiagonal matrix by the implicit
// QL algorithm with Wilkinson shift, accumulating eigenvectors. Returns
// eigenvalues sorted descending with matching eigenvector columns.
void tridiag_eigh(const Vector& diag, const Vector& offdiag, Vector& eigenvalues,
                  Matrix& eigenvectors);

// Extreme spectrum estimation: Lanczos on the problem's Hessian-vector
// product at theta, eigendecomposition of the projected tridiagonal, then the
// first k and last l Ritz pairs.
SpectrumEstimate ese(const ObjectiveProblem& problem, const Vector& theta,
                     int k, int l, std::uint64_t seed);

// Same, for a caller-supplied symmetric operator (used by tests and tools).
SpectrumEstimate ese_operator(const std::function<Vector(const Vector&)>& apply_op,
                              int n, int k, int l, std::uint64_t seed);

}  // namespace fosi
