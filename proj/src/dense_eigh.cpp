#include "fosi/dense_eigh.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fosi {

void jacobi_eigh(const Matrix& input, Vector& eigenvalues, Matrix& eigenvectors) {
  if (input.rows() != input.cols())
    throw std::invalid_argument("jacobi_eigh: matrix must be square");
  const Eigen::Index n = input.rows();
  if ((input - input.transpose()).cwiseAbs().maxCoeff() >
      1e-10 * std::max(input.cwiseAbs().maxCoeff(), 1.0))
    throw std::invalid_argument("jacobi_eigh: matrix must be symmetric");

  Matrix a = (input + input.transpose()) / 2.0;
  Matrix v = Matrix::Identity(n, n);

  const int max_sweeps = 64;
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < n; ++p)
      for (Eigen::Index q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= 1e-15 * std::max(a.diagonal().cwiseAbs().maxCoeff(), 1e-300))
      break;

    for (Eigen::Index p = 0; p < n - 1; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        const double scale = std::abs(a(p, p)) + std::abs(a(q, q));
        if (std::abs(apq) <= 1e-18 * std::max(scale, 1e-300)) continue;

        // Rotation angle zeroing a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(
            1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0)), theta);
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index i = 0; i < n; ++i) {
          const double aip = a(i, p);
          const double aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double api = a(p, i);
          const double aqi = a(q, i);
          a(p, i) = c * api - s * aqi;
          a(q, i) = s * api + c * aqi;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
          const double vip = v(i, p);
          const double viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  // Sort descending.
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) {
    return a(x, x) > a(y, y);
  });
  eigenvalues.resize(n);
  eigenvectors.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    eigenvalues[i] = a(order[i], order[i]);
    eigenvectors.col(i) = v.col(order[i]);
  }
}

Vector jacobi_eigenvalues(const Matrix& a) {
  Vector values;
  Matrix vectors;
  jacobi_eigh(a, values, vectors);
  return values;
}

}  // namespace fosi
