#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Core>

#include "fosi/objective.hpp"

namespace fosi {

// Quadratic f(theta) = 0.5 theta' H theta with H kept in eigendecomposition
// form: spectrum sorted descending, basis columns matching. H is applied as
// three matrix-vector products and only materialized on request.
struct QuadraticProblem {
  Vector spectrum;  // descending
  Matrix basis;     // n x n orthonormal, column i pairs with spectrum[i]
  Vector theta0;

  int dimension() const { return static_cast<int>(spectrum.size()); }
  Vector apply_hessian(const Vector& v) const;
  Matrix dense_hessian() const;  // guarded to n <= 512
  ObjectiveProblem as_objective() const;
};

// Spectrum (lambda1, 1.5^0, 1.5^-1, ..., 1.5^-(n-2)); eigenbasis from a
// seeded symmetric matrix with U(0,1) entries; theta0 seeded unit-norm
// Gaussian.
QuadraticProblem gen_spiked_quadratic(int n, double lambda1, std::uint64_t seed);

// n = 100, eigenvalues 0.001 b^i for i = 1..100. A zeta x zeta mid-spectrum
// diagonal block is replaced by a rotated PD block with the same eigenvalues,
// controlling how much of H fails diagonal dominance. theta0 is a fixed
// seeded vector expressed in the eigenbasis, so f(theta0) is invariant
// across zeta for fixed b.
QuadraticProblem gen_geometric_block_quadratic(double b, int zeta,
                                               std::uint64_t seed);

// n = 100 with two tight eigenvalue clusters: lambda_1..lambda_10 equally
// spaced in [9, 10] and lambda_11..lambda_100 equally spaced in [0.01, 0.1],
// on a random orthonormal basis.
QuadraticProblem gen_two_cluster_quadratic(std::uint64_t seed);

// Binary logistic regression with analytic gradient and Hessian-vector
// product, optional L2 weight, and mini-batch support.
class LogisticProblem {
 public:
  LogisticProblem(Matrix features, Vector labels, double l2_weight = 0.0);

  int dimension() const;
  int dataset_size() const;
  ObjectiveProblem as_objective() const;

 private:
  struct State;
  std::shared_ptr<State> state_;
};

// Synthetic task: seeded ground-truth weights, standard-normal features,
// Bernoulli(sigmoid(X theta*)) labels.
LogisticProblem gen_logistic(int samples, int features, std::uint64_t seed,
                             double l2_weight = 0.0);

// CSV with a header row, feature columns, and a final 0/1 integer label
// column.
LogisticProblem load_logistic_csv(const std::string& path,
                                  double l2_weight = 0.0);

}  // namespace fosi
