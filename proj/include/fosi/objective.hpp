#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fosi/rng.hpp"

namespace fosi {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Problem abstraction consumed by every optimizer: objective value, gradient,
// and Hessian-vector product. For stochastic problems, set_batch fixes the
// active mini-batch; evaluations are pure between set_batch calls.
struct ObjectiveProblem {
  int n = 0;
  std::function<double(const Vector&)> value;
  std::function<Vector(const Vector&)> gradient;
  std::function<Vector(const Vector&, const Vector&)> hvp;

  // Present only for batch-sampled objectives.
  std::function<void(std::span<const int>)> set_batch;
  // Objective over the whole dataset, independent of the active batch.
  // Equals `value` for deterministic problems (left empty there).
  std::function<double(const Vector&)> full_value;

  bool stochastic() const { return static_cast<bool>(set_batch); }
};

// Deterministic mini-batch sampler: uniform without replacement within a
// batch, fresh draw each iteration, reproducible per seed.
class BatchSchedule {
 public:
  BatchSchedule(int dataset_size, int batch_size, std::uint64_t seed,
                std::optional<int> ese_batch_size = std::nullopt);

  std::vector<int> next_batch();
  // Dedicated (typically larger) batch for spectrum-estimation calls.
  std::vector<int> ese_batch();

  int dataset_size() const { return dataset_size_; }
  int batch_size() const { return batch_size_; }
  bool has_ese_batch() const { return ese_batch_size_.has_value(); }

 private:
  int dataset_size_;
  int batch_size_;
  std::optional<int> ese_batch_size_;
  Rng rng_;
};

// Outcome of the derivative self-checks on a problem.
struct DiagnosticReport {
  bool ok = false;
  int trials = 0;
  double max_grad_fd_error = 0.0;    // |v'g - central difference|
  double grad_fd_bound = 0.0;        // 1e-5 * max(1, |f|)
  double max_hvp_linearity = 0.0;    // relative
  double max_hvp_symmetry = 0.0;     // relative
  std::string message;

  std::string to_text() const;
};

// Checks gradient against central finite differences and the HVP operator for
// linearity and symmetry over `trials` random directions.
DiagnosticReport check_derivatives(const ObjectiveProblem& problem,
                                   const Vector& theta, int trials,
                                   std::uint64_t seed = 20240601ull);

}  // namespace fosi
