#include "fosi/objective.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fosi {

BatchSchedule::BatchSchedule(int dataset_size, int batch_size,
                             std::uint64_t seed,
                             std::optional<int> ese_batch_size)
    : dataset_size_(dataset_size),
      batch_size_(batch_size),
      ese_batch_size_(ese_batch_size),
      rng_(seed) {
  if (dataset_size < 1) throw std::invalid_argument("dataset_size must be >= 1");
  if (batch_size < 1 || batch_size > dataset_size)
    throw std::invalid_argument("batch_size must be in [1, dataset_size]");
  if (ese_batch_size && (*ese_batch_size < 1 || *ese_batch_size > dataset_size))
    throw std::invalid_argument("ese_batch_size must be in [1, dataset_size]");
}

std::vector<int> BatchSchedule::next_batch() {
  return rng_.sample_indices(dataset_size_, batch_size_);
}

std::vector<int> BatchSchedule::ese_batch() {
  const int size = ese_batch_size_.value_or(batch_size_);
  return rng_.sample_indices(dataset_size_, size);
}

std::string DiagnosticReport::to_text() const {
  std::ostringstream os;
  os << "derivative check: " << (ok ? "PASS" : "FAIL") << "\n"
     << "  trials:              " << trials << "\n"
     << "  grad fd error (max): " << max_grad_fd_error << "  (bound "
     << grad_fd_bound << ")\n"
     << "  hvp linearity (max): " << max_hvp_linearity << "  (bound 1e-10)\n"
     << "  hvp symmetry  (max): " << max_hvp_symmetry << "  (bound 1e-10)\n";
  if (!message.empty()) os << "  note: " << message << "\n";
  return os.str();
}

namespace {

std::string echo_point(const Vector& theta) {
  std::ostringstream os;
  os << "theta = [";
  const Eigen::Index show = std::min<Eigen::Index>(theta.size(), 8);
  for (Eigen::Index i = 0; i < show; ++i) {
    if (i) os << ", ";
    os << theta[i];
  }
  if (show < theta.size()) os << ", ...";
  os << "]";
  return os.str();
}

}  // namespace

DiagnosticReport check_derivatives(const ObjectiveProblem& problem,
                                   const Vector& theta, int trials,
                                   std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");

  DiagnosticReport report;
  report.trials = trials;

  const double f0 = problem.value(theta);
  if (!std::isfinite(f0)) {
    report.message = "non-finite objective value at " + echo_point(theta);
    return report;
  }
  const Vector g = problem.gradient(theta);
  if (!g.allFinite()) {
    report.message = "non-finite gradient at " + echo_point(theta);
    return report;
  }
  report.grad_fd_bound = 1e-5 * std::max(1.0, std::abs(f0));

  constexpr double kStep = 1e-5;
  constexpr double kTiny = 1e-300;
  Rng rng(seed);
  for (int trial = 0; trial < trials; ++trial) {
    Vector v = rng.normal_vector(theta.size());
    v /= v.norm();
    Vector w = rng.normal_vector(theta.size());
    w /= w.norm();

    const double fwd = problem.value(theta + kStep * v);
    const double bwd = problem.value(theta - kStep * v);
    if (!std::isfinite(fwd) || !std::isfinite(bwd)) {
      report.message = "non-finite value near " + echo_point(theta);
      return report;
    }
    const double directional = (fwd - bwd) / (2.0 * kStep);
    report.max_grad_fd_error =
        std::max(report.max_grad_fd_error, std::abs(v.dot(g) - directional));

    const Vector hv = problem.hvp(theta, v);
    const Vector hw = problem.hvp(theta, w);
    if (!hv.allFinite() || !hw.allFinite()) {
      report.message = "non-finite hvp at " + echo_point(theta);
      return report;
    }

    const double a = rng.uniform(0.5, 2.0);
    const double b = rng.uniform(0.5, 2.0);
    const Vector combined = problem.hvp(theta, a * v + b * w);
    const Vector expected = a * hv + b * hw;
    const double lin =
        (combined - expected).norm() / std::max(expected.norm(), kTiny);
    report.max_hvp_linearity = std::max(report.max_hvp_linearity, lin);

    const double vhw = v.dot(hw);
    const double whv = w.dot(hv);
    const double sym = std::abs(vhw - whv) /
                       std::max({std::abs(vhw), std::abs(whv), kTiny});
    report.max_hvp_symmetry = std::max(report.max_hvp_symmetry, sym);
  }

  report.ok = report.max_grad_fd_error <= report.grad_fd_bound &&
              report.max_hvp_linearity <= 1e-10 &&
              report.max_hvp_symmetry <= 1e-10;
  return report;
}

}  // namespace fosi
