#pragma once

#include <cstdint>
#include <limits>
#include <optional>

#include "fosi/objective.hpp"
#include "fosi/optim.hpp"
#include "fosi/spectral.hpp"
#include "fosi/trace.hpp"

namespace fosi {

// Hyperparameters of the meta-optimizer. T is the refresh interval between
// spectrum estimations; when unset it is derived from the overhead target rho
// via interval_T_heuristic. c >= 1 clips the learning-rate scaling (c = 1
// disables it, c = inf leaves it unclipped).
struct FosiConfig {
  int k = 10;
  int l = 0;
  double alpha = 1.0;
  std::optional<long> refresh_interval;  // T; unset -> auto from rho
  double rho = 1.1;
  long warmup = 0;  // W
  double clip = std::numeric_limits<double>::infinity();  // c
  std::uint64_t seed = 0;
  bool ese_on_dedicated_batch = false;  // stochastic mode: use a separate
                                        // batch for spectrum estimation

  void validate() const;
  long resolved_interval(int n) const;
};

// Evolving state of a run: the base optimizer, the current spectrum estimate
// (empty before the first refresh), and the full-space momentum buffer that
// feeds the Newton branch.
struct FosiState {
  FosiConfig config;
  BaseOptimizer base;
  double base_eta;  // tuned learning rate, before scaling
  std::optional<SpectrumEstimate> spectrum;
  Vector newton_momentum;
  long newton_steps = 0;  // bias-correction counter for an Adam-style combine
  long t = 0;
  double eta2;  // currently scaled base learning rate
  bool lr_fallback = false;
  bool lr_used_bottom_ritz = false;
};

FosiState make_fosi_state(const FosiConfig& config, BaseOptimizer base, int n);

// Installs fresh extreme-spectrum estimates and rescales the base learning
// rate when the base optimizer has a closed-form optimal rate.
void fosi_refresh_spectrum(FosiState& state, SpectrumEstimate estimate);

// One update step: split the gradient across the estimated extreme subspace
// and its complement, take a scaled Newton step on the first and a base
// optimizer step on the second. With an empty spectrum this is exactly the
// base optimizer update.
Vector fosi_update_step(const Vector& theta, const Vector& g, FosiState& state);

// Result of the automatic learning-rate scaling eta2 = eta * min(ratio, c).
struct LrScaleResult {
  double eta2 = 0.0;
  double ratio = 1.0;
  bool fallback = false;         // nonpositive estimates; eta2 = eta
  bool used_bottom_ritz = false; // l = 0: smallest Ritz value stood in for l_n
};

LrScaleResult scale_learning_rate(double eta, const OptimalLrForm& form,
                                  const SpectrumEstimate& spectrum, double clip);

// Refresh interval targeting overhead factor rho, from the Lanczos iteration
// count m: ceil(2 m / (rho - 1)).
long interval_T_heuristic(int m, double rho);

// Measured variant: tau1 = base step latency, tau2 = update-step latency,
// tau3 = spectrum-estimation latency; T = ceil(tau3 / (rho tau1 - tau2)),
// at least 1.
long interval_T_measured(double tau1, double tau2, double tau3, double rho);

// Full optimization loop: periodic spectrum refresh, per-iteration trace
// rows, divergence guard at 1e6x the initial objective value. In stochastic
// mode a batch is fixed at the top of every iteration.
RunTrace fosi_optimize(const ObjectiveProblem& problem, Vector theta,
                       const FosiConfig& config, BaseOptimizer base,
                       const StoppingRule& stop,
                       BatchSchedule* schedule = nullptr);

// The plain base-optimizer loop with the same trace schema.
RunTrace run_base_optimizer(const ObjectiveProblem& problem, Vector theta,
                            BaseOptimizer base, const StoppingRule& stop,
                            BatchSchedule* schedule = nullptr);

}  // namespace fosi
