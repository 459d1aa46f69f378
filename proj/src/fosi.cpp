#include "fosi/fosi.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace fosi {

void FosiConfig::validate() const {
  if (k < 0 || l < 0 || k + l < 1)
    throw std::invalid_argument("fosi: need k, l >= 0 and k + l >= 1");
  if (!(alpha > 0.0) || alpha > 1.0)
    throw std::invalid_argument("fosi: alpha must be in (0, 1]");
  if (refresh_interval) {
    if (*refresh_interval < 1)
      throw std::invalid_argument("fosi: refresh interval must be >= 1");
  } else if (!(rho > 1.0)) {
    throw std::invalid_argument("fosi: auto interval requires rho > 1");
  }
  if (warmup < 0) throw std::invalid_argument("fosi: warmup must be >= 0");
  if (!(clip >= 1.0)) throw std::invalid_argument("fosi: clip must be >= 1");
}

long FosiConfig::resolved_interval(int n) const {
  if (refresh_interval) return *refresh_interval;
  return interval_T_heuristic(heuristic_m(n, k, l), rho);
}

FosiState make_fosi_state(const FosiConfig& config, BaseOptimizer base, int n) {
  config.validate();
  base.reset(n);
  FosiState state{config, std::move(base), 0.0, std::nullopt,
                  Vector::Zero(n), 0, 0, 0.0};
  state.base_eta = state.base.learning_rate();
  state.eta2 = state.base_eta;
  return state;
}

long interval_T_heuristic(int m, double rho) {
  if (m < 1) throw std::invalid_argument("interval_T_heuristic: m must be >= 1");
  if (!(rho > 1.0))
    throw std::invalid_argument("interval_T_heuristic: rho must exceed 1");
  return static_cast<long>(std::ceil(2.0 * m / (rho - 1.0)));
}

long interval_T_measured(double tau1, double tau2, double tau3, double rho) {
  if (!(tau1 > 0.0) || !(tau2 > 0.0))
    throw std::invalid_argument("interval_T_measured: latencies must be positive");
  if (tau3 < 0.0)
    throw std::invalid_argument("interval_T_measured: tau3 must be >= 0");
  const double budget = rho * tau1 - tau2;
  if (!(budget > 0.0))
    throw std::runtime_error("interval_T_measured: overhead target unattainable");
  const long t = static_cast<long>(std::ceil(tau3 / budget));
  return std::max<long>(t, 1);
}

LrScaleResult scale_learning_rate(double eta, const OptimalLrForm& form,
                                  const SpectrumEstimate& spectrum,
                                  double clip) {
  if (!(clip >= 1.0))
    throw std::invalid_argument("scale_learning_rate: clip must be >= 1");

  LrScaleResult result;
  result.eta2 = eta;

  const int k = spectrum.k;
  const int l = spectrum.l;
  const double lam_1 = k > 0 ? spectrum.lam_hat[0] : spectrum.top_ritz;
  const double lam_k1 = k > 0 ? spectrum.lam_hat[k - 1] : spectrum.top_ritz;
  double lam_n;
  if (l > 0) {
    lam_n = spectrum.lam_hat[spectrum.lam_hat.size() - 1];
  } else {
    // With l = 0 no small-eigenvalue estimate is requested; the smallest
    // Ritz value of the full tridiagonal stands in.
    lam_n = spectrum.bottom_ritz;
    result.used_bottom_ritz = true;
  }
  const double lam_nl = l > 0 ? spectrum.lam_hat[k] : lam_n;

  if (lam_1 <= 0.0 || lam_k1 <= 0.0 || lam_n <= 0.0 || lam_nl <= 0.0) {
    result.fallback = true;
    return result;
  }

  const double eta_star = form(lam_1, lam_n);
  const double eta2_star = form(lam_k1, lam_nl);
  result.ratio = std::max(eta2_star / eta_star, 1.0);
  result.eta2 = eta * std::min(result.ratio, clip);
  return result;
}

void fosi_refresh_spectrum(FosiState& state, SpectrumEstimate estimate) {
  state.spectrum = std::move(estimate);
  state.lr_fallback = false;
  state.lr_used_bottom_ritz = false;

  double eta2 = state.base_eta;
  if (state.config.clip > 1.0) {
    if (auto form = state.base.optimal_lr_form()) {
      const LrScaleResult scaled = scale_learning_rate(
          state.base_eta, *form, *state.spectrum, state.config.clip);
      eta2 = scaled.eta2;
      state.lr_fallback = scaled.fallback;
      state.lr_used_bottom_ritz = scaled.used_bottom_ritz;
    }
  }
  state.eta2 = eta2;
  state.base.set_learning_rate(eta2);
}

namespace {

// Momentum for the Newton branch: the same linear combination of past
// gradients the base optimizer applies, kept in full parameter space so it is
// unaffected by basis refreshes.
Vector combine_newton_gradient(FosiState& state, const Vector& g) {
  switch (state.base.kind()) {
    case OptimizerKind::GradientDescent:
      state.newton_momentum = g;
      return g;
    case OptimizerKind::HeavyBall:
      state.newton_momentum =
          state.base.momentum_coefficient() * state.newton_momentum + g;
      return state.newton_momentum;
    case OptimizerKind::Adam: {
      const double beta1 = state.base.momentum_coefficient();
      state.newton_momentum = beta1 * state.newton_momentum + (1.0 - beta1) * g;
      ++state.newton_steps;
      const double correction =
          1.0 - std::pow(beta1, static_cast<double>(state.newton_steps));
      return state.newton_momentum / correction;
    }
  }
  throw std::logic_error("unreachable optimizer kind");
}

}  // namespace

Vector fosi_update_step(const Vector& theta, const Vector& g, FosiState& state) {
  if (!g.allFinite())
    throw std::invalid_argument("fosi_update_step: non-finite gradient");

  const Vector g_bar = combine_newton_gradient(state, g);

  if (!state.spectrum || state.spectrum->size() == 0) {
    const Vector d = state.base.step(g);
    ++state.t;
    return theta + d;
  }

  const Matrix& v_hat = state.spectrum->v_hat;
  const Vector& u = state.spectrum->u;

  // Matrix-vector chains only. The Newton branch re-projects g1 even though
  // v_hat' v_hat = I makes that a no-op; keeping it preserves the exact
  // evaluation order of the update rule.
  const Vector g1 = v_hat * (v_hat.transpose() * g);
  const Vector g2 = g - g1;

  const Vector g1_bar = v_hat * (v_hat.transpose() * g_bar);
  const Vector d1 =
      -state.config.alpha *
      (v_hat * ((v_hat.transpose() * g1_bar).array() * u.array()).matrix());
  if (!d1.allFinite())
    throw std::runtime_error("fosi_update_step: non-finite Newton-branch direction");

  const Vector d_b = state.base.step(g2);
  const Vector d2 = d_b - v_hat * (v_hat.transpose() * d_b);
  if (!d2.allFinite())
    throw std::runtime_error("fosi_update_step: non-finite base-branch direction");

  ++state.t;
  return theta + d1 + d2;
}

namespace {

double trace_value(const ObjectiveProblem& problem, const Vector& theta) {
  if (problem.stochastic() && problem.full_value)
    return problem.full_value(theta);
  return problem.value(theta);
}

struct LoopClock {
  std::chrono::steady_clock::time_point start =
      std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
  }
};

}  // namespace

RunTrace fosi_optimize(const ObjectiveProblem& problem, Vector theta,
                       const FosiConfig& config, BaseOptimizer base,
                       const StoppingRule& stop, BatchSchedule* schedule) {
  config.validate();
  if (stop.max_iterations < 0)
    throw std::invalid_argument("fosi_optimize: negative iteration budget");

  const long interval = config.resolved_interval(problem.n);
  FosiState state = make_fosi_state(config, std::move(base), problem.n);

  RunTrace trace;
  LoopClock clock;
  long refreshes = 0;
  double f0 = 0.0;

  for (long t = 0;; ++t) {
    std::vector<int> batch;
    if (schedule && problem.stochastic()) {
      batch = schedule->next_batch();
      problem.set_batch(batch);
    }

    const bool last = t >= stop.max_iterations;
    const bool do_ese =
        !last && t >= config.warmup && (t - config.warmup) % interval == 0;
    if (do_ese) {
      try {
        SpectrumEstimate estimate;
        const bool dedicated =
            schedule && problem.stochastic() &&
            (config.ese_on_dedicated_batch || schedule->has_ese_batch());
        if (dedicated) {
          problem.set_batch(schedule->ese_batch());
          estimate = ese(problem, theta, config.k, config.l,
                         mix_seed(config.seed, static_cast<std::uint64_t>(refreshes)));
          problem.set_batch(batch);
        } else {
          estimate = ese(problem, theta, config.k, config.l,
                         mix_seed(config.seed, static_cast<std::uint64_t>(refreshes)));
        }
        ++refreshes;
        fosi_refresh_spectrum(state, std::move(estimate));
        if (state.lr_used_bottom_ritz)
          trace.notes.push_back(
              "lr_scaling@" + std::to_string(t) +
              ": smallest Ritz value used as the smallest-eigenvalue proxy (l=0)");
        if (state.lr_fallback)
          trace.notes.push_back(
              "lr_scaling@" + std::to_string(t) +
              ": nonpositive eigenvalue estimate, scaling disabled");
      } catch (const std::exception& err) {
        trace.status = "ese_failed";
        trace.notes.push_back("ese@" + std::to_string(t) + ": " + err.what());
        return trace;
      }
    }

    const double f = trace_value(problem, theta);
    const Vector g = problem.gradient(theta);
    trace.rows.push_back(TraceRow{t, f, g.norm(), state.eta2, do_ese ? 1 : 0,
                                  clock.seconds()});

    if (t == 0) f0 = f;
    if (!std::isfinite(f) || !g.allFinite() ||
        f > 1e6 * std::max(std::abs(f0), 1e-12)) {
      trace.status = "diverged";
      break;
    }
    if (last) break;
    if (stop.grad_norm_tol && g.norm() <= *stop.grad_norm_tol) break;
    if (stop.f_target && f <= *stop.f_target) break;

    theta = fosi_update_step(theta, g, state);
  }
  return trace;
}

RunTrace run_base_optimizer(const ObjectiveProblem& problem, Vector theta,
                            BaseOptimizer base, const StoppingRule& stop,
                            BatchSchedule* schedule) {
  if (stop.max_iterations < 0)
    throw std::invalid_argument("run_base_optimizer: negative iteration budget");
  base.reset(problem.n);

  RunTrace trace;
  LoopClock clock;
  double f0 = 0.0;

  for (long t = 0;; ++t) {
    if (schedule && problem.stochastic()) problem.set_batch(schedule->next_batch());

    const double f = trace_value(problem, theta);
    const Vector g = problem.gradient(theta);
    trace.rows.push_back(
        TraceRow{t, f, g.norm(), base.learning_rate(), 0, clock.seconds()});

    if (t == 0) f0 = f;
    if (!std::isfinite(f) || !g.allFinite() ||
        f > 1e6 * std::max(std::abs(f0), 1e-12)) {
      trace.status = "diverged";
      break;
    }
    if (t >= stop.max_iterations) break;
    if (stop.grad_norm_tol && g.norm() <= *stop.grad_norm_tol) break;
    if (stop.f_target && f <= *stop.f_target) break;

    const Vector d = base.step(g);
    theta = theta + d;
  }
  return trace;
}

}  // namespace fosi
