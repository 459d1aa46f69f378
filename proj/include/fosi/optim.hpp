#pragma once

#include <optional>
#include <string>

#include <Eigen/Core>

#include "fosi/objective.hpp"

namespace fosi {

enum class OptimizerKind { GradientDescent, HeavyBall, Adam };

std::string to_string(OptimizerKind kind);

// Closed-form optimal learning rate on a quadratic, as a function of the
// extreme eigenvalues. GD: 2 / (l_max + l_min). Heavy-Ball: 4 / (sqrt(l_max)
// + sqrt(l_min))^2.
struct OptimalLrForm {
  enum class Kind { GradientDescent, HeavyBall };
  Kind kind;

  double operator()(double lam_max, double lam_min) const;
};

// Stateful first-order stepper mapping a gradient to a descent direction.
class BaseOptimizer {
 public:
  static BaseOptimizer gradient_descent(double eta);
  static BaseOptimizer heavy_ball(double eta, double beta = 0.9);
  static BaseOptimizer adam(double eta, double beta1 = 0.9,
                            double beta2 = 0.999, double eps = 1e-8);

  // Descent direction for gradient g; advances internal state exactly once.
  Vector step(const Vector& g);

  // Diagonal q of the inverse preconditioner the next step would use, so the
  // direction equals -eta * q .* (momentum-combined gradient). Pure peek.
  Vector inverse_preconditioner_diag(const Vector& g) const;

  // Momentum-combined gradient the next step would use. Pure peek.
  Vector combined_gradient(const Vector& g) const;

  std::optional<OptimalLrForm> optimal_lr_form() const;

  OptimizerKind kind() const { return kind_; }
  double learning_rate() const { return eta_; }
  void set_learning_rate(double eta);
  double momentum_coefficient() const;  // beta (HB) or beta1 (Adam); 0 for GD
  const Vector& momentum_buffer() const { return momentum_; }
  long step_count() const { return t_; }

  void reset(int n);  // zero the state for dimension n

 private:
  BaseOptimizer(OptimizerKind kind, double eta);

  OptimizerKind kind_;
  double eta_;
  double beta_ = 0.0;       // HB momentum
  double beta1_ = 0.0;      // Adam first-moment decay
  double beta2_ = 0.0;      // Adam second-moment decay
  double eps_adam_ = 0.0;
  Vector momentum_;         // HB buffer, or Adam first moment
  Vector second_moment_;    // Adam only
  long t_ = 0;              // Adam bias-correction counter
};

}  // namespace fosi
