#include "fosi/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace fosi {

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::GradientDescent: return "gd";
    case OptimizerKind::HeavyBall: return "heavy_ball";
    case OptimizerKind::Adam: return "adam";
  }
  return "unknown";
}

double OptimalLrForm::operator()(double lam_max, double lam_min) const {
  if (lam_max <= 0.0 || lam_min <= 0.0)
    throw std::invalid_argument("OptimalLrForm: eigenvalues must be positive");
  switch (kind) {
    case Kind::GradientDescent:
      return 2.0 / (lam_max + lam_min);
    case Kind::HeavyBall: {
      const double s = std::sqrt(lam_max) + std::sqrt(lam_min);
      return 4.0 / (s * s);
    }
  }
  return 0.0;
}

BaseOptimizer::BaseOptimizer(OptimizerKind kind, double eta)
    : kind_(kind), eta_(eta) {
  if (eta <= 0.0) throw std::invalid_argument("learning rate must be positive");
}

BaseOptimizer BaseOptimizer::gradient_descent(double eta) {
  return BaseOptimizer(OptimizerKind::GradientDescent, eta);
}

BaseOptimizer BaseOptimizer::heavy_ball(double eta, double beta) {
  if (beta < 0.0 || beta >= 1.0)
    throw std::invalid_argument("heavy_ball: beta must be in [0, 1)");
  BaseOptimizer opt(OptimizerKind::HeavyBall, eta);
  opt.beta_ = beta;
  return opt;
}

BaseOptimizer BaseOptimizer::adam(double eta, double beta1, double beta2,
                                  double eps) {
  if (beta1 < 0.0 || beta1 >= 1.0 || beta2 < 0.0 || beta2 >= 1.0)
    throw std::invalid_argument("adam: betas must be in [0, 1)");
  if (eps <= 0.0) throw std::invalid_argument("adam: eps must be positive");
  BaseOptimizer opt(OptimizerKind::Adam, eta);
  opt.beta1_ = beta1;
  opt.beta2_ = beta2;
  opt.eps_adam_ = eps;
  return opt;
}

void BaseOptimizer::reset(int n) {
  momentum_ = Vector::Zero(n);
  if (kind_ == OptimizerKind::Adam) second_moment_ = Vector::Zero(n);
  t_ = 0;
}

void BaseOptimizer::set_learning_rate(double eta) {
  if (eta <= 0.0) throw std::invalid_argument("learning rate must be positive");
  eta_ = eta;
}

double BaseOptimizer::momentum_coefficient() const {
  switch (kind_) {
    case OptimizerKind::GradientDescent: return 0.0;
    case OptimizerKind::HeavyBall: return beta_;
    case OptimizerKind::Adam: return beta1_;
  }
  return 0.0;
}

namespace {

void require_finite(const Vector& g) {
  if (!g.allFinite())
    throw std::invalid_argument("optimizer received a non-finite gradient");
}

}  // namespace

Vector BaseOptimizer::step(const Vector& g) {
  require_finite(g);
  if (momentum_.size() != g.size()) reset(static_cast<int>(g.size()));

  switch (kind_) {
    case OptimizerKind::GradientDescent:
      return -eta_ * g;
    case OptimizerKind::HeavyBall:
      momentum_ = beta_ * momentum_ + g;
      return -eta_ * momentum_;
    case OptimizerKind::Adam: {
      momentum_ = beta1_ * momentum_ + (1.0 - beta1_) * g;
      second_moment_ =
          beta2_ * second_moment_.array() + (1.0 - beta2_) * g.array().square();
      ++t_;
      const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
      const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
      const Vector m_hat = momentum_ / c1;
      const Vector v_hat = second_moment_ / c2;
      return (-eta_ * m_hat.array() / (v_hat.array().sqrt() + eps_adam_)).matrix();
    }
  }
  throw std::logic_error("unreachable optimizer kind");
}

Vector BaseOptimizer::inverse_preconditioner_diag(const Vector& g) const {
  require_finite(g);
  switch (kind_) {
    case OptimizerKind::GradientDescent:
    case OptimizerKind::HeavyBall:
      return Vector::Ones(g.size());
    case OptimizerKind::Adam: {
      Vector v = second_moment_.size() == g.size()
                     ? second_moment_
                     : Vector::Zero(g.size()).eval();
      v = beta2_ * v.array() + (1.0 - beta2_) * g.array().square();
      const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_ + 1));
      return (1.0 / ((v / c2).array().sqrt() + eps_adam_)).matrix();
    }
  }
  throw std::logic_error("unreachable optimizer kind");
}

Vector BaseOptimizer::combined_gradient(const Vector& g) const {
  require_finite(g);
  switch (kind_) {
    case OptimizerKind::GradientDescent:
      return g;
    case OptimizerKind::HeavyBall: {
      if (momentum_.size() != g.size()) return g;
      return beta_ * momentum_ + g;
    }
    case OptimizerKind::Adam: {
      Vector m = momentum_.size() == g.size() ? momentum_
                                              : Vector::Zero(g.size()).eval();
      m = beta1_ * m + (1.0 - beta1_) * g;
      const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_ + 1));
      return m / c1;
    }
  }
  throw std::logic_error("unreachable optimizer kind");
}

std::optional<OptimalLrForm> BaseOptimizer::optimal_lr_form() const {
  switch (kind_) {
    case OptimizerKind::GradientDescent:
      return OptimalLrForm{OptimalLrForm::Kind::GradientDescent};
    case OptimizerKind::HeavyBall:
      return OptimalLrForm{OptimalLrForm::Kind::HeavyBall};
    case OptimizerKind::Adam:
      return std::nullopt;
  }
  return std::nullopt;
}

}  // namespace fosi
