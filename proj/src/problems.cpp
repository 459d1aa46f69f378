#include "fosi/problems.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "fosi/rng.hpp"

namespace fosi {

Vector QuadraticProblem::apply_hessian(const Vector& v) const {
  return basis * (spectrum.array() * (basis.transpose() * v).array()).matrix();
}

Matrix QuadraticProblem::dense_hessian() const {
  if (dimension() > 512)
    throw std::logic_error("dense_hessian: refusing to materialize beyond n = 512");
  return basis * spectrum.asDiagonal() * basis.transpose();
}

ObjectiveProblem QuadraticProblem::as_objective() const {
  auto self = std::make_shared<QuadraticProblem>(*this);
  ObjectiveProblem problem;
  problem.n = dimension();
  problem.value = [self](const Vector& theta) {
    return 0.5 * theta.dot(self->apply_hessian(theta));
  };
  problem.gradient = [self](const Vector& theta) {
    return self->apply_hessian(theta);
  };
  problem.hvp = [self](const Vector&, const Vector& v) {
    return self->apply_hessian(v);
  };
  return problem;
}

namespace {

void sort_pairs_descending(Vector& values, Matrix& vectors) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return values[a] > values[b];
  });
  Vector sorted_values(n);
  Matrix sorted_vectors(vectors.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    sorted_values[i] = values[order[i]];
    sorted_vectors.col(i) = vectors.col(order[i]);
  }
  values.swap(sorted_values);
  vectors.swap(sorted_vectors);
}

Matrix random_orthonormal(int n, Rng& rng) {
  Matrix gaussian(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gaussian(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

QuadraticProblem gen_spiked_quadratic(int n, double lambda1, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("gen_spiked_quadratic: n must be >= 2");
  if (!(lambda1 > 1.0))
    throw std::invalid_argument("gen_spiked_quadratic: lambda1 must exceed 1");

  QuadraticProblem problem;
  problem.spectrum.resize(n);
  problem.spectrum[0] = lambda1;
  for (int i = 1; i < n; ++i)
    problem.spectrum[i] = std::pow(1.5, -static_cast<double>(i - 1));

  // Eigenbasis of a symmetric matrix with U(0,1) entries.
  Rng rng(seed);
  Matrix raw(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) raw(i, j) = rng.uniform();
  const Matrix symmetric = (raw + raw.transpose()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetric);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("gen_spiked_quadratic: eigendecomposition failed");
  problem.basis = solver.eigenvectors().rowwise().reverse();

  problem.theta0 = rng.normal_vector(n);
  problem.theta0 /= problem.theta0.norm();
  return problem;
}

QuadraticProblem gen_geometric_block_quadratic(double b, int zeta,
                                               std::uint64_t seed) {
  constexpr int n = 100;
  if (b < 1.1 || b > 1.17)
    throw std::invalid_argument("gen_geometric_block_quadratic: b must lie in [1.1, 1.17]");
  if (zeta < 0 || zeta > n)
    throw std::invalid_argument("gen_geometric_block_quadratic: zeta must lie in [0, 100]");

  Vector eigenvalues(n);
  for (int i = 0; i < n; ++i)
    eigenvalues[i] = 0.001 * std::pow(b, static_cast<double>(i + 1));

  Matrix basis = Matrix::Identity(n, n);
  if (zeta > 1) {
    // Trailing slice: the rotated block covers the zeta largest eigenvalues,
    // so growing zeta moves more of the dominant curvature off-axis.
    const int start = n - zeta;
    Rng block_rng(mix_seed(seed, 0));
    basis.block(start, start, zeta, zeta) = random_orthonormal(zeta, block_rng);
  }

  sort_pairs_descending(eigenvalues, basis);

  // theta_base depends only on the seed, so starting points coincide in the
  // rotated coordinate system across zeta.
  Rng theta_rng(mix_seed(seed, 1));
  Vector theta_base = theta_rng.normal_vector(n);
  theta_base /= theta_base.norm();

  QuadraticProblem problem;
  problem.spectrum = std::move(eigenvalues);
  problem.theta0 = basis * theta_base;
  problem.basis = std::move(basis);
  return problem;
}

QuadraticProblem gen_two_cluster_quadratic(std::uint64_t seed) {
  constexpr int n = 100;
  Vector eigenvalues(n);
  for (int i = 0; i < 10; ++i)
    eigenvalues[i] = 10.0 - static_cast<double>(i) * (1.0 / 9.0);
  for (int i = 0; i < 90; ++i)
    eigenvalues[10 + i] = 0.1 - static_cast<double>(i) * (0.09 / 89.0);

  Rng rng(seed);
  QuadraticProblem problem;
  problem.spectrum = std::move(eigenvalues);
  problem.basis = random_orthonormal(n, rng);
  problem.theta0 = rng.normal_vector(n);
  problem.theta0 /= problem.theta0.norm();
  return problem;
}

struct LogisticProblem::State {
  Matrix features;         // m x d
  Vector labels;           // m, in {0, 1}
  double l2_weight = 0.0;
  std::vector<int> active; // empty = full dataset

  double loss_over(const std::vector<int>& rows, const Vector& theta) const;
  Vector gradient_over(const std::vector<int>& rows, const Vector& theta) const;
  Vector hvp_over(const std::vector<int>& rows, const Vector& theta,
                  const Vector& v) const;
  std::vector<int> all_rows() const {
    std::vector<int> rows(features.rows());
    std::iota(rows.begin(), rows.end(), 0);
    return rows;
  }
};

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

// log(1 + exp(z)) without overflow.
double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

double LogisticProblem::State::loss_over(const std::vector<int>& rows,
                                         const Vector& theta) const {
  double total = 0.0;
  for (int r : rows) {
    const double z = features.row(r).dot(theta);
    total += softplus(z) - labels[r] * z;
  }
  return total / static_cast<double>(rows.size()) +
         0.5 * l2_weight * theta.squaredNorm();
}

Vector LogisticProblem::State::gradient_over(const std::vector<int>& rows,
                                             const Vector& theta) const {
  Vector g = Vector::Zero(theta.size());
  for (int r : rows) {
    const double z = features.row(r).dot(theta);
    g += (sigmoid(z) - labels[r]) * features.row(r).transpose();
  }
  return g / static_cast<double>(rows.size()) + l2_weight * theta;
}

Vector LogisticProblem::State::hvp_over(const std::vector<int>& rows,
                                        const Vector& theta,
                                        const Vector& v) const {
  Vector h = Vector::Zero(theta.size());
  for (int r : rows) {
    const double s = sigmoid(features.row(r).dot(theta));
    const double weight = s * (1.0 - s) * features.row(r).dot(v);
    h += weight * features.row(r).transpose();
  }
  return h / static_cast<double>(rows.size()) + l2_weight * v;
}

LogisticProblem::LogisticProblem(Matrix features, Vector labels,
                                 double l2_weight) {
  if (features.rows() != labels.size())
    throw std::invalid_argument("logistic: feature/label row mismatch");
  if (features.rows() < 1 || features.cols() < 1)
    throw std::invalid_argument("logistic: need at least one sample and feature");
  if (l2_weight < 0.0)
    throw std::invalid_argument("logistic: l2 weight must be >= 0");
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0.0 && labels[i] != 1.0)
      throw std::invalid_argument("logistic: labels must be 0 or 1");
  }
  state_ = std::make_shared<State>();
  state_->features = std::move(features);
  state_->labels = std::move(labels);
  state_->l2_weight = l2_weight;
}

int LogisticProblem::dimension() const {
  return static_cast<int>(state_->features.cols());
}

int LogisticProblem::dataset_size() const {
  return static_cast<int>(state_->features.rows());
}

ObjectiveProblem LogisticProblem::as_objective() const {
  auto state = state_;
  ObjectiveProblem problem;
  problem.n = dimension();
  problem.value = [state](const Vector& theta) {
    return state->loss_over(
        state->active.empty() ? state->all_rows() : state->active, theta);
  };
  problem.gradient = [state](const Vector& theta) {
    return state->gradient_over(
        state->active.empty() ? state->all_rows() : state->active, theta);
  };
  problem.hvp = [state](const Vector& theta, const Vector& v) {
    return state->hvp_over(
        state->active.empty() ? state->all_rows() : state->active, theta, v);
  };
  problem.set_batch = [state](std::span<const int> batch) {
    state->active.assign(batch.begin(), batch.end());
  };
  problem.full_value = [state](const Vector& theta) {
    return state->loss_over(state->all_rows(), theta);
  };
  return problem;
}

LogisticProblem gen_logistic(int samples, int features, std::uint64_t seed,
                             double l2_weight) {
  if (samples < 1 || features < 1)
    throw std::invalid_argument("gen_logistic: need samples, features >= 1");
  Rng rng(seed);
  Vector truth = rng.normal_vector(features);
  Matrix x(samples, features);
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < features; ++j) x(i, j) = rng.normal();
  Vector y(samples);
  for (int i = 0; i < samples; ++i) {
    const double p = sigmoid(x.row(i).dot(truth));
    y[i] = rng.uniform() < p ? 1.0 : 0.0;
  }
  return LogisticProblem(std::move(x), std::move(y), l2_weight);
}

LogisticProblem load_logistic_csv(const std::string& path, double l2_weight) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open dataset: " + path);

  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("dataset has no header row: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<double> labels;
  long line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    std::vector<double> fields;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        fields.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw std::runtime_error("malformed value at " + path + ":" +
                                 std::to_string(line_number) + ": '" + cell + "'");
      }
    }
    if (fields.size() < 2)
      throw std::runtime_error("too few columns at " + path + ":" +
                               std::to_string(line_number));
    if (!rows.empty() && fields.size() != rows.front().size() + 1)
      throw std::runtime_error("inconsistent column count at " + path + ":" +
                               std::to_string(line_number));
    const double label = fields.back();
    if (label != 0.0 && label != 1.0)
      throw std::runtime_error("label outside {0,1} at " + path + ":" +
                               std::to_string(line_number));
    fields.pop_back();
    rows.push_back(std::move(fields));
    labels.push_back(label);
  }
  if (rows.empty()) throw std::runtime_error("dataset has no data rows: " + path);

  const int m = static_cast<int>(rows.size());
  const int d = static_cast<int>(rows.front().size());
  Matrix x(m, d);
  Vector y(m);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < d; ++j) x(i, j) = rows[i][j];
    y[i] = labels[i];
  }
  return LogisticProblem(std::move(x), std::move(y), l2_weight);
}

}  // namespace fosi
