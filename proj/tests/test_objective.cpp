#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "fosi/objective.hpp"
#include "fosi/problems.hpp"
#include "support/test_support.hpp"

using namespace fosi;

TEST_CASE("check_derivatives on the worked 2x2 quadratic") {
  Matrix h(2, 2);
  h << 2.5, 1.5, 1.5, 2.5;
  const ObjectiveProblem problem = test::quadratic_objective(h);
  Vector theta(2);
  theta << 1.0, 0.0;

  const Vector g = problem.gradient(theta);
  CHECK(g[0] == doctest::Approx(2.5));
  CHECK(g[1] == doctest::Approx(1.5));
  Vector e0(2);
  e0 << 1.0, 0.0;
  const Vector hv = problem.hvp(theta, e0);
  CHECK(hv[0] == doctest::Approx(2.5));
  CHECK(hv[1] == doctest::Approx(1.5));

  const DiagnosticReport report = check_derivatives(problem, theta, 10);
  CHECK(report.ok);
  CHECK(report.max_hvp_linearity <= 1e-10);
  CHECK(report.max_hvp_symmetry <= 1e-10);
  CHECK(report.max_grad_fd_error <= 1e-10);
}

TEST_CASE("check_derivatives on the zero function reports exact zeros") {
  ObjectiveProblem problem;
  problem.n = 3;
  problem.value = [](const Vector&) { return 0.0; };
  problem.gradient = [](const Vector& theta) { return Vector(Vector::Zero(theta.size())); };
  problem.hvp = [](const Vector& theta, const Vector&) {
    return Vector(Vector::Zero(theta.size()));
  };
  const DiagnosticReport report = check_derivatives(problem, Vector::Zero(3), 5);
  CHECK(report.ok);
  CHECK(report.max_grad_fd_error == 0.0);
  CHECK(report.max_hvp_linearity == 0.0);
  CHECK(report.max_hvp_symmetry == 0.0);
}

TEST_CASE("check_derivatives on a small logistic dataset against finite differences") {
  const LogisticProblem logistic = gen_logistic(10, 3, 77);
  const ObjectiveProblem problem = logistic.as_objective();
  Rng rng(5);
  Vector theta = rng.normal_vector(3);
  const DiagnosticReport report = check_derivatives(problem, theta, 20);
  CHECK(report.ok);
  CHECK(report.max_grad_fd_error <= 1e-6);
}

TEST_CASE("check_derivatives flags non-finite problems and echoes the input") {
  ObjectiveProblem problem;
  problem.n = 2;
  problem.value = [](const Vector&) {
    return std::numeric_limits<double>::infinity();
  };
  problem.gradient = [](const Vector& theta) { return theta; };
  problem.hvp = [](const Vector&, const Vector& v) { return v; };
  Vector theta(2);
  theta << 3.5, -1.0;
  const DiagnosticReport report = check_derivatives(problem, theta, 3);
  CHECK_FALSE(report.ok);
  CHECK(report.message.find("3.5") != std::string::npos);
}

TEST_CASE("batch schedules are deterministic per seed") {
  BatchSchedule a(500, 32, 1234);
  BatchSchedule b(500, 32, 1234);
  for (int draw = 0; draw < 1000; ++draw) {
    CHECK(a.next_batch() == b.next_batch());
  }
}

TEST_CASE("batches hold distinct in-range indices of the requested size") {
  BatchSchedule schedule(100, 17, 9);
  for (int draw = 0; draw < 200; ++draw) {
    const std::vector<int> batch = schedule.next_batch();
    REQUIRE(batch.size() == 17);
    std::set<int> unique(batch.begin(), batch.end());
    CHECK(unique.size() == 17);
    CHECK(*unique.begin() >= 0);
    CHECK(*unique.rbegin() < 100);
  }
}

TEST_CASE("dedicated spectrum-estimation batches honor their own size") {
  BatchSchedule schedule(50, 8, 3, 32);
  CHECK(schedule.ese_batch().size() == 32);
  CHECK(schedule.next_batch().size() == 8);
  BatchSchedule defaulted(50, 8, 3);
  CHECK(defaulted.ese_batch().size() == 8);
}

TEST_CASE("batch schedule rejects inconsistent sizes") {
  CHECK_THROWS_AS(BatchSchedule(10, 11, 0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule(0, 1, 0), std::invalid_argument);
  CHECK_THROWS_AS(BatchSchedule(10, 2, 0, 11), std::invalid_argument);
}
