#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "fosi/dense_eigh.hpp"
#include "fosi/objective.hpp"
#include "fosi/problems.hpp"
#include "support/test_support.hpp"

using namespace fosi;

TEST_CASE("spiked quadratic spectrum follows the 1.5-decay law") {
  const QuadraticProblem q = gen_spiked_quadratic(4, 5.0, 1);
  CHECK(q.spectrum[0] == 5.0);
  CHECK(q.spectrum[1] == 1.0);
  CHECK(q.spectrum[2] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(q.spectrum[3] == doctest::Approx(4.0 / 9.0).epsilon(1e-15));
  CHECK(q.theta0.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("spiked quadratic stored spectrum matches the dense oracle") {
  const QuadraticProblem q = gen_spiked_quadratic(100, 200.0, 2);
  CHECK(q.spectrum[1] == 1.0);
  CHECK(q.spectrum[99] == doctest::Approx(std::pow(1.5, -98.0)).epsilon(1e-12));
  const Vector oracle = jacobi_eigenvalues(q.dense_hessian());
  CHECK((oracle - q.spectrum).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("generators are deterministic per seed") {
  const QuadraticProblem a = gen_spiked_quadratic(50, 5.0, 33);
  const QuadraticProblem b = gen_spiked_quadratic(50, 5.0, 33);
  CHECK((a.basis - b.basis).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.theta0 - b.theta0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("structured hessian application matches the dense product") {
  const QuadraticProblem q = gen_spiked_quadratic(60, 5.0, 9);
  const Matrix h = q.dense_hessian();
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vector v = rng.normal_vector(60);
    CHECK((q.apply_hessian(v) - h * v).cwiseAbs().maxCoeff() <= 1e-10);
  }
}

TEST_CASE("geometric-block family") {
  SUBCASE("zeta = 0 is exactly diagonal") {
    const QuadraticProblem q = gen_geometric_block_quadratic(1.12, 0, 5);
    const Matrix h = q.dense_hessian();
    double off = 0.0;
    for (int i = 0; i < 100; ++i)
      for (int j = 0; j < 100; ++j)
        if (i != j) off = std::max(off, std::abs(h(i, j)));
    CHECK(off <= 1e-12);
    for (int i = 0; i < 100; ++i)
      CHECK(q.spectrum[i] ==
            doctest::Approx(0.001 * std::pow(1.12, 100 - i)).epsilon(1e-12));
  }
  SUBCASE("eigenvalues are independent of zeta") {
    const QuadraticProblem a = gen_geometric_block_quadratic(1.12, 50, 5);
    const QuadraticProblem b = gen_geometric_block_quadratic(1.12, 90, 5);
    CHECK((a.spectrum - b.spectrum).cwiseAbs().maxCoeff() <= 1e-10);
    const Vector oracle = jacobi_eigenvalues(a.dense_hessian());
    CHECK((oracle - a.spectrum).cwiseAbs().maxCoeff() <= 1e-8);
  }
  SUBCASE("initial value is invariant across zeta at fixed b") {
    const double f0 = gen_geometric_block_quadratic(1.12, 0, 5)
                          .as_objective()
                          .value(gen_geometric_block_quadratic(1.12, 0, 5).theta0);
    for (int zeta : {50, 90}) {
      const QuadraticProblem q = gen_geometric_block_quadratic(1.12, zeta, 5);
      CHECK(q.as_objective().value(q.theta0) ==
            doctest::Approx(f0).epsilon(1e-10));
    }
  }
  SUBCASE("zeta out of range is rejected") {
    CHECK_THROWS_AS(gen_geometric_block_quadratic(1.12, 101, 5),
                    std::invalid_argument);
    CHECK_THROWS_AS(gen_geometric_block_quadratic(1.3, 10, 5),
                    std::invalid_argument);
  }
}

TEST_CASE("two-cluster family pins the quoted eigenvalues") {
  const QuadraticProblem q = gen_two_cluster_quadratic(7);
  CHECK(q.spectrum[0] == 10.0);
  CHECK(q.spectrum[9] == doctest::Approx(9.0).epsilon(1e-15));
  CHECK(q.spectrum[10] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(q.spectrum[99] == doctest::Approx(0.01).epsilon(1e-12));
  for (int i = 0; i + 1 < 100; ++i) CHECK(q.spectrum[i] >= q.spectrum[i + 1]);
  const Vector oracle = jacobi_eigenvalues(q.dense_hessian());
  CHECK((oracle - q.spectrum).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("logistic gradient at a single zero sample is zero") {
  Matrix x(1, 1);
  x << 0.0;
  Vector y(1);
  y << 0.0;
  const LogisticProblem p(x, y);
  const ObjectiveProblem obj = p.as_objective();
  const Vector g = obj.gradient(Vector::Zero(1));
  CHECK(g[0] == 0.0);
}

TEST_CASE("synthetic logistic passes the derivative checks") {
  const LogisticProblem p = gen_logistic(200, 20, 31);
  const ObjectiveProblem obj = p.as_objective();
  Rng rng(14);
  Vector theta = rng.normal_vector(20) * 0.2;
  const DiagnosticReport report = check_derivatives(obj, theta, 20);
  CHECK(report.ok);
}

TEST_CASE("regularized hvp at zero has the closed form X'(0.25 Xv)/m + 0.1 v") {
  const int m = 30, d = 5;
  Rng rng(8);
  Matrix x(m, d);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < d; ++j) x(i, j) = rng.normal();
  Vector y(m);
  for (int i = 0; i < m; ++i) y[i] = i % 2;
  const LogisticProblem p(x, y, 0.1);
  const ObjectiveProblem obj = p.as_objective();

  const Vector v = rng.normal_vector(d);
  const Vector expected =
      x.transpose() * (0.25 * (x * v)) / static_cast<double>(m) + 0.1 * v;
  const Vector actual = obj.hvp(Vector::Zero(d), v);
  CHECK((actual - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("logistic loss is midpoint-convex along random segments") {
  const LogisticProblem p = gen_logistic(60, 8, 3);
  const ObjectiveProblem obj = p.as_objective();
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = rng.normal_vector(8);
    const Vector b = rng.normal_vector(8);
    const double mid = obj.value((a + b) / 2.0);
    CHECK(mid <= (obj.value(a) + obj.value(b)) / 2.0 + 1e-12);
  }
}

TEST_CASE("batched logistic evaluations follow the active batch") {
  const LogisticProblem p = gen_logistic(50, 4, 21);
  const ObjectiveProblem obj = p.as_objective();
  REQUIRE(obj.stochastic());
  Rng rng(5);
  const Vector theta = rng.normal_vector(4);

  const double full = obj.full_value(theta);
  std::vector<int> batch{0, 1, 2, 3, 4};
  obj.set_batch(batch);
  const double batched = obj.value(theta);
  CHECK(batched != full);  // different subsets, different means
  CHECK(obj.full_value(theta) == full);
}

TEST_CASE("csv loader round-trips and rejects malformed input") {
  const std::string good = "/tmp/fosi_test_good.csv";
  {
    std::ofstream out(good);
    out << "x1,x2,label\n0.5,1.5,1\n-0.25,2.0,0\n";
  }
  const LogisticProblem p = load_logistic_csv(good);
  CHECK(p.dimension() == 2);
  CHECK(p.dataset_size() == 2);

  const std::string bad_value = "/tmp/fosi_test_badval.csv";
  {
    std::ofstream out(bad_value);
    out << "x1,label\n0.5,1\nabc,0\n";
  }
  CHECK_THROWS_WITH_AS(load_logistic_csv(bad_value), doctest::Contains(":3"),
                       std::runtime_error);

  const std::string bad_label = "/tmp/fosi_test_badlabel.csv";
  {
    std::ofstream out(bad_label);
    out << "x1,label\n0.5,2\n";
  }
  CHECK_THROWS_WITH_AS(load_logistic_csv(bad_label),
                       doctest::Contains("label outside"), std::runtime_error);

  std::remove(good.c_str());
  std::remove(bad_value.c_str());
  std::remove(bad_label.c_str());
}

TEST_CASE("every shipped problem family passes the derivative suite") {
  struct Case {
    std::string name;
    ObjectiveProblem problem;
    Vector theta;
  };
  std::vector<Case> cases;
  {
    const QuadraticProblem q = gen_spiked_quadratic(40, 5.0, 1);
    cases.push_back({"spiked", q.as_objective(), q.theta0});
  }
  {
    const QuadraticProblem q = gen_geometric_block_quadratic(1.12, 50, 2);
    cases.push_back({"geometric_block", q.as_objective(), q.theta0});
  }
  {
    const QuadraticProblem q = gen_two_cluster_quadratic(3);
    cases.push_back({"two_cluster", q.as_objective(), q.theta0});
  }
  {
    const LogisticProblem p = gen_logistic(100, 10, 4);
    Rng rng(6);
    cases.push_back({"logistic", p.as_objective(), rng.normal_vector(10) * 0.3});
  }
  for (const Case& c : cases) {
    INFO(c.name);
    const DiagnosticReport report = check_derivatives(c.problem, c.theta, 10);
    CHECK(report.ok);
  }
}
