#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "fosi/analysis.hpp"
#include "fosi/fosi.hpp"
#include "fosi/problems.hpp"
#include "support/test_support.hpp"

using namespace fosi;

TEST_CASE("jacobi_eigh recovers a constructed spectrum") {
  Vector spectrum;
  Matrix basis;
  const Matrix a = test::random_spd(40, 11, &spectrum, &basis);
  Vector lam;
  Matrix v;
  jacobi_eigh(a, lam, v);
  CHECK((lam - spectrum).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((a * v - v * lam.asDiagonal()).cwiseAbs().maxCoeff() <=
        1e-9 * spectrum[0]);
  CHECK((v.transpose() * v - Matrix::Identity(40, 40)).cwiseAbs().maxCoeff() <=
        1e-10);
}

TEST_CASE("identity-case effective spectrum on diag(4,1)") {
  Matrix h = Matrix::Zero(2, 2);
  h(0, 0) = 4.0;
  h(1, 1) = 1.0;
  const auto report = effective_preconditioner_identity(h, 1, 0, 1.0, 0.1);
  REQUIRE(report.effective_eigenvalues.size() == 2);
  CHECK(report.effective_eigenvalues[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(report.effective_eigenvalues[1] == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(report.symmetry_residual <= 1e-10);
  CHECK(report.min_p_inv_eigenvalue > 0.0);
}

TEST_CASE("identity case reproduces {alpha x (k+l)} union eta middle spectrum") {
  for (std::uint64_t seed : {21ull, 22ull}) {
    Vector spectrum;
    const Matrix h = test::random_spd(50, seed, &spectrum);
    const int k = 5, l = 3;
    const double alpha = 1.0, eta = 0.01;
    const auto report = effective_preconditioner_identity(h, k, l, alpha, eta);
    const Vector expected =
        expected_identity_effective_spectrum(spectrum, k, l, alpha, eta);
    CHECK((report.effective_eigenvalues - expected).cwiseAbs().maxCoeff() <=
          1e-8);
    CHECK(report.alpha_eigenspace_residual <= 1e-8);
  }
}

TEST_CASE("two-cluster instance: condition number degrades but case is none") {
  const QuadraticProblem q = gen_two_cluster_quadratic(13);
  const auto report =
      effective_preconditioner_identity(q.dense_hessian(), 9, 0, 1.0, 0.001);
  CHECK(report.kappa == doctest::Approx(1000.0).epsilon(1e-8));
  CHECK(report.kappa_tilde == doctest::Approx(1e5).epsilon(1e-6));
  CHECK_FALSE(report.improved);
  CHECK(report.case_label == 0);
}

TEST_CASE("diagonal case with q = ones reduces to the identity case") {
  Vector spectrum;
  const Matrix h = test::random_spd(30, 5, &spectrum);
  const auto identity = effective_preconditioner_identity(h, 4, 2, 0.9, 0.05);
  const auto diagonal = effective_preconditioner_diagonal(
      h, Vector::Ones(30), 4, 2, 0.9, 0.05);
  CHECK((identity.p_inv - diagonal.p_inv).cwiseAbs().maxCoeff() <= 1e-10);
  CHECK((identity.effective_eigenvalues - diagonal.effective_eigenvalues)
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
}

TEST_CASE("diagonal hessian: remaining eigenvalues are eta q lam, permuted") {
  const int n = 12, k = 3, l = 2;
  Rng rng(9);
  Vector lam_diag(n);
  for (int i = 0; i < n; ++i) lam_diag[i] = 0.5 + 2.0 * rng.uniform();
  Matrix h = lam_diag.asDiagonal();
  Vector q = rng.uniform_vector(n, 0.2, 3.0);
  const double alpha = 1.0, eta = 0.01;

  const auto report = effective_preconditioner_diagonal(h, q, k, l, alpha, eta);

  // The eigenbasis of a diagonal H is axis-aligned, so the permutation that
  // sorts lam_diag also carries q along.
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return lam_diag[a] > lam_diag[b]; });
  std::vector<double> expected;
  for (int i = 0; i < k + l; ++i) expected.push_back(alpha);
  for (int i = k; i < n - l; ++i)
    expected.push_back(eta * q[order[i]] * lam_diag[order[i]]);
  std::sort(expected.begin(), expected.end(), std::greater<double>());

  REQUIRE(report.effective_eigenvalues.size() == n);
  for (int i = 0; i < n; ++i)
    CHECK(report.effective_eigenvalues[i] ==
          doctest::Approx(expected[i]).epsilon(1e-8));
}

TEST_CASE("adam-like diagonal preconditioner keeps P^-1 positive definite") {
  for (std::uint64_t seed : {41ull, 42ull, 43ull}) {
    const Matrix h = test::random_spd(30, seed);
    BaseOptimizer adam = BaseOptimizer::adam(0.001);
    adam.reset(30);
    Rng rng(seed);
    Vector g;
    for (int step = 0; step < 4; ++step) {
      g = rng.normal_vector(30);
      adam.step(g);
    }
    const Vector q = adam.inverse_preconditioner_diag(g);
    const auto report =
        effective_preconditioner_diagonal(h, q, 4, 2, 1.0, 0.001);
    CHECK(report.min_p_inv_eigenvalue > 0.0);
    CHECK(report.symmetry_residual <= 1e-10);
    CHECK(report.alpha_eigenspace_residual <= 1e-8);
  }
}

TEST_CASE("nonpositive q is rejected") {
  const Matrix h = test::random_spd(10, 3);
  Vector q = Vector::Ones(10);
  q[4] = 0.0;
  CHECK_THROWS_AS(effective_preconditioner_diagonal(h, q, 2, 1, 1.0, 0.01),
                  std::invalid_argument);
}

TEST_CASE("condition number case classification") {
  SUBCASE("alpha inside the scaled middle band always improves") {
    const auto r = condition_number_cases(10.0, 5.0, 2.0, 1.0, 0.01 * 3.0, 0.01);
    CHECK(r.case_label == 2);
    CHECK(r.improved);
    CHECK(r.kappa_tilde == doctest::Approx(2.5));
  }
  SUBCASE("the two-cluster counter-example lands in case 3, unimproved") {
    const auto r = condition_number_cases(10.0, 9.0, 0.01, 0.01, 1.0, 0.001);
    CHECK(r.case_label == 3);
    CHECK_FALSE(r.improved);
    CHECK(r.kappa == doctest::Approx(1000.0));
    CHECK(r.kappa_tilde == doctest::Approx(1e5));
  }
  SUBCASE("degenerate spectrum sits exactly on the boundary") {
    const auto r = condition_number_cases(4.0, 4.0, 1.0, 1.0, 0.1 * 4.0, 0.1);
    CHECK(r.case_label == 2);
    CHECK(r.kappa_tilde == doctest::Approx(r.kappa));
    CHECK(r.improved);
  }
  SUBCASE("small alpha: case 1 improves iff eta lam_k1 / alpha <= kappa") {
    const auto r = condition_number_cases(10.0, 5.0, 2.0, 1.0, 0.001, 0.01);
    CHECK(r.case_label == 1);
    CHECK(r.kappa_tilde == doctest::Approx(0.01 * 5.0 / 0.001));
    CHECK_FALSE(r.improved);  // 50 > 10
  }
  SUBCASE("ordering violations are rejected") {
    CHECK_THROWS_AS(condition_number_cases(1.0, 2.0, 0.5, 0.1, 1.0, 0.1),
                    std::invalid_argument);
    CHECK_THROWS_AS(condition_number_cases(4.0, 2.0, 1.0, 0.0, 1.0, 0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("projection form equals the block-diagonal closed form (identity case)") {
  Vector spectrum;
  Matrix basis;
  const Matrix h = test::random_spd(25, 7, &spectrum, &basis);
  const int k = 4, l = 3;
  const double alpha = 0.7, eta = 0.02;
  const auto report = effective_preconditioner_identity(h, k, l, alpha, eta);

  // V diag([alpha u, eta 1]) V' assembled directly from the decomposition.
  Vector lam;
  Matrix v;
  jacobi_eigh(h, lam, v);
  Vector diag(25);
  for (int i = 0; i < k; ++i)
    diag[i] = alpha / std::max(std::abs(lam[i]), kEseDivisorFloor);
  for (int i = k; i < 25 - l; ++i) diag[i] = eta;
  for (int i = 25 - l; i < 25; ++i)
    diag[i] = alpha / std::max(std::abs(lam[i]), kEseDivisorFloor);
  const Matrix closed_form = v * diag.asDiagonal() * v.transpose();
  CHECK((report.p_inv - closed_form).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("one fosi-gd step equals theta - P^-1 g with the closed-form P^-1") {
  Vector spectrum;
  Matrix basis;
  const Matrix h = test::random_spd(20, 15, &spectrum, &basis);
  const ObjectiveProblem problem = test::quadratic_objective(h);
  const int k = 4;
  const double alpha = 1.0, eta = 0.05;

  SpectrumEstimate est;
  est.k = k;
  est.l = 0;
  est.lam_hat = spectrum.head(k);
  est.v_hat = basis.leftCols(k);
  est.u = est.lam_hat.cwiseAbs().cwiseMax(kEseDivisorFloor).cwiseInverse();
  est.top_ritz = spectrum[0];
  est.bottom_ritz = spectrum[19];

  FosiConfig config;
  config.k = k;
  config.alpha = alpha;
  config.clip = 1.0;  // momentum-free base, unscaled rate
  config.refresh_interval = 100;
  FosiState state =
      make_fosi_state(config, BaseOptimizer::gradient_descent(eta), 20);
  fosi_refresh_spectrum(state, est);

  Rng rng(3);
  const Vector theta = rng.normal_vector(20);
  const Vector g = problem.gradient(theta);
  const Vector stepped = fosi_update_step(theta, g, state);

  const auto report = effective_preconditioner_identity(h, k, 0, alpha, eta);
  const Vector direct = theta - report.p_inv * g;
  CHECK((stepped - direct).cwiseAbs().maxCoeff() <=
        1e-10 * std::max(1.0, theta.cwiseAbs().maxCoeff()));
}

TEST_CASE("preconditioner spectrum stays inside [1/z, 1/eps] along runs") {
  // z bounds the Hessian norm; gd (q = 1) requires z >= 1 as well.
  const QuadraticProblem q = gen_spiked_quadratic(50, 5.0, 19);
  const ObjectiveProblem problem = q.as_objective();
  const double z = std::max(q.spectrum[0], 1.0) * (1.0 + 1e-9);

  FosiConfig config;
  config.k = 6;
  config.refresh_interval = 10;
  config.seed = 3;
  FosiState state =
      make_fosi_state(config, BaseOptimizer::gradient_descent(0.05), 50);

  Vector theta = q.theta0;
  for (long t = 0; t < 40; ++t) {
    if (t % 10 == 0) {
      fosi_refresh_spectrum(state, ese(problem, theta, 6, 0, mix_seed(3, t)));
      const Vector q_diag = state.base.inverse_preconditioner_diag(
          problem.gradient(theta));
      const Vector spectrum_bounds =
          unscaled_preconditioner_spectrum(*state.spectrum, q_diag);
      for (Eigen::Index i = 0; i < spectrum_bounds.size(); ++i) {
        CHECK(spectrum_bounds[i] >= 1.0 / z);
        CHECK(spectrum_bounds[i] <= 1.0 / kEseDivisorFloor);
      }
    }
    theta = fosi_update_step(theta, problem.gradient(theta), state);
  }
}

TEST_CASE("report serialization carries the verdict") {
  const Matrix h = test::random_spd(20, 25);
  const auto report = effective_preconditioner_identity(h, 3, 2, 1.0, 0.01);
  const std::string text = report.to_text("identity");
  CHECK(text.find("kappa") != std::string::npos);
  const std::string row = report.to_csv_row("identity");
  CHECK(row.rfind("identity,20,3,2,", 0) == 0);
  CHECK(EffectivePreconditionerReport::csv_header().find("kappa_tilde") !=
        std::string::npos);
}
