#include "fosi/bench.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>
#include <json.hpp>

#include "fosi/analysis.hpp"
#include "fosi/dense_eigh.hpp"
#include "fosi/rng.hpp"

namespace fosi::bench {

using nlohmann::json;

namespace {

json parse_json(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& err) {
    throw std::runtime_error("invalid JSON in " + what + ": " + err.what());
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open spec file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_json(buffer.str(), path);
}

BuiltProblem build_problem(const json& spec) {
  if (!spec.contains("family"))
    throw std::runtime_error("problem spec needs a 'family'");
  const std::string family = spec.at("family");
  const std::uint64_t seed = spec.value("seed", 0ull);

  BuiltProblem built;
  if (family == "spiked_quadratic") {
    const QuadraticProblem q = gen_spiked_quadratic(
        spec.at("n").get<int>(), spec.at("lambda1").get<double>(), seed);
    built.objective = q.as_objective();
    built.theta0 = q.theta0;
    built.known_spectrum = q.spectrum;
  } else if (family == "geometric_block_quadratic") {
    const QuadraticProblem q = gen_geometric_block_quadratic(
        spec.at("b").get<double>(), spec.at("zeta").get<int>(), seed);
    built.objective = q.as_objective();
    built.theta0 = q.theta0;
    built.known_spectrum = q.spectrum;
  } else if (family == "two_cluster_quadratic") {
    const QuadraticProblem q = gen_two_cluster_quadratic(seed);
    built.objective = q.as_objective();
    built.theta0 = q.theta0;
    built.known_spectrum = q.spectrum;
  } else if (family == "logistic_synthetic" || family == "logistic_csv") {
    LogisticProblem problem =
        family == "logistic_synthetic"
            ? gen_logistic(spec.at("samples").get<int>(),
                           spec.at("features").get<int>(), seed,
                           spec.value("l2_weight", 0.0))
            : load_logistic_csv(spec.at("path").get<std::string>(),
                                spec.value("l2_weight", 0.0));
    built.objective = problem.as_objective();
    built.theta0 = Vector::Zero(problem.dimension());
    if (spec.contains("batch_size")) {
      const int dataset = problem.dataset_size();
      const int batch = spec.at("batch_size").get<int>();
      const std::uint64_t batch_seed = spec.value("batch_seed", seed);
      std::optional<int> ese_batch;
      if (spec.contains("ese_batch_size"))
        ese_batch = spec.at("ese_batch_size").get<int>();
      built.make_schedule = [dataset, batch, batch_seed, ese_batch]() {
        return std::make_unique<BatchSchedule>(dataset, batch, batch_seed,
                                               ese_batch);
      };
    }
  } else {
    throw std::runtime_error("unknown problem family: " + family);
  }
  return built;
}

double auto_eta(const std::string& kind, const BuiltProblem& problem) {
  if (!problem.known_spectrum)
    throw std::runtime_error("eta 'auto' needs a problem with known spectrum");
  const Vector& lam = *problem.known_spectrum;
  const double lam_max = lam[0];
  const double lam_min = lam[lam.size() - 1];
  if (kind == "gd") return 2.0 / (lam_max + lam_min);
  if (kind == "heavy_ball") {
    const double s = std::sqrt(lam_max) + std::sqrt(lam_min);
    return 2.0 / (s * s);  // half the closed-form optimum; safe with fixed beta
  }
  throw std::runtime_error("eta 'auto' is only defined for gd and heavy_ball");
}

double resolve_eta(const json& entry, const std::string& kind,
                   const BuiltProblem& problem) {
  if (!entry.contains("eta")) throw std::runtime_error("optimizer entry needs 'eta'");
  const json& eta = entry.at("eta");
  if (eta.is_string()) {
    if (eta.get<std::string>() != "auto")
      throw std::runtime_error("eta must be a number or 'auto'");
    return auto_eta(kind, problem);
  }
  return eta.get<double>();
}

BaseOptimizer build_base(const json& entry, const BuiltProblem& problem,
                         std::optional<double> eta_override = std::nullopt,
                         std::optional<double> momentum_override = std::nullopt) {
  const std::string kind = entry.at("kind");
  const double eta = eta_override ? *eta_override : resolve_eta(entry, kind, problem);
  if (kind == "gd") return BaseOptimizer::gradient_descent(eta);
  if (kind == "heavy_ball") {
    const double beta = momentum_override.value_or(entry.value("beta", 0.9));
    return BaseOptimizer::heavy_ball(eta, beta);
  }
  if (kind == "adam") {
    const double beta1 = momentum_override.value_or(entry.value("beta1", 0.9));
    return BaseOptimizer::adam(eta, beta1, entry.value("beta2", 0.999),
                               entry.value("eps", 1e-8));
  }
  throw std::runtime_error("unknown base optimizer kind: " + kind);
}

FosiConfig build_fosi_config(const json& entry) {
  const json cfg = entry.value("fosi", json::object());
  FosiConfig config;
  config.k = cfg.value("k", 10);
  config.l = cfg.value("l", 0);
  config.alpha = cfg.value("alpha", 1.0);
  if (cfg.contains("T") && !cfg.at("T").is_string())
    config.refresh_interval = cfg.at("T").get<long>();
  config.rho = cfg.value("rho", 1.1);
  config.warmup = cfg.value("warmup", 0l);
  if (cfg.contains("c")) {
    const json& c = cfg.at("c");
    config.clip = c.is_string() ? std::numeric_limits<double>::infinity()
                                : c.get<double>();
  }
  config.seed = cfg.value("seed", 0ull);
  config.ese_on_dedicated_batch = cfg.value("ese_dedicated_batch", false);
  return config;
}

struct RunSpec {
  std::string id;
  std::string kind;        // gd | heavy_ball | adam | fosi
  std::string base_kind;   // for fosi entries
  json raw;
};

RunTrace execute(const RunSpec& run, const BuiltProblem& problem,
                 const StoppingRule& stop,
                 std::optional<double> eta_override = std::nullopt,
                 std::optional<double> momentum_override = std::nullopt) {
  std::unique_ptr<BatchSchedule> schedule;
  if (problem.make_schedule) schedule = problem.make_schedule();

  if (run.kind == "fosi") {
    BaseOptimizer base = build_base(run.raw.at("base"), problem, eta_override,
                                    momentum_override);
    const FosiConfig config = build_fosi_config(run.raw);
    return fosi_optimize(problem.objective, problem.theta0, config,
                         std::move(base), stop, schedule.get());
  }
  BaseOptimizer base = build_base(run.raw, problem, eta_override, momentum_override);
  return run_base_optimizer(problem.objective, problem.theta0, std::move(base),
                            stop, schedule.get());
}

std::vector<RunSpec> parse_optimizers(const json& spec) {
  if (!spec.contains("optimizers") || !spec.at("optimizers").is_array() ||
      spec.at("optimizers").empty())
    throw std::runtime_error("spec needs a non-empty 'optimizers' array");
  std::vector<RunSpec> runs;
  for (const json& entry : spec.at("optimizers")) {
    RunSpec run;
    run.kind = entry.at("kind");
    run.id = entry.value("id", run.kind);
    if (run.kind == "fosi") {
      if (!entry.contains("base"))
        throw std::runtime_error("fosi entry needs a 'base' optimizer");
      run.base_kind = entry.at("base").at("kind");
    }
    run.raw = entry;
    runs.push_back(std::move(run));
  }
  return runs;
}

StoppingRule parse_stop(const json& spec) {
  StoppingRule stop;
  stop.max_iterations = spec.at("iterations").get<long>();
  if (stop.max_iterations < 1)
    throw std::runtime_error("iteration budget must be >= 1");
  if (spec.contains("grad_norm_tol"))
    stop.grad_norm_tol = spec.at("grad_norm_tol").get<double>();
  return stop;
}

std::string csv_optional(const std::optional<double>& value) {
  return value ? format_double(*value) : std::string();
}

}  // namespace

BuiltProblem build_problem_from_json(const std::string& problem_json) {
  return build_problem(parse_json(problem_json, "problem spec"));
}

ExperimentResult run_experiment_json(const std::string& spec_json,
                                     const std::string& output_dir) {
  const json spec = parse_json(spec_json, "experiment spec");
  const BuiltProblem problem = build_problem(spec.at("problem"));
  const StoppingRule stop = parse_stop(spec);
  const long stride = spec.value("record_every", 1l);
  const std::vector<RunSpec> runs = parse_optimizers(spec);

  std::filesystem::create_directories(output_dir);

  ExperimentResult result;
  std::vector<RunTrace> traces;
  for (const RunSpec& run : runs) {
    RunTrace trace = execute(run, problem, stop);
    const std::string path = output_dir + "/" + run.id + ".csv";
    write_trace_csv(trace, path, stride);
    result.trace_paths.push_back(path);

    SummaryRow row;
    row.optimizer_id = run.id;
    row.final_f = trace.final_f();
    row.status = trace.status;
    if (spec.contains("f_threshold"))
      row.iters_to_threshold =
          trace.iterations_to_threshold(spec.at("f_threshold").get<double>());
    result.summary.push_back(row);
    traces.push_back(std::move(trace));
  }

  // Final-loss ratio of each fosi entry against the first plain entry with
  // the same base kind.
  for (size_t i = 0; i < runs.size(); ++i) {
    if (runs[i].kind != "fosi") continue;
    for (size_t j = 0; j < runs.size(); ++j) {
      if (runs[j].kind != runs[i].base_kind) continue;
      if (result.summary[j].final_f != 0.0)
        result.summary[i].fosi_base_ratio =
            result.summary[i].final_f / result.summary[j].final_f;
      break;
    }
  }

  result.summary_path = output_dir + "/summary.csv";
  std::ofstream out(result.summary_path);
  if (!out) throw std::runtime_error("cannot write " + result.summary_path);
  out << "optimizer_id,final_f,iters_to_threshold,status,fosi_base_ratio\n";
  for (const SummaryRow& row : result.summary) {
    out << row.optimizer_id << ',' << format_double(row.final_f) << ','
        << row.iters_to_threshold << ',' << row.status << ','
        << csv_optional(row.fosi_base_ratio) << '\n';
  }
  return result;
}

ExperimentResult run_experiment(const std::string& spec_path) {
  const json spec = load_json_file(spec_path);
  if (!spec.contains("output_dir"))
    throw std::runtime_error("spec needs 'output_dir'");
  return run_experiment_json(spec.dump(), spec.at("output_dir"));
}

std::vector<SweepCell> sweep_learning_rates_json(const std::string& spec_json,
                                                 const std::string& output_dir) {
  const json spec = parse_json(spec_json, "sweep spec");
  const BuiltProblem problem = build_problem(spec.at("problem"));
  const StoppingRule stop = parse_stop(spec);
  const std::vector<RunSpec> runs = parse_optimizers(spec);

  if (!spec.contains("sweep") || !spec.at("sweep").contains("eta") ||
      spec.at("sweep").at("eta").empty())
    throw std::invalid_argument("empty sweep");
  const std::vector<double> etas =
      spec.at("sweep").at("eta").get<std::vector<double>>();
  std::vector<std::optional<double>> momenta{std::nullopt};
  if (spec.at("sweep").contains("momentum")) {
    momenta.clear();
    for (double m : spec.at("sweep").at("momentum").get<std::vector<double>>())
      momenta.push_back(m);
    if (momenta.empty()) momenta.push_back(std::nullopt);
  }

  std::vector<SweepCell> cells;
  for (const RunSpec& run : runs) {
    const std::string& momentum_kind =
        run.kind == "fosi" ? run.base_kind : run.kind;
    const bool uses_momentum = momentum_kind != "gd";
    const std::vector<std::optional<double>> cell_momenta =
        uses_momentum ? momenta
                      : std::vector<std::optional<double>>{std::nullopt};
    for (double eta : etas) {
      for (const auto& momentum : cell_momenta) {
        SweepCell cell;
        cell.optimizer_id = run.id;
        cell.eta = eta;
        cell.momentum = momentum;
        RunTrace trace = execute(run, problem, stop, eta, momentum);
        cell.final_f = trace.final_f();
        cell.status = trace.status;
        cells.push_back(cell);
      }
    }
  }

  std::filesystem::create_directories(output_dir);
  const std::string path = output_dir + "/sweep.csv";
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "optimizer_id,eta,momentum,final_f,status\n";
  for (const SweepCell& cell : cells) {
    out << cell.optimizer_id << ',' << format_double(cell.eta) << ','
        << csv_optional(cell.momentum) << ',' << format_double(cell.final_f)
        << ',' << cell.status << '\n';
  }
  return cells;
}

std::vector<SweepCell> sweep_learning_rates(const std::string& spec_path) {
  const json spec = load_json_file(spec_path);
  if (!spec.contains("output_dir"))
    throw std::runtime_error("spec needs 'output_dir'");
  return sweep_learning_rates_json(spec.dump(), spec.at("output_dir"));
}

namespace {

Matrix random_spd(int n, std::uint64_t seed, Vector* spectrum_out = nullptr) {
  Rng rng(seed);
  Matrix gaussian(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) gaussian(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(gaussian);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, n);
  Vector lam = rng.uniform_vector(n, 0.5, 10.0);
  std::sort(lam.data(), lam.data() + n, std::greater<double>());
  if (spectrum_out) *spectrum_out = lam;
  return q * lam.asDiagonal() * q.transpose();
}

}  // namespace

bool run_lemma_checks(int n, std::uint64_t seed, std::ostream& out,
                      const std::string& csv_path) {
  bool all_ok = true;
  std::ofstream csv;
  if (!csv_path.empty()) {
    csv.open(csv_path);
    if (!csv) throw std::runtime_error("cannot write " + csv_path);
    csv << EffectivePreconditionerReport::csv_header() << "\n";
  }

  auto emit = [&](const std::string& label,
                  const EffectivePreconditionerReport& report, bool ok) {
    out << report.to_text(label) << "  check: " << (ok ? "PASS" : "FAIL")
        << "\n\n";
    if (csv.is_open()) csv << report.to_csv_row(label) << "\n";
    all_ok = all_ok && ok;
  };

  // Identity base preconditioner on a random SPD matrix: the effective
  // spectrum has a closed form.
  {
    const int k = 5, l = 3;
    const double alpha = 1.0, eta = 0.01;
    const Matrix h = random_spd(n, seed);
    const auto report = effective_preconditioner_identity(h, k, l, alpha, eta);
    const Vector expected = expected_identity_effective_spectrum(
        jacobi_eigenvalues(h), k, l, alpha, eta);
    const double err =
        (report.effective_eigenvalues - expected).cwiseAbs().maxCoeff();
    const bool ok = report.symmetry_residual <= 1e-10 &&
                    report.min_p_inv_eigenvalue > 0.0 && err <= 1e-8 &&
                    report.alpha_eigenspace_residual <= 1e-8;
    emit("identity", report, ok);
  }

  // Diagonal (Adam-derived) base preconditioner: alpha eigenspace and
  // positive definiteness.
  {
    const int dn = 30, k = 4, l = 2;
    const double alpha = 1.0, eta = 0.001;
    const Matrix h = random_spd(dn, mix_seed(seed, 1));
    BaseOptimizer adam = BaseOptimizer::adam(eta);
    adam.reset(dn);
    Rng grad_rng(mix_seed(seed, 2));
    Vector g;
    for (int step = 0; step < 3; ++step) {
      g = grad_rng.normal_vector(dn);
      adam.step(g);
    }
    const Vector q = adam.inverse_preconditioner_diag(g);
    const auto report = effective_preconditioner_diagonal(h, q, k, l, alpha, eta);
    const bool ok = report.symmetry_residual <= 1e-10 &&
                    report.min_p_inv_eigenvalue > 0.0 &&
                    report.alpha_eigenspace_residual <= 1e-8;
    emit("diagonal", report, ok);
  }

  // Two-cluster counter-example: the effective condition number degrades
  // (1e5 vs 1e3) even though each subspace improves.
  {
    const QuadraticProblem q = gen_two_cluster_quadratic(seed);
    const auto report = effective_preconditioner_identity(q.dense_hessian(), 9,
                                                          0, 1.0, 0.001);
    const auto cases =
        condition_number_cases(q.spectrum[0], q.spectrum[9], q.spectrum[99],
                               q.spectrum[99], 1.0, 0.001);
    const bool ok = std::abs(report.kappa - 1000.0) <= 1e-6 &&
                    std::abs(report.kappa_tilde - 1e5) <= 1.0 &&
                    !report.improved && cases.case_label == 3 &&
                    !cases.improved;
    emit("two_cluster", report, ok);
  }

  out << (all_ok ? "all lemma checks passed" : "LEMMA CHECK FAILURES") << "\n";
  return all_ok;
}

}  // namespace fosi::bench
