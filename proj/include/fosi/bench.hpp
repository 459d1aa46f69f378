#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fosi/fosi.hpp"
#include "fosi/objective.hpp"
#include "fosi/problems.hpp"
#include "fosi/trace.hpp"

namespace fosi::bench {

// A problem instantiated from a spec file. Stochastic problems carry a
// factory so every optimizer run gets a fresh, identically seeded schedule.
struct BuiltProblem {
  ObjectiveProblem objective;
  Vector theta0;
  std::optional<Vector> known_spectrum;  // quadratic families
  std::function<std::unique_ptr<BatchSchedule>()> make_schedule;
};

BuiltProblem build_problem_from_json(const std::string& problem_json);

struct SummaryRow {
  std::string optimizer_id;
  double final_f = 0.0;
  long iters_to_threshold = -1;
  std::string status;
  std::optional<double> fosi_base_ratio;  // fosi entries: final f / base final f
};

struct ExperimentResult {
  std::vector<SummaryRow> summary;
  std::vector<std::string> trace_paths;
  std::string summary_path;
};

// Runs every optimizer in the spec over the spec's problem, writing one trace
// CSV per optimizer plus a summary CSV. A diverging run is reported in the
// summary, not treated as a harness failure.
ExperimentResult run_experiment(const std::string& spec_path);
ExperimentResult run_experiment_json(const std::string& spec_json,
                                     const std::string& output_dir);

struct SweepCell {
  std::string optimizer_id;
  double eta = 0.0;
  std::optional<double> momentum;
  double final_f = 0.0;
  std::string status;
};

// Grid of (optimizer, eta, momentum) cells over the spec's problem; writes
// sweep.csv with the final objective value per cell.
std::vector<SweepCell> sweep_learning_rates(const std::string& spec_path);
std::vector<SweepCell> sweep_learning_rates_json(const std::string& spec_json,
                                                 const std::string& output_dir);

// Lemma verification driver behind the `verify-lemmas` CLI command. Returns
// true when every check passes; writes a CSV report when csv_path is given.
bool run_lemma_checks(int n, std::uint64_t seed, std::ostream& out,
                      const std::string& csv_path = "");

}  // namespace fosi::bench
