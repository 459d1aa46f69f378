#pragma once

#include <optional>
#include <string>
#include <vector>

namespace fosi {

// One per-iteration record of an optimization run.
struct TraceRow {
  long iteration = 0;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double eta_effective = 0.0;
  int ese_call = 0;
  double elapsed_seconds = 0.0;
};

struct RunTrace {
  std::vector<TraceRow> rows;
  std::string status = "ok";  // ok | diverged | ese_failed
  std::vector<std::string> notes;

  double final_f() const;
  long final_iteration() const;
  // First iteration with f <= threshold, or -1.
  long iterations_to_threshold(double threshold) const;
  bool diverged() const { return status == "diverged"; }
};

// Equality of the deterministic trace content. elapsed_seconds is wall time
// and is excluded from the comparison.
bool traces_equal(const RunTrace& a, const RunTrace& b);

struct StoppingRule {
  long max_iterations = 0;
  std::optional<double> grad_norm_tol;
  std::optional<double> f_target;
};

// CSV schema: header + one row per record; stride subsamples iterations but
// always keeps the final row. Floats carry 17 significant digits.
void write_trace_csv(const RunTrace& trace, const std::string& path,
                     long stride = 1);
RunTrace read_trace_csv(const std::string& path);

std::string format_double(double x);  // shortest 17-significant-digit form

}  // namespace fosi
