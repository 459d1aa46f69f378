#include "fosi/trace.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace fosi {

double RunTrace::final_f() const {
  if (rows.empty()) throw std::logic_error("empty trace");
  return rows.back().f_value;
}

long RunTrace::final_iteration() const {
  if (rows.empty()) throw std::logic_error("empty trace");
  return rows.back().iteration;
}

long RunTrace::iterations_to_threshold(double threshold) const {
  for (const TraceRow& row : rows) {
    if (row.f_value <= threshold) return row.iteration;
  }
  return -1;
}

bool traces_equal(const RunTrace& a, const RunTrace& b) {
  if (a.status != b.status || a.rows.size() != b.rows.size()) return false;
  for (size_t i = 0; i < a.rows.size(); ++i) {
    const TraceRow& x = a.rows[i];
    const TraceRow& y = b.rows[i];
    if (x.iteration != y.iteration || x.f_value != y.f_value ||
        x.grad_norm != y.grad_norm || x.eta_effective != y.eta_effective ||
        x.ese_call != y.ese_call)
      return false;
  }
  return true;
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void write_trace_csv(const RunTrace& trace, const std::string& path,
                     long stride) {
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open trace file for writing: " + path);
  out << "iteration,f_value,grad_norm,eta_effective,ese_call,elapsed_seconds\n";
  for (size_t i = 0; i < trace.rows.size(); ++i) {
    if (i % static_cast<size_t>(stride) != 0 && i + 1 != trace.rows.size())
      continue;
    const TraceRow& row = trace.rows[i];
    out << row.iteration << ',' << format_double(row.f_value) << ','
        << format_double(row.grad_norm) << ','
        << format_double(row.eta_effective) << ',' << row.ese_call << ','
        << format_double(row.elapsed_seconds) << '\n';
  }
  out << "# status: " << trace.status << '\n';
  for (const std::string& note : trace.notes) out << "# note: " << note << '\n';
}

RunTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace file: " + path);
  RunTrace trace;
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error("empty trace file: " + path);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line.rfind("# status: ", 0) == 0) {
      trace.status = line.substr(10);
      continue;
    }
    if (line.rfind("# note: ", 0) == 0) {
      trace.notes.push_back(line.substr(8));
      continue;
    }
    if (line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw std::runtime_error("malformed trace row in " + path + ": " + line);
    try {
      TraceRow row;
      row.iteration = std::stol(cells[0]);
      row.f_value = std::stod(cells[1]);  // stod handles nan/inf rows
      row.grad_norm = std::stod(cells[2]);
      row.eta_effective = std::stod(cells[3]);
      row.ese_call = std::stoi(cells[4]);
      row.elapsed_seconds = std::stod(cells[5]);
      trace.rows.push_back(row);
    } catch (const std::exception&) {
      throw std::runtime_error("malformed trace row in " + path + ": " + line);
    }
  }
  return trace;
}

}  // namespace fosi
