#include "fosi/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <vector>

#include "fosi/trace.hpp"

namespace fosi::bench {

namespace {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;  // log10(f), clamped below
  bool diverged = false;
};

constexpr double kWidth = 760.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 24.0;
constexpr double kBottom = 48.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string trim_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

void emit_plot(const std::vector<std::string>& trace_paths,
               const std::string& output_path) {
  if (trace_paths.empty()) throw std::invalid_argument("emit_plot: no traces given");

  std::vector<Series> series;
  for (const std::string& path : trace_paths) {
    const RunTrace trace = read_trace_csv(path);
    if (trace.rows.empty())
      throw std::runtime_error("trace has no rows: " + path);
    Series s;
    s.label = std::filesystem::path(path).stem().string();
    s.diverged = trace.diverged();
    for (const TraceRow& row : trace.rows) {
      if (!std::isfinite(row.f_value)) break;  // truncate a diverged tail
      s.x.push_back(static_cast<double>(row.iteration));
      s.y.push_back(std::log10(std::max(row.f_value, 1e-300)));
    }
    if (s.x.empty()) throw std::runtime_error("trace has no finite rows: " + path);
    series.push_back(std::move(s));
  }

  double x_max = 1.0, y_min = 0.0, y_max = 1.0;
  bool first = true;
  for (const Series& s : series) {
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (first) {
        y_min = y_max = s.y[i];
        first = false;
      }
      x_max = std::max(x_max, s.x[i]);
      y_min = std::min(y_min, s.y[i]);
      y_max = std::max(y_max, s.y[i]);
    }
  }
  if (y_max - y_min < 1.0) y_max = y_min + 1.0;

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + plot_w * (x / x_max); };
  auto sy = [&](double y) {
    return kTop + plot_h * (1.0 - (y - y_min) / (y_max - y_min));
  };

  std::ofstream out(output_path);
  if (!out) throw std::runtime_error("cannot write plot file: " + output_path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
      << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " "
      << kHeight << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h
      << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

  // Horizontal grid lines at integer decades.
  for (double decade = std::ceil(y_min); decade <= std::floor(y_max); ++decade) {
    const double y = sy(decade);
    out << "<line x1=\"" << kLeft << "\" y1=\"" << y << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << y
        << "\" stroke=\"#ddd\" stroke-width=\"0.6\"/>\n"
        << "<text x=\"" << kLeft - 8 << "\" y=\"" << y + 4
        << "\" font-size=\"11\" text-anchor=\"end\" font-family=\"sans-serif\">1e"
        << trim_number(decade) << "</text>\n";
  }
  // X ticks.
  for (int tick = 0; tick <= 5; ++tick) {
    const double x_val = x_max * tick / 5.0;
    const double x = sx(x_val);
    out << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x
        << "\" y2=\"" << kTop + plot_h + 5
        << "\" stroke=\"#444\" stroke-width=\"1\"/>\n"
        << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 20
        << "\" font-size=\"11\" text-anchor=\"middle\" font-family=\"sans-serif\">"
        << trim_number(x_val) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 8
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\">"
      << "iteration</text>\n"
      << "<text x=\"16\" y=\"" << kTop + plot_h / 2
      << "\" font-size=\"12\" text-anchor=\"middle\" font-family=\"sans-serif\""
      << " transform=\"rotate(-90 16 " << kTop + plot_h / 2 << ")\">"
      << "objective value</text>\n";

  for (size_t i = 0; i < series.size(); ++i) {
    const Series& s = series[i];
    const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.5\" points=\"";
    for (size_t j = 0; j < s.x.size(); ++j) {
      out << trim_number(sx(s.x[j])) << ',' << trim_number(sy(s.y[j])) << ' ';
    }
    out << "\"/>\n";

    const double ly = kTop + 16.0 + 16.0 * static_cast<double>(i);
    out << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly - 4
        << "\" x2=\"" << kLeft + plot_w - 130 << "\" y2=\"" << ly - 4
        << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << kLeft + plot_w - 124 << "\" y=\"" << ly
        << "\" font-size=\"11\" font-family=\"sans-serif\">" << s.label
        << (s.diverged ? " (diverged)" : "") << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace fosi::bench
