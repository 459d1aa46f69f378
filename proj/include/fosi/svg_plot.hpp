#pragma once

#include <string>
#include <vector>

namespace fosi::bench {

// Renders trace CSVs as a log-scale learning-curve line chart (objective
// value vs iteration) in a standalone SVG file. Series are labeled by file
// stem; a diverged trace is truncated at its last finite row and annotated.
void emit_plot(const std::vector<std::string>& trace_paths,
               const std::string& output_path);

}  // namespace fosi::bench
