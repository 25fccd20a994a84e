#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "workflow.hpp"

namespace soniclog {

// Closed depth-index window [lo, hi].
struct WindowSpec {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct ReportInput {
  PredictionTable predictions;
  std::vector<double> labels;  // aligned with predictions; empty when unlabeled
  std::vector<WindowSpec> windows;
  double flag_k = 1.5;
};

// Human-readable run summary: interval bands, per-window coverage (when
// labels are present), and high-variance flags.
std::string render_report(const ReportInput& input);

void write_report_text(const std::string& path, const ReportInput& input);

// Depth track as a static vector graphic: mean curve, confidence band,
// labels when present, flagged depths, and shaded windows.
void write_report_svg(const std::string& path, const ReportInput& input);

}  // namespace soniclog
