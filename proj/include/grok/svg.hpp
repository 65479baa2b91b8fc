#pragma once

#include <string>
#include <vector>

namespace grok::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotOptions {
  std::string title;
  std::string x_label = "step";
  std::string y_label;
  bool log_x = false;
  bool log_y = true;
  int width = 760;
  int height = 460;
};

// Standalone SVG line chart. Points that cannot be drawn on a log axis
// (<= 0 or non-finite) split the line instead of being clamped.
std::string line_chart(const std::vector<Series>& series, const PlotOptions& opts);

}  // namespace grok::svg
