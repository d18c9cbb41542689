#pragma once

#include <string>
#include <vector>

namespace hyfl::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct ChartLabels {
  std::string title;
  std::string x;
  std::string y;
};

// Line chart with one polyline per series, axes, five ticks per axis and a legend.
// Output depends only on the inputs.
std::string render_svg(const std::vector<Series>& series, const ChartLabels& labels);

}  // namespace hyfl::cli
