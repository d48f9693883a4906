#pragma once

#include <string>
#include <vector>

namespace fdirw::svg {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // draw points instead of a polyline
};

struct ChartOptions {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

/// Self-contained SVG line chart with axes, ticks and a legend. Output is a
/// pure function of the inputs.
std::string line_chart(const std::vector<Series>& series, const ChartOptions& options);

}  // namespace fdirw::svg
