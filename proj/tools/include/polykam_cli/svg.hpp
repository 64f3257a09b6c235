#pragma once

#include <string>
#include <vector>

namespace polykam::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;  // scatter instead of a polyline
};

// Self-contained SVG with axes, tick labels and a legend.
std::string svg_plot(const std::string& title, const std::string& xlabel, const std::string& ylabel,
                     const std::vector<Series>& series);

}  // namespace polykam::cli
