#pragma once

#include <string>
#include <utility>
#include <vector>

namespace am2r {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

struct PlotOptions {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  int width = 640;
  int height = 440;
};

// Polyline chart; non-finite points (and non-positive ones on log axes)
// break the line. Returns the SVG document.
std::string line_plot_svg(const std::vector<Series>& series,
                          const PlotOptions& opt);

// Heat map over an irregular grid of cell centers; values row-major with
// ys.size() rows and xs.size() columns.
std::string heat_grid_svg(const std::vector<double>& xs,
                          const std::vector<double>& ys,
                          const std::vector<double>& values,
                          const PlotOptions& opt);

// Letter-value summary per labelled group: median line plus nested quantile
// boxes at depths 1/4, 1/8, 1/16, ... while at least two points remain
// outside.
std::string letter_value_svg(
    const std::vector<std::pair<std::string, std::vector<double>>>& groups,
    const PlotOptions& opt);

void write_svg_file(const std::string& path, const std::string& svg);

// Linear-interpolation quantile of a sorted sample, p in [0,1].
double sorted_quantile(const std::vector<double>& sorted, double p);

}  // namespace am2r
