#pragma once

#include <string>
#include <vector>

namespace stx {

enum class SeriesStyle { Line, Points };

struct ChartSeries {
  std::string label;
  std::vector<double> x, y;
  SeriesStyle style = SeriesStyle::Line;
  bool secondary_axis = false;  // plotted against the right-hand y axis
  std::string color = "#1f77b4";
};

struct ChartSpec {
  std::string title;
  std::string x_label, y_label, y2_label;
  bool log_x = false, log_y = false;  // log scales apply to the primary axes
  std::vector<ChartSeries> series;
  int width = 720, height = 440;
};

/// Static SVG document. Non-finite points (and non-positive ones on log
/// axes) are dropped. Output depends only on the spec.
std::string render_svg(const ChartSpec& spec);

}  // namespace stx
