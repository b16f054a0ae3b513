#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace lesionrl::report {

struct Series {
  std::string label;
  std::vector<std::pair<double, double>> points;
  bool markers = false;
};

struct Axes {
  std::string title;
  std::string x_label;
  std::string y_label;
  // Fixed y range when lo < hi; otherwise fitted to the data.
  double y_lo = 0.0;
  double y_hi = 0.0;
};

struct Bar {
  std::string label;
  double value = 0.0;
  double error = 0.0;  // half-length of the error bar; 0 draws none
};

// Standalone SVG documents; output depends only on the inputs.
void line_chart(std::ostream& out, const Axes& axes, const std::vector<Series>& series);
void bar_chart(std::ostream& out, const Axes& axes, const std::vector<Bar>& bars);

// Several line charts stacked vertically in one document.
void stacked_line_charts(std::ostream& out,
                         const std::vector<std::pair<Axes, std::vector<Series>>>& panels);

}  // namespace lesionrl::report
