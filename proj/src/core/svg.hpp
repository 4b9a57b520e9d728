#pragma once

#include <string>
#include <vector>

namespace qpat {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Render a standalone SVG line plot. Output is a deterministic function of
/// the inputs (fixed layout, fixed palette, fixed number formatting), so
/// repeated runs produce byte-identical files. Log axes drop nonpositive
/// points; an axis with no finite spread is padded to a unit interval.
std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel,
                          const std::vector<PlotSeries>& series,
                          bool logx = false, bool logy = false);

}  // namespace qpat
