#pragma once

#include <string>
#include <vector>

namespace popdyn {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Self-contained SVG line plot (inline polylines, axes, legend); no
/// external renderer, no timestamps.
std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series);

} // namespace popdyn
