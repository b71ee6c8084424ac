#include "popdyn/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace popdyn {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#17becf", "#7f7f7f", "#bcbd22", "#e377c2"};

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::string render_line_plot(const std::string& title, const std::string& x_label,
                             const std::string& y_label,
                             const std::vector<PlotSeries>& series) {
    const double width = 820, height = 520;
    const double ml = 70, mr = 170, mt = 46, mb = 56;
    const double pw = width - ml - mr, ph = height - mt - mb;

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (!(xmin < xmax)) {
        xmin -= 1;
        xmax += 1;
    }
    if (!(ymin < ymax)) {
        ymin -= 1;
        ymax += 1;
    }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ymin) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
           num(height) + "\">\n";
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += "<text x=\"" + num(ml) + "\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">" +
           title + "</text>\n";

    // axes box and ticks
    out += "<rect x=\"" + num(ml) + "\" y=\"" + num(mt) + "\" width=\"" + num(pw) +
           "\" height=\"" + num(ph) + "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double fx = xmin + (xmax - xmin) * i / 5.0;
        const double fy = ymin + (ymax - ymin) * i / 5.0;
        out += "<line x1=\"" + num(px(fx)) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" +
               num(px(fx)) + "\" y2=\"" + num(mt + ph + 5) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(px(fx)) + "\" y=\"" + num(mt + ph + 20) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               num(fx) + "</text>\n";
        out += "<line x1=\"" + num(ml - 5) + "\" y1=\"" + num(py(fy)) + "\" x2=\"" + num(ml) +
               "\" y2=\"" + num(py(fy)) + "\" stroke=\"#444\"/>\n";
        out += "<text x=\"" + num(ml - 9) + "\" y=\"" + num(py(fy) + 4) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" +
               num(fy) + "</text>\n";
    }
    out += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 14) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" + x_label +
           "</text>\n";
    out += "<text x=\"18\" y=\"" + num(mt + ph / 2) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 18 " +
           num(mt + ph / 2) + ")\">" + y_label + "</text>\n";

    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = kPalette[k % (sizeof kPalette / sizeof kPalette[0])];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            pts += num(px(s.x[i])) + "," + num(py(s.y[i])) + " ";
        }
        out += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" + color +
               "\" stroke-width=\"1.5\"/>\n";
        const double ly = mt + 16 + 18 * static_cast<double>(k);
        out += "<line x1=\"" + num(ml + pw + 12) + "\" y1=\"" + num(ly) + "\" x2=\"" +
               num(ml + pw + 34) + "\" y2=\"" + num(ly) + "\" stroke=\"" + color +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + num(ml + pw + 40) + "\" y=\"" + num(ly + 4) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.label + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace popdyn
