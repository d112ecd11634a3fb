#pragma once

#include <string>
#include <vector>

namespace qlimit {

struct PlotSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct PlotSpec {
    std::string title;
    std::string x_label = "t";
    std::string y_label;
    std::vector<PlotSeries> series;
    int width = 640;
    int height = 400;
};

// Minimal line plot: axes with min/max ticks, one polyline per series, legend.
[[nodiscard]] std::string render_svg(const PlotSpec& spec);

} // namespace qlimit
