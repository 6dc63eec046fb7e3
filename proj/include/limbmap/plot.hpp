#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "limbmap/simulation.hpp"

namespace limbmap {

struct Series {
    std::string label;
    std::string color;
    std::vector<double> x;
    std::vector<double> y;
    bool dashed = false;
};

struct Panel {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
};

/// Panels stacked vertically in one SVG document.
std::string render_svg(const std::vector<Panel>& panels, double width = 900.0,
                       double panel_height = 260.0);

/// Emitted hip and knee moved back one cycle and overlaid on the recording.
std::string restoration_figure(const RunDirectory& run);

/// Recorded shoulder against emitted hip over the same cycles.
std::string coordination_figure(const RunDirectory& run);

}  // namespace limbmap
