#pragma once

#include "mppi/costs.hpp"
#include "mppi/simulator.hpp"

#include <string>

namespace mppi {

/// Writes a static SVG with the track boundaries (the h = 1 iso-contour of
/// the cost map) and the episode trajectory polyline.
void write_overlay_svg(const std::string& path, const CostMap& map,
                       const EpisodeTrace& trace, double boundary_level = 1.0);

}  // namespace mppi
