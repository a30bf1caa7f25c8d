#pragma once

#include <optional>
#include <span>
#include <string>

#include "diffvor/geometry.hpp"
#include "diffvor/voronoi.hpp"

namespace diffvor {

struct RenderStyle {
  bool show_sites = false;
  bool show_boundary = true;
  // When non-empty (one entry per site), draws a filled red marker per
  // site with radius proportional to the entry.
  std::span<const double> markers;
};

// Deterministic SVG of the diagram: cell polygons in red, optional black
// boundary, optional site dots. The viewBox fits the boundary when given,
// otherwise the sites with a margin.
std::string render_diagram_svg(const DiagramSnapshot& diagram,
                               const std::optional<Boundary>& boundary,
                               const RenderStyle& style = {});

// Loss curve as a polyline in a fixed 800x500 frame with min/max labels.
std::string render_loss_curve_svg(std::span<const double> losses);

}  // namespace diffvor
