#pragma once

#include "rectify/cones.hpp"
#include "rectify/curve.hpp"

#include <string>
#include <vector>

namespace rect {

// Final edges as <line>, bridges as dashed <polyline> through their chains,
// vertices as circles. Coordinates ax0, ax1 are drawn; the viewBox is the
// bounding box with a 5% margin, or a unit box around the data when it is a
// single point or empty.
std::string render_svg(const CurveState& s, int ax0 = 0, int ax1 = 1);

// Atoms as circles, positive labels filled.
std::string render_labels_svg(const DiscreteMeasure& mu, const std::vector<ConeLabel>& labels, int ax0 = 0,
                              int ax1 = 1);

}  // namespace rect
