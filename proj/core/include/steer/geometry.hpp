#pragma once

#include "steer/types.hpp"

namespace steer {

enum class LeadModel { contacts8, contacts40 };

[[nodiscard]] LeadModel lead_model_from_string(const std::string& name);
[[nodiscard]] std::string to_string(LeadModel model);

/// Catalog lead geometries, centers in mm on the lead cylinder surface.
///
/// contacts8: four rings 2.0 mm apart in a 1-3-3-1 arrangement (full ring,
/// two rings split into three sectors, full ring).
/// contacts40: eight rows of five contacts each; odd rows are rotated half a
/// sector and shifted 0.75 mm along the axis, giving the staggered layout.
[[nodiscard]] ContactArray build_geometry(LeadModel model);

struct GridParams {
  double spacing_mm = 0.63;   // high resolution lattice pitch
  double radius_mm = 6.0;     // high resolution sphere radius
};

/// Low resolution desk grid: 5 x 5 x 10 regular lattice inside a 20 mm box
/// around the lead, ~250 positions.
[[nodiscard]] DofGrid make_low_grid();

/// High resolution desk grid: half-offset cubic lattice clipped to a sphere
/// centered on the lead, ~3600 positions at the default pitch.
[[nodiscard]] DofGrid make_high_grid(const GridParams& params = {});

[[nodiscard]] DofGrid make_grid(GridResolution resolution, const GridParams& params = {});

}  // namespace steer
