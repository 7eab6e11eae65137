#include "steer/geometry.hpp"

#include <cmath>

namespace steer {

namespace {

Contact make_surface_contact(double radius, double angle_rad, double z, std::string label,
                             int row, int sector) {
  Contact c;
  c.outward_normal = Vec3(std::cos(angle_rad), std::sin(angle_rad), 0.0);
  c.center = Vec3(radius * std::cos(angle_rad), radius * std::sin(angle_rad), z);
  c.label = std::move(label);
  c.row = row;
  c.sector = sector;
  return c;
}

}  // namespace

LeadModel lead_model_from_string(const std::string& name) {
  if (name == "contacts8") return LeadModel::contacts8;
  if (name == "contacts40") return LeadModel::contacts40;
  throw ConfigError("unknown lead model '" + name + "' (expected contacts8 or contacts40)");
}

std::string to_string(LeadModel model) {
  return model == LeadModel::contacts8 ? "contacts8" : "contacts40";
}

ContactArray build_geometry(LeadModel model) {
  ContactArray array;
  array.model = to_string(model);
  array.lead_diameter_mm = 1.27;
  array.impedance_kohm = 2.0;
  const double radius = array.lead_diameter_mm / 2.0;

  if (model == LeadModel::contacts8) {
    // ring centers 2.0 mm apart (1.5 mm contacts, 0.5 mm gaps), stack
    // centered on the origin; middle rings split into three sectors
    const double ring_z[4] = {-3.0, -1.0, 1.0, 3.0};
    array.contacts.push_back(make_surface_contact(radius, 0.0, ring_z[0], "1", 0, 0));
    const char* sector_names = "abc";
    for (int ring = 1; ring <= 2; ++ring) {
      for (int s = 0; s < 3; ++s) {
        const double angle = 2.0 * M_PI * s / 3.0;
        std::string label = std::to_string(ring + 1) + sector_names[s];
        array.contacts.push_back(make_surface_contact(radius, angle, ring_z[ring], label, ring, s));
      }
    }
    array.contacts.push_back(make_surface_contact(radius, 0.0, ring_z[3], "4", 3, 0));
  } else {
    // eight rows of five contacts, 1.5 mm row pitch; odd rows rotate half a
    // sector and shift 0.75 mm along the axis
    const int rows = 8, per_row = 5;
    const double pitch = 1.5, stagger = 0.75;
    const double z0 = -(rows - 1) * pitch / 2.0 - stagger / 2.0;
    for (int r = 0; r < rows; ++r) {
      const double z = z0 + r * pitch + (r % 2 ? stagger : 0.0);
      for (int s = 0; s < per_row; ++s) {
        const double angle = 2.0 * M_PI * (s + (r % 2 ? 0.5 : 0.0)) / per_row;
        std::string label = "r" + std::to_string(r + 1) + "c" + std::to_string(s + 1);
        array.contacts.push_back(make_surface_contact(radius, angle, z, label, r, s));
      }
    }
  }
  validate_contact_array(array);
  return array;
}

DofGrid make_low_grid() {
  DofGrid grid;
  grid.resolution = GridResolution::low;
  // 5 x 5 x 10 lattice inside a 20 mm box around the lead
  const double xy[5] = {-8.0, -4.0, 0.0, 4.0, 8.0};
  for (int k = 0; k < 10; ++k) {
    const double z = -9.0 + 2.0 * k;
    for (int j = 0; j < 5; ++j)
      for (int i = 0; i < 5; ++i) grid.positions.emplace_back(xy[i], xy[j], z);
  }
  validate_grid(grid);
  return grid;
}

DofGrid make_high_grid(const GridParams& params) {
  if (!(params.spacing_mm > 0.0) || !(params.radius_mm > 0.0))
    throw ConfigError("grid spacing and radius must be positive");
  DofGrid grid;
  grid.resolution = GridResolution::high;
  const double h = params.spacing_mm;
  const double r = params.radius_mm;
  const int span = static_cast<int>(std::ceil(r / h)) + 1;
  // half-offset lattice keeps every position off the lead axis
  for (int k = -span; k < span; ++k) {
    const double z = (k + 0.5) * h;
    for (int j = -span; j < span; ++j) {
      const double y = (j + 0.5) * h;
      for (int i = -span; i < span; ++i) {
        const double x = (i + 0.5) * h;
        if (x * x + y * y + z * z <= r * r) grid.positions.emplace_back(x, y, z);
      }
    }
  }
  validate_grid(grid);
  return grid;
}

DofGrid make_grid(GridResolution resolution, const GridParams& params) {
  switch (resolution) {
    case GridResolution::low: return make_low_grid();
    case GridResolution::high: return make_high_grid(params);
    case GridResolution::custom: break;
  }
  throw ConfigError("make_grid needs a catalog resolution (low or high)");
}

}  // namespace steer
