#include "steer/types.hpp"

#include <cmath>
#include <set>

#include "steer/numeric.hpp"

namespace steer {

void validate_contact_array(const ContactArray& array) {
  if (array.count() < 2)
    throw GeometryError("contact array needs at least 2 contacts, got " +
                        std::to_string(array.count()));
  if (!(array.lead_diameter_mm > 0.0))
    throw GeometryError("lead diameter must be positive");
  std::set<std::string> labels;
  const double radius = array.lead_diameter_mm / 2.0;
  for (const Contact& c : array.contacts) {
    if (c.label.empty()) throw GeometryError("contact with empty label");
    if (!labels.insert(c.label).second)
      throw GeometryError("duplicate contact label '" + c.label + "'");
    const double axis_distance = std::hypot(c.center.x(), c.center.y());
    if (std::abs(axis_distance - radius) > 1e-9)
      throw GeometryError("contact '" + c.label + "' center is off the lead surface: distance " +
                          format_double(axis_distance) + " mm, expected " +
                          format_double(radius) + " mm");
  }
}

void validate_grid(const DofGrid& grid) {
  if (grid.position_count() == 0) throw GeometryError("grid with no positions");
  for (int i = 0; i < grid.position_count(); ++i) {
    for (int j = i + 1; j < grid.position_count(); ++j) {
      if ((grid.positions[i] - grid.positions[j]).norm() < 1e-12)
        throw GeometryError("grid positions " + std::to_string(i) + " and " + std::to_string(j) +
                            " coincide");
    }
  }
}

std::string to_string(Alignment a) {
  switch (a) {
    case Alignment::parallel: return "parallel";
    case Alignment::perpendicular: return "perpendicular";
    case Alignment::custom: return "custom";
  }
  return "custom";
}

void validate_target(const TargetSpec& target) {
  const double norm = target.orientation.norm();
  if (std::abs(norm - 1.0) > 1e-12)
    throw InvalidTargetError("target orientation must be unit length, |d| = " +
                             format_double(norm));
  if (!std::isfinite(target.magnitude))
    throw InvalidTargetError("target magnitude must be finite");
}

CurrentPattern::CurrentPattern(Eigen::VectorXd currents, const Bounds& bounds)
    : currents_(std::move(currents)), bounds_(bounds) {
  if (currents_.size() == 0) throw DimensionError("empty current pattern");
  if (!(bounds_.per_contact_ma > 0.0) || !(bounds_.total_budget_ma > 0.0))
    throw ConfigError("current bounds must be positive");
  const double box_limit = bounds_.per_contact_ma * (1.0 + kConstraintTolerance);
  double l1 = 0.0;
  for (Eigen::Index i = 0; i < currents_.size(); ++i) {
    const double c = currents_[i];
    if (!std::isfinite(c)) throw SolveError("non-finite current at contact " + std::to_string(i));
    if (std::abs(c) > box_limit)
      throw SolveError("contact " + std::to_string(i) + " current " + format_double(c) +
                       " mA exceeds the per-contact bound " +
                       format_double(bounds_.per_contact_ma) + " mA");
    l1 += std::abs(c);
  }
  if (l1 > bounds_.total_budget_ma * (1.0 + kConstraintTolerance))
    throw SolveError("total current " + format_double(l1) + " mA exceeds the budget " +
                     format_double(bounds_.total_budget_ma) + " mA");
  const double net = pairwise_sum(currents_);
  if (std::abs(net) > kZeroSumTolerance * bounds_.total_budget_ma)
    throw SolveError("net current " + format_double(net) + " mA violates the zero sum condition");
}

}  // namespace steer
