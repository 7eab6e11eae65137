#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace steer {

using Vec3 = Eigen::Vector3d;

/// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  using Error::Error;
};
struct GeometryError : Error {
  using Error::Error;
};
struct InvalidTargetError : Error {
  using Error::Error;
};
struct LookupError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct ParseError : Error {
  using Error::Error;
};
struct SolveError : Error {
  using Error::Error;
};
struct IoError : Error {
  using Error::Error;
};

/// One physical contact of a lead. Centers are expressed in mm in the lead
/// frame: the lead axis is the z axis and the stack is centered on the origin.
struct Contact {
  Vec3 center = Vec3::Zero();
  Vec3 outward_normal = Vec3::UnitX();
  std::string label;
  int row = 0;     // ring index along the axis
  int sector = 0;  // azimuthal index within the ring
};

struct ContactArray {
  std::string model;
  double lead_diameter_mm = 1.27;
  double impedance_kohm = 2.0;
  std::vector<Contact> contacts;

  [[nodiscard]] int count() const { return static_cast<int>(contacts.size()); }
};

/// Throws GeometryError unless the array is well formed (>= 2 contacts,
/// unique labels, centers on the lead cylinder within 1e-9 mm).
void validate_contact_array(const ContactArray& array);

enum class GridResolution { low, high, custom };

/// Volumetric sample positions; every position carries the three Cartesian
/// dipolar degrees of freedom, so a grid of P positions spans 3P field rows.
struct DofGrid {
  std::vector<Vec3> positions;
  GridResolution resolution = GridResolution::custom;

  [[nodiscard]] int position_count() const { return static_cast<int>(positions.size()); }
  [[nodiscard]] int row_count() const { return 3 * position_count(); }
};

void validate_grid(const DofGrid& grid);

enum class Alignment { parallel, perpendicular, custom };

[[nodiscard]] std::string to_string(Alignment a);

/// Desired stimulation: a grid position, a unit orientation and a current
/// density magnitude (A/m^2 scale of the lead field).
struct TargetSpec {
  Vec3 position = Vec3::Zero();
  Vec3 orientation = Vec3::UnitZ();
  Alignment alignment = Alignment::custom;
  double magnitude = 1.0;
  std::string id;
};

void validate_target(const TargetSpec& target);

/// Per-contact and total current limits in mA.
struct Bounds {
  double per_contact_ma = 2.0;
  double total_budget_ma = 4.0;
};

/// Contact currents in mA. Construction enforces the box bound, the L1
/// budget and the zero net current condition.
class CurrentPattern {
 public:
  CurrentPattern(Eigen::VectorXd currents, const Bounds& bounds);

  [[nodiscard]] const Eigen::VectorXd& currents() const { return currents_; }
  [[nodiscard]] const Bounds& bounds() const { return bounds_; }
  [[nodiscard]] int contact_count() const { return static_cast<int>(currents_.size()); }

  /// Relative slack used when validating the box and budget constraints.
  static constexpr double kConstraintTolerance = 1e-6;
  /// Zero net current must hold to |sum| <= kZeroSumTolerance * budget.
  static constexpr double kZeroSumTolerance = 1e-9;

 private:
  Eigen::VectorXd currents_;
  Bounds bounds_;
};

/// Scalar figures of merit of a pattern on a reduced system.
struct DecisionVariables {
  double gamma = 0.0;  // focused current density at the target (A/m^2)
  double xi = 0.0;     // rms nuisance current density (A/m^2)
  double theta = 0.0;  // gamma / xi
};

}  // namespace steer
