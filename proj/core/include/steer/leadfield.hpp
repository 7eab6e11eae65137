#pragma once

#include <cstdint>
#include <optional>

#include "steer/types.hpp"

namespace steer {

enum class Provenance { synthetic, imported };

/// Volumetric response matrix: row 3p+c is the c-th Cartesian component of
/// the current density (A/m^2) at grid position p per unit (1 mA) current on
/// the column's contact.
struct LeadField {
  Eigen::MatrixXd matrix;  // (3 * positions) x contacts
  DofGrid grid;
  ContactArray contacts;
  Provenance provenance = Provenance::synthetic;
  double conductivity_s_m = 0.33;

  [[nodiscard]] int row_count() const { return static_cast<int>(matrix.rows()); }
  [[nodiscard]] int contact_count() const { return static_cast<int>(matrix.cols()); }
  [[nodiscard]] int position_count() const { return grid.position_count(); }
};

/// Analytic point-source field in an infinite homogeneous conductor. Each
/// contact j acts as a monopolar source, J(r) = (r - r_j) / (4 pi |r - r_j|^3)
/// per unit current, with r in mm. Conductivity does not enter the current
/// density and is carried as metadata only.
[[nodiscard]] LeadField synthesize_leadfield(const ContactArray& contacts, const DofGrid& grid,
                                             double conductivity_s_m = 0.33);

/// Minimum admissible distance between a grid position and a contact center.
inline constexpr double kExclusionRadiusMm = 0.05;

/// Fitting system for one target: the three Cartesian rows at the target
/// position collapsed onto the target orientation (single target row) and
/// every remaining row of the field untouched.
struct ReducedSystem {
  Eigen::MatrixXd target_rows;    // N1 x K, N1 == 1 for systems built here
  Eigen::MatrixXd nuisance_rows;  // M x K
  Eigen::VectorXd target_values;  // length N1, magnitude of the wanted density
  TargetSpec target;
  int target_position_index = -1;
  int dropped_rows = 0;  // rows collapsed away by the projection
  const LeadField* parent = nullptr;

  [[nodiscard]] int contact_count() const { return static_cast<int>(target_rows.cols()); }
  [[nodiscard]] int residual_rows() const { return static_cast<int>(target_rows.rows()); }
  [[nodiscard]] int nuisance_count() const { return static_cast<int>(nuisance_rows.rows()); }
};

/// Splits the field into the projected target row and the nuisance block.
/// The target position must coincide with a grid position (1e-9 mm); on a
/// miss the error names the nearest position and its index.
[[nodiscard]] ReducedSystem reduce_system(const LeadField& field, const TargetSpec& target);

/// Subtracts the row mean from every row. Analysis-side preprocessing for
/// the attenuation machinery; solver inputs are never zero-averaged.
[[nodiscard]] Eigen::MatrixXd zero_average_rows(const Eigen::MatrixXd& matrix);

/// Positions whose zero-averaged response survives a relative threshold
/// delta in (0, 1]. A position's norm is the largest of its three Cartesian
/// row norms; membership means norm >= delta * max position norm.
struct AttenuationSet {
  double delta = 0.0;
  std::vector<int> member_positions;
  Eigen::VectorXd position_norms;  // one entry per grid position
  double max_norm = 0.0;

  [[nodiscard]] bool contains(int position_index) const;
};

[[nodiscard]] AttenuationSet attenuation_set(const LeadField& field, double delta);

/// Smallest censoring level compatible with the attenuation threshold at the
/// given target position: delta * max position norm / target position norm.
[[nodiscard]] double dynamic_range_bound(const AttenuationSet& set, int target_position_index);

/// Additive i.i.d. Gaussian perturbation of the full field. sigma is set
/// from the peak entry: sigma = max|L| * 10^(-psnr_db / 20). The draw is a
/// pure function of (seed, realization_index).
struct NoiseSpec {
  double psnr_db = 40.0;
  std::uint64_t seed = 0;
  std::uint64_t realization_index = 0;
};

[[nodiscard]] LeadField add_noise(const LeadField& field, const NoiseSpec& spec);

/// Index of the grid position nearest to a point (Euclidean, ties to the
/// lower index).
[[nodiscard]] int nearest_position(const DofGrid& grid, const Vec3& point);

}  // namespace steer
