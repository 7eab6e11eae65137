#include "steer/leadfield.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "steer/numeric.hpp"

namespace steer {

LeadField synthesize_leadfield(const ContactArray& contacts, const DofGrid& grid,
                               double conductivity_s_m) {
  validate_contact_array(contacts);
  validate_grid(grid);
  if (!(conductivity_s_m > 0.0)) throw ConfigError("conductivity must be positive");

  const int positions = grid.position_count();
  const int K = contacts.count();
  LeadField field;
  field.grid = grid;
  field.contacts = contacts;
  field.provenance = Provenance::synthetic;
  field.conductivity_s_m = conductivity_s_m;
  field.matrix.resize(3 * positions, K);

  for (int j = 0; j < K; ++j) {
    const Vec3& source = contacts.contacts[j].center;
    for (int p = 0; p < positions; ++p) {
      const Vec3 offset = grid.positions[p] - source;
      const double distance = offset.norm();
      if (distance < kExclusionRadiusMm)
        throw GeometryError("grid position " + std::to_string(p) + " lies " +
                            format_double(distance) + " mm from contact '" +
                            contacts.contacts[j].label + "', inside the " +
                            format_double(kExclusionRadiusMm) + " mm exclusion radius");
      const double scale = 1.0 / (4.0 * M_PI * distance * distance * distance);
      field.matrix(3 * p + 0, j) = scale * offset.x();
      field.matrix(3 * p + 1, j) = scale * offset.y();
      field.matrix(3 * p + 2, j) = scale * offset.z();
    }
  }
  return field;
}

int nearest_position(const DofGrid& grid, const Vec3& point) {
  validate_grid(grid);
  int best = 0;
  double best_distance = std::numeric_limits<double>::infinity();
  for (int p = 0; p < grid.position_count(); ++p) {
    const double d = (grid.positions[p] - point).norm();
    if (d < best_distance) {
      best_distance = d;
      best = p;
    }
  }
  return best;
}

ReducedSystem reduce_system(const LeadField& field, const TargetSpec& target) {
  validate_target(target);
  if (field.row_count() != 3 * field.position_count())
    throw DimensionError("lead field rows (" + std::to_string(field.row_count()) +
                         ") are not 3 x positions (" + std::to_string(field.position_count()) +
                         ")");

  int index = -1;
  for (int p = 0; p < field.position_count(); ++p) {
    if ((field.grid.positions[p] - target.position).norm() <= 1e-9) {
      index = p;
      break;
    }
  }
  if (index < 0) {
    const int near = nearest_position(field.grid, target.position);
    const Vec3& hint = field.grid.positions[near];
    throw LookupError("target position (" + format_double(target.position.x()) + ", " +
                      format_double(target.position.y()) + ", " +
                      format_double(target.position.z()) +
                      ") is not a grid position; nearest is index " + std::to_string(near) +
                      " at (" + format_double(hint.x()) + ", " + format_double(hint.y()) + ", " +
                      format_double(hint.z()) + ")");
  }

  const int K = field.contact_count();
  const int N = field.row_count();
  ReducedSystem system;
  system.target = target;
  system.target.position = field.grid.positions[index];
  system.target_position_index = index;
  system.parent = &field;

  // collapse the three Cartesian target rows onto the orientation: the rank
  // one projection d d^T leaves a single informative row d^T L1
  system.target_rows.resize(1, K);
  const Vec3& d = target.orientation;
  for (int j = 0; j < K; ++j) {
    system.target_rows(0, j) = d.x() * field.matrix(3 * index + 0, j) +
                               d.y() * field.matrix(3 * index + 1, j) +
                               d.z() * field.matrix(3 * index + 2, j);
  }
  system.dropped_rows = 2;
  system.target_values.resize(1);
  system.target_values[0] = target.magnitude;

  system.nuisance_rows.resize(N - 3, K);
  int row = 0;
  for (int p = 0; p < field.position_count(); ++p) {
    if (p == index) continue;
    system.nuisance_rows.middleRows(row, 3) = field.matrix.middleRows(3 * p, 3);
    row += 3;
  }
  return system;
}

Eigen::MatrixXd zero_average_rows(const Eigen::MatrixXd& matrix) {
  if (matrix.cols() == 0) throw DimensionError("zero_average_rows: empty matrix");
  Eigen::MatrixXd adjusted = matrix;
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) {
    const double mean = pairwise_sum(matrix.row(i).transpose().eval()) /
                        static_cast<double>(matrix.cols());
    adjusted.row(i).array() -= mean;
  }
  return adjusted;
}

bool AttenuationSet::contains(int position_index) const {
  return std::binary_search(member_positions.begin(), member_positions.end(), position_index);
}

AttenuationSet attenuation_set(const LeadField& field, double delta) {
  if (!(delta >= 0.0) || !(delta <= 1.0))
    throw ConfigError("attenuation threshold must lie in [0, 1], got " + format_double(delta));
  const Eigen::MatrixXd adjusted = zero_average_rows(field.matrix);
  const int positions = field.position_count();

  AttenuationSet set;
  set.delta = delta;
  set.position_norms.resize(positions);
  for (int p = 0; p < positions; ++p) {
    // a position couples through its strongest Cartesian component
    double norm = 0.0;
    for (int c = 0; c < 3; ++c) norm = std::max(norm, adjusted.row(3 * p + c).norm());
    set.position_norms[p] = norm;
    set.max_norm = std::max(set.max_norm, norm);
  }
  for (int p = 0; p < positions; ++p) {
    if (set.position_norms[p] >= delta * set.max_norm) set.member_positions.push_back(p);
  }
  return set;
}

double dynamic_range_bound(const AttenuationSet& set, int target_position_index) {
  if (target_position_index < 0 || target_position_index >= set.position_norms.size())
    throw LookupError("target position index " + std::to_string(target_position_index) +
                      " outside the grid (" + std::to_string(set.position_norms.size()) +
                      " positions)");
  const double norm = set.position_norms[target_position_index];
  if (!(norm > 0.0))
    throw InvalidTargetError("target position " + std::to_string(target_position_index) +
                             " has zero attenuation norm");
  return set.delta * set.max_norm / norm;
}

LeadField add_noise(const LeadField& field, const NoiseSpec& spec) {
  if (!std::isfinite(spec.psnr_db)) throw ConfigError("noise PSNR must be finite");
  const double peak = field.matrix.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) throw ConfigError("cannot scale noise to an all-zero field");
  const double sigma = peak * std::pow(10.0, -spec.psnr_db / 20.0);

  NormalSampler sampler(mix_seed(spec.seed, spec.realization_index));
  LeadField noisy = field;
  for (Eigen::Index i = 0; i < noisy.matrix.rows(); ++i)
    for (Eigen::Index j = 0; j < noisy.matrix.cols(); ++j)
      noisy.matrix(i, j) += sigma * sampler.next();
  return noisy;
}

}  // namespace steer
