#pragma once

#include <filesystem>
#include <iosfwd>

#include "steer/leadfield.hpp"

namespace steer {

/// Text interchange format, bit exact across a round trip:
///
///   LEADFIELD v1 N=<rows> K=<cols>
///   <K space separated values> x N lines, shortest round-trip decimals
///   METADATA
///   <key value lines: provenance, conductivity, geometry, grid positions>
///   END
void export_leadfield(const LeadField& field, std::ostream& out);
void export_leadfield(const LeadField& field, const std::filesystem::path& path);

[[nodiscard]] LeadField import_leadfield(std::istream& in);
[[nodiscard]] LeadField import_leadfield(const std::filesystem::path& path);

/// Matrix-only CSV exchange (no header, no metadata).
void export_matrix_csv(const Eigen::MatrixXd& matrix, std::ostream& out);
void export_matrix_csv(const Eigen::MatrixXd& matrix, const std::filesystem::path& path);

[[nodiscard]] Eigen::MatrixXd import_matrix_csv(std::istream& in);
[[nodiscard]] Eigen::MatrixXd import_matrix_csv(const std::filesystem::path& path);

}  // namespace steer
