#include "steer/metrics.hpp"

#include <cmath>
#include <limits>

#include "steer/numeric.hpp"

namespace steer {

namespace {

void check_contacts(const ReducedSystem& system, const CurrentPattern& pattern,
                    const char* where) {
  if (system.contact_count() != pattern.contact_count())
    throw DimensionError(std::string(where) + ": system has " +
                         std::to_string(system.contact_count()) + " contacts, pattern has " +
                         std::to_string(pattern.contact_count()));
}

// pairwise dot of one (strided) matrix row with y through a scratch buffer,
// keeping the summation order independent of the storage layout
double row_dot(const Eigen::MatrixXd& matrix, Eigen::Index row, const Eigen::VectorXd& y,
               Eigen::VectorXd& scratch) {
  for (Eigen::Index j = 0; j < y.size(); ++j) scratch[j] = matrix(row, j) * y[j];
  return pairwise_sum(scratch.data(), y.size());
}

}  // namespace

double focused_density(const ReducedSystem& system, const CurrentPattern& pattern) {
  check_contacts(system, pattern, "focused_density");
  const Eigen::VectorXd& x1 = system.target_values;
  if (x1.size() != system.target_rows.rows())
    throw DimensionError("focused_density: x1 has " + std::to_string(x1.size()) +
                         " entries for " + std::to_string(system.target_rows.rows()) +
                         " target rows");
  const double x1_norm = std::sqrt(pairwise_dot(x1, x1));
  if (!(x1_norm > 0.0)) throw InvalidTargetError("focused_density: zero target block");
  Eigen::VectorXd scratch(pattern.contact_count());
  Eigen::VectorXd response(x1.size());
  for (Eigen::Index i = 0; i < system.target_rows.rows(); ++i)
    response[i] = row_dot(system.target_rows, i, pattern.currents(), scratch);
  return pairwise_dot(x1, response) / x1_norm;
}

double nuisance_density(const ReducedSystem& system, const CurrentPattern& pattern) {
  check_contacts(system, pattern, "nuisance_density");
  const Eigen::Index M = system.nuisance_rows.rows();
  if (M == 0) throw ConfigError("nuisance_density: system has no nuisance rows");
  Eigen::VectorXd scratch(pattern.contact_count());
  Eigen::VectorXd squares(M);
  for (Eigen::Index m = 0; m < M; ++m) {
    const double r = row_dot(system.nuisance_rows, m, pattern.currents(), scratch);
    squares[m] = r * r;
  }
  return std::sqrt(pairwise_sum(squares.data(), M) / static_cast<double>(M));
}

double field_ratio(double gamma, double xi) {
  if (xi < 0.0 || !std::isfinite(xi)) throw SolveError("field_ratio: invalid xi");
  if (xi == 0.0) {
    if (gamma > 0.0) return std::numeric_limits<double>::infinity();
    if (gamma < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return gamma / xi;
}

DecisionVariables decision_variables(const ReducedSystem& system, const CurrentPattern& pattern) {
  DecisionVariables dv;
  dv.gamma = focused_density(system, pattern);
  dv.xi = nuisance_density(system, pattern);
  dv.theta = field_ratio(dv.gamma, dv.xi);
  return dv;
}

}  // namespace steer
