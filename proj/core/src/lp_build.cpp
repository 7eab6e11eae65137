#include <cmath>
#include <limits>
#include <vector>

#include "steer/lp.hpp"
#include "steer/numeric.hpp"

namespace steer {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

LinearProgram build_l1l1_lp(const ReducedSystem& system, double alpha, double epsilon,
                            const Bounds& bounds) {
  const int K = system.contact_count();
  const int N1 = system.residual_rows();
  const int M = system.nuisance_count();
  if (K < 2) throw DimensionError("build_l1l1_lp: need at least 2 contacts, got " + std::to_string(K));
  if (N1 != system.target_values.size())
    throw DimensionError("build_l1l1_lp: x1 has " + std::to_string(system.target_values.size()) +
                         " entries for " + std::to_string(N1) + " target rows");
  if (M > 0 && system.nuisance_rows.cols() != K)
    throw DimensionError("build_l1l1_lp: nuisance block has " +
                         std::to_string(system.nuisance_rows.cols()) + " columns, expected " +
                         std::to_string(K));
  if (!(alpha >= 0.0)) throw ConfigError("build_l1l1_lp: alpha must be >= 0 (linear scale)");
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
    throw ConfigError("build_l1l1_lp: epsilon must lie in [0, 1], got " + format_double(epsilon));
  if (!(bounds.per_contact_ma > 0.0) || !(bounds.total_budget_ma > 0.0))
    throw ConfigError("build_l1l1_lp: bounds must be positive");

  const double nu = system.target_values.cwiseAbs().maxCoeff();
  if (!(nu > 0.0))
    throw InvalidTargetError("build_l1l1_lp: zero target block (nu = |x|_inf = 0)");

  // zeta = |L|_1 of the raw stacked system, the largest column abs sum
  double zeta = 0.0;
  for (int j = 0; j < K; ++j) {
    double col = system.target_rows.col(j).cwiseAbs().sum();
    if (M > 0) col += system.nuisance_rows.col(j).cwiseAbs().sum();
    zeta = std::max(zeta, col);
  }

  const int n = 2 * K + N1 + M;
  const int rows_in = 2 * N1 + 2 * M + K + 1;

  LinearProgram lp;
  lp.name = "l1l1";
  lp.variable_map.contacts = K;
  lp.variable_map.y_plus_begin = 0;
  lp.variable_map.y_minus_begin = K;
  lp.variable_map.residual_begin = 2 * K;
  lp.variable_map.residual_count = N1;
  lp.variable_map.nuisance_begin = 2 * K + N1;
  lp.variable_map.nuisance_count = M;

  lp.objective = Eigen::VectorXd::Zero(n);
  lp.objective.segment(0, 2 * K).setConstant(alpha * zeta);
  lp.objective.segment(2 * K, N1 + M).setOnes();

  lp.lower = Eigen::VectorXd::Zero(n);
  lp.upper = Eigen::VectorXd::Constant(n, kInf);
  lp.lower.segment(2 * K + N1, M).setConstant(epsilon);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<size_t>(2 * (N1 + M)) * (2 * K + 1) + 4 * K + 2);

  // residual epigraph: +/- (L1 y) - t <= +/- x1
  for (int i = 0; i < N1; ++i) {
    for (int j = 0; j < K; ++j) {
      const double a = system.target_rows(i, j);
      if (a != 0.0) {
        triplets.emplace_back(i, j, a);
        triplets.emplace_back(i, K + j, -a);
        triplets.emplace_back(N1 + i, j, -a);
        triplets.emplace_back(N1 + i, K + j, a);
      }
    }
    triplets.emplace_back(i, 2 * K + i, -1.0);
    triplets.emplace_back(N1 + i, 2 * K + i, -1.0);
  }
  // nuisance epigraph on the nu-scaled rows: +/- (L2 y) / nu - s <= 0
  for (int m = 0; m < M; ++m) {
    const int row_plus = 2 * N1 + m;
    const int row_minus = 2 * N1 + M + m;
    for (int j = 0; j < K; ++j) {
      const double a = system.nuisance_rows(m, j) / nu;
      if (a != 0.0) {
        triplets.emplace_back(row_plus, j, a);
        triplets.emplace_back(row_plus, K + j, -a);
        triplets.emplace_back(row_minus, j, -a);
        triplets.emplace_back(row_minus, K + j, a);
      }
    }
    triplets.emplace_back(row_plus, 2 * K + N1 + m, -1.0);
    triplets.emplace_back(row_minus, 2 * K + N1 + m, -1.0);
  }
  // per-contact box: y+_l + y-_l <= per contact bound
  for (int l = 0; l < K; ++l) {
    triplets.emplace_back(2 * N1 + 2 * M + l, l, 1.0);
    triplets.emplace_back(2 * N1 + 2 * M + l, K + l, 1.0);
  }
  // budget: sum(y+ + y-) <= total budget
  for (int j = 0; j < 2 * K; ++j) triplets.emplace_back(rows_in - 1, j, 1.0);

  lp.ineq_matrix.resize(rows_in, n);
  lp.ineq_matrix.setFromTriplets(triplets.begin(), triplets.end());
  lp.ineq_rhs = Eigen::VectorXd::Zero(rows_in);
  lp.ineq_rhs.segment(0, N1) = system.target_values;
  lp.ineq_rhs.segment(N1, N1) = -system.target_values;
  lp.ineq_rhs.segment(2 * N1 + 2 * M, K).setConstant(bounds.per_contact_ma);
  lp.ineq_rhs[rows_in - 1] = bounds.total_budget_ma;

  // zero net current: sum(y+) - sum(y-) = 0
  std::vector<Eigen::Triplet<double>> eq_triplets;
  eq_triplets.reserve(2 * K);
  for (int j = 0; j < K; ++j) {
    eq_triplets.emplace_back(0, j, 1.0);
    eq_triplets.emplace_back(0, K + j, -1.0);
  }
  lp.eq_matrix.resize(1, n);
  lp.eq_matrix.setFromTriplets(eq_triplets.begin(), eq_triplets.end());
  lp.eq_rhs = Eigen::VectorXd::Zero(1);

  L1l1Structure structure;
  structure.stacked_rows.resize(N1 + M, K);
  structure.stacked_rows.topRows(N1) = system.target_rows;
  if (M > 0) structure.stacked_rows.bottomRows(M) = system.nuisance_rows / nu;
  structure.alpha = alpha;
  structure.epsilon = epsilon;
  structure.nu = nu;
  structure.zeta = zeta;
  structure.bounds = bounds;
  lp.structure = std::move(structure);
  return lp;
}

CurrentPattern extract_pattern(const LinearProgram& lp, const LpSolution& solution) {
  if (lp.variable_map.empty())
    throw ConfigError("extract_pattern: program carries no variable map");
  if (!lp.structure)
    throw ConfigError("extract_pattern: program carries no bounds annotation");
  if (solution.values.size() != lp.variable_count())
    throw DimensionError("extract_pattern: solution has " + std::to_string(solution.values.size()) +
                         " values for " + std::to_string(lp.variable_count()) + " variables");
  const int K = lp.variable_map.contacts;
  Eigen::VectorXd y = solution.values.segment(lp.variable_map.y_plus_begin, K) -
                      solution.values.segment(lp.variable_map.y_minus_begin, K);
  // the solver satisfies the zero sum row to tolerance; re-enforce it exactly
  const double mean = pairwise_sum(y) / static_cast<double>(K);
  y.array() -= mean;
  return CurrentPattern(std::move(y), lp.structure->bounds);
}

}  // namespace steer
