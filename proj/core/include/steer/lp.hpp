#pragma once

#include <Eigen/Sparse>
#include <iosfwd>
#include <optional>

#include "steer/leadfield.hpp"
#include "steer/types.hpp"

namespace steer {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Index ranges of the canonical variable layout [y+ (K), y- (K), t (N1),
/// s (M)] produced by build_l1l1_lp. Empty ranges for hand built programs.
struct VariableMap {
  int contacts = 0;       // K
  int y_plus_begin = 0;   // y+ block start
  int y_minus_begin = 0;  // y- block start
  int residual_begin = 0; // t block start, N1 entries
  int residual_count = 0;
  int nuisance_begin = 0; // s block start, M entries
  int nuisance_count = 0;

  [[nodiscard]] bool empty() const { return contacts == 0; }
};

/// Extra structure captured for the layout-aware KKT backend: the stacked
/// residual/nuisance row matrix and the scaling constants of the fit.
struct L1l1Structure {
  Eigen::MatrixXd stacked_rows;  // (N1 + M) x K: L1 rows then L2 rows / nu
  double alpha = 0.0;
  double epsilon = 0.0;
  double nu = 0.0;    // |x|_inf of the fitted system
  double zeta = 0.0;  // |L|_1 of the stacked system
  Bounds bounds;
};

/// General form: min c.x subject to eq_matrix x = eq_rhs,
/// ineq_matrix x <= ineq_rhs, lower <= x <= upper (infinities allowed).
struct LinearProgram {
  Eigen::VectorXd objective;
  SparseMatrix eq_matrix;
  Eigen::VectorXd eq_rhs;
  SparseMatrix ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  VariableMap variable_map;
  std::optional<L1l1Structure> structure;
  std::string name = "lp";

  [[nodiscard]] int variable_count() const { return static_cast<int>(objective.size()); }
  [[nodiscard]] int eq_count() const { return static_cast<int>(eq_rhs.size()); }
  [[nodiscard]] int ineq_count() const { return static_cast<int>(ineq_rhs.size()); }
};

/// Epigraph formulation of the censored L1 fit
///
///   min |L1 y - x1|_1 + sum_m max(|(L2 y)_m| / nu, eps) + alpha zeta |y|_1
///   s.t. |y_l| <= per contact bound, |y|_1 <= budget, sum_l y_l = 0
///
/// as a linear program over [y+, y-, t, s]: residual rows bound t, scaled
/// nuisance rows bound s, s is floored at eps, the box rows read
/// y+_l + y-_l <= per contact and one budget row caps sum(y+ + y-).
/// Preconditions: 0 <= eps <= 1, alpha >= 0 (linear scale) and a nonzero
/// target block (nu = |x|_inf > 0).
[[nodiscard]] LinearProgram build_l1l1_lp(const ReducedSystem& system, double alpha,
                                          double epsilon, const Bounds& bounds = {});

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

[[nodiscard]] std::string to_string(LpStatus status);

/// Scaled KKT residuals at the returned point. For status == optimal all
/// three are <= the solve tolerance.
struct LpCertificate {
  double primal_infeasibility = 0.0;
  double dual_infeasibility = 0.0;
  double complementarity = 0.0;
};

struct LpSolution {
  Eigen::VectorXd values;
  double objective_value = 0.0;
  LpStatus status = LpStatus::iteration_limit;
  LpCertificate certificate;
  int iterations = 0;
};

struct LpOptions {
  double tolerance = 1e-8;
  int max_iterations = 100000;
  /// Force the dense generic KKT backend even when the program carries the
  /// structured annotation (testing hook).
  bool force_generic_kkt = false;
};

/// Deterministic primal-dual interior point solve. Identical inputs produce
/// identical iterates; ties between optima resolve to the analytic center of
/// the optimal face, so degenerate programs still return reproducibly.
[[nodiscard]] LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Reads y = y+ - y- from a solution of a program built by build_l1l1_lp,
/// re-enforces the zero sum exactly by mean subtraction and validates the
/// pattern constraints.
[[nodiscard]] CurrentPattern extract_pattern(const LinearProgram& lp, const LpSolution& solution);

/// Writes the program in CPLEX LP text format (debug interchange).
void write_lp_text(const LinearProgram& lp, std::ostream& out);

}  // namespace steer
