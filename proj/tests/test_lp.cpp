#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "steer/lp.hpp"
#include "steer/numeric.hpp"

using namespace steer;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SparseMatrix dense_to_sparse(const Eigen::MatrixXd& dense) {
  SparseMatrix sparse(dense.rows(), dense.cols());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < dense.rows(); ++i)
    for (int j = 0; j < dense.cols(); ++j)
      if (dense(i, j) != 0.0) triplets.emplace_back(i, j, dense(i, j));
  sparse.setFromTriplets(triplets.begin(), triplets.end());
  return sparse;
}

/// min c.x with rows given densely; bounds default to [0, inf).
LinearProgram make_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& eq,
                      const Eigen::VectorXd& eq_rhs, const Eigen::MatrixXd& ineq,
                      const Eigen::VectorXd& ineq_rhs) {
  LinearProgram lp;
  lp.objective = c;
  lp.eq_matrix = dense_to_sparse(eq);
  lp.eq_rhs = eq_rhs;
  lp.ineq_matrix = dense_to_sparse(ineq);
  lp.ineq_rhs = ineq_rhs;
  lp.lower = Eigen::VectorXd::Zero(c.size());
  lp.upper = Eigen::VectorXd::Constant(c.size(), kInf);
  return lp;
}

ReducedSystem wrap(const oracle::TinySystem& tiny) {
  ReducedSystem system;
  system.target_rows = tiny.target_rows;
  system.nuisance_rows = tiny.nuisance_rows;
  system.target_values = tiny.x1;
  return system;
}

}  // namespace

TEST_CASE("a two variable program with a unique vertex solves exactly") {
  // min 2x + 3y subject to x + y = 1, x, y >= 0: optimum (1, 0), value 2
  Eigen::VectorXd c(2);
  c << 2.0, 3.0;
  Eigen::MatrixXd eq(1, 2);
  eq << 1.0, 1.0;
  Eigen::VectorXd eq_rhs(1);
  eq_rhs << 1.0;
  const LinearProgram lp =
      make_lp(c, eq, eq_rhs, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  const LpSolution solution = solve_lp(lp);
  REQUIRE(solution.status == LpStatus::optimal);
  CHECK(solution.objective_value == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(solution.values[0] == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(solution.values[1] == doctest::Approx(0.0).scale(1.0).epsilon(1e-7));
  CHECK(solution.certificate.primal_infeasibility <= 1e-8);
  CHECK(solution.certificate.dual_infeasibility <= 1e-8);
  CHECK(solution.certificate.complementarity <= 1e-8);
}

TEST_CASE("inequalities and boxes combine correctly") {
  // min -x - 2y subject to x + y <= 1.5, 0 <= x, y <= 1: optimum (0.5, 1)
  Eigen::VectorXd c(2);
  c << -1.0, -2.0;
  Eigen::MatrixXd ineq(1, 2);
  ineq << 1.0, 1.0;
  Eigen::VectorXd ineq_rhs(1);
  ineq_rhs << 1.5;
  LinearProgram lp = make_lp(c, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0), ineq, ineq_rhs);
  lp.upper.setConstant(1.0);
  const LpSolution solution = solve_lp(lp);
  REQUIRE(solution.status == LpStatus::optimal);
  CHECK(solution.objective_value == doctest::Approx(-2.5).epsilon(1e-8));
  CHECK(solution.values[0] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(solution.values[1] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("crossed bounds report infeasible without iterating") {
  LinearProgram lp = make_lp(Eigen::VectorXd::Ones(1), Eigen::MatrixXd(0, 1),
                             Eigen::VectorXd(0), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  lp.lower[0] = 2.0;
  lp.upper[0] = 1.0;
  const LpSolution solution = solve_lp(lp);
  CHECK(solution.status == LpStatus::infeasible);
  CHECK(solution.iterations == 0);
}

TEST_CASE("an unsatisfiable equality is flagged infeasible") {
  // x + y = 5 with x, y in [0, 1]
  Eigen::VectorXd c = Eigen::VectorXd::Ones(2);
  Eigen::MatrixXd eq(1, 2);
  eq << 1.0, 1.0;
  Eigen::VectorXd eq_rhs(1);
  eq_rhs << 5.0;
  LinearProgram lp = make_lp(c, eq, eq_rhs, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  lp.upper.setConstant(1.0);
  const LpSolution solution = solve_lp(lp);
  CHECK(solution.status == LpStatus::infeasible);
}

TEST_CASE("a descent ray below the feasible set is flagged unbounded") {
  // min -x with x >= 0 and no cap
  Eigen::VectorXd c(1);
  c << -1.0;
  const LinearProgram lp = make_lp(c, Eigen::MatrixXd(0, 1), Eigen::VectorXd(0),
                                   Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  const LpSolution solution = solve_lp(lp);
  CHECK(solution.status == LpStatus::unbounded);
}

TEST_CASE("equality-only programs short circuit to least squares") {
  Eigen::VectorXd c(2);
  c << 1.0, 1.0;
  Eigen::MatrixXd eq(1, 2);
  eq << 1.0, 1.0;
  Eigen::VectorXd eq_rhs(1);
  eq_rhs << 3.0;
  LinearProgram lp = make_lp(c, eq, eq_rhs, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  lp.lower.setConstant(-kInf);  // free variables, no complementarity pairs
  const LpSolution constant_on_face = solve_lp(lp);
  CHECK(constant_on_face.status == LpStatus::optimal);
  CHECK(constant_on_face.objective_value == doctest::Approx(3.0).epsilon(1e-10));

  lp.objective << 1.0, 2.0;  // now descends along the feasible line
  const LpSolution descending = solve_lp(lp);
  CHECK(descending.status == LpStatus::unbounded);
}

TEST_CASE("the iteration budget is honored") {
  Eigen::VectorXd c(2);
  c << 2.0, 3.0;
  Eigen::MatrixXd eq(1, 2);
  eq << 1.0, 1.0;
  Eigen::VectorXd eq_rhs(1);
  eq_rhs << 1.0;
  const LinearProgram lp =
      make_lp(c, eq, eq_rhs, Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  LpOptions options;
  options.max_iterations = 1;
  const LpSolution solution = solve_lp(lp, options);
  CHECK(solution.status == LpStatus::iteration_limit);
}

TEST_CASE("invalid programs are rejected up front") {
  LinearProgram empty;
  CHECK_THROWS_AS((void)solve_lp(empty), DimensionError);

  LinearProgram lp = make_lp(Eigen::VectorXd::Ones(2), Eigen::MatrixXd(0, 2),
                             Eigen::VectorXd(0), Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  lp.lower.resize(1);
  CHECK_THROWS_AS((void)solve_lp(lp), DimensionError);

  LinearProgram bad_tol = make_lp(Eigen::VectorXd::Ones(1), Eigen::MatrixXd(0, 1),
                                  Eigen::VectorXd(0), Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  LpOptions options;
  options.tolerance = 0.0;
  CHECK_THROWS_AS((void)solve_lp(bad_tol, options), ConfigError);
}

TEST_CASE("the censored fit program has the documented layout") {
  const oracle::TinySystem tiny = oracle::random_system(5, 9, 11, 2.0);
  const ReducedSystem system = wrap(tiny);
  const double alpha = 0.01, epsilon = 0.25;
  const LinearProgram lp = build_l1l1_lp(system, alpha, epsilon);

  const int K = 5, N1 = 1, M = 9;
  CHECK(lp.variable_count() == 2 * K + N1 + M);
  CHECK(lp.eq_count() == 1);
  CHECK(lp.ineq_count() == 2 * N1 + 2 * M + K + 1);
  CHECK(lp.variable_map.contacts == K);
  CHECK(lp.variable_map.y_minus_begin == K);
  CHECK(lp.variable_map.residual_begin == 2 * K);
  CHECK(lp.variable_map.nuisance_begin == 2 * K + N1);
  CHECK(lp.variable_map.nuisance_count == M);
  REQUIRE(lp.structure.has_value());
  CHECK(lp.structure->nu == doctest::Approx(2.0));
  CHECK(lp.structure->zeta ==
        doctest::Approx(oracle::stacked_one_norm(tiny.target_rows, tiny.nuisance_rows)));

  // objective: alpha zeta on the split currents, ones on epigraph variables
  for (int j = 0; j < 2 * K; ++j)
    CHECK(lp.objective[j] == doctest::Approx(alpha * lp.structure->zeta));
  for (int j = 2 * K; j < lp.variable_count(); ++j) CHECK(lp.objective[j] == 1.0);
  // censoring floor on the nuisance epigraph block only
  for (int m = 0; m < M; ++m) CHECK(lp.lower[2 * K + N1 + m] == epsilon);
  for (int j = 0; j < 2 * K + N1; ++j) CHECK(lp.lower[j] == 0.0);

  CHECK_THROWS_AS((void)build_l1l1_lp(system, -1.0, 0.5), ConfigError);
  CHECK_THROWS_AS((void)build_l1l1_lp(system, 0.0, 1.5), ConfigError);
  ReducedSystem zero = system;
  zero.target_values.setZero();
  CHECK_THROWS_AS((void)build_l1l1_lp(zero, 0.0, 0.5), InvalidTargetError);
}

TEST_CASE("the solved objective equals the literal censored fit objective") {
  const oracle::TinySystem tiny = oracle::random_system(6, 14, 21, 1.2);
  const ReducedSystem system = wrap(tiny);
  const double alpha = 0.02, epsilon = 0.15;
  const LinearProgram lp = build_l1l1_lp(system, alpha, epsilon);
  const LpSolution solution = solve_lp(lp);
  REQUIRE(solution.status == LpStatus::optimal);

  const int K = 6;
  const Eigen::VectorXd y =
      solution.values.segment(0, K) - solution.values.segment(K, K);
  const double zeta = lp.structure->zeta;
  const double direct =
      oracle::l1l1_objective(tiny.target_rows, tiny.nuisance_rows, tiny.x1, y, alpha, epsilon, zeta);
  CHECK(solution.objective_value == doctest::Approx(direct).epsilon(1e-7));
}

TEST_CASE("the program optimum matches a brute force polytope scan") {
  const oracle::TinySystem tiny = oracle::random_system(3, 4, 31, 1.0);
  const ReducedSystem system = wrap(tiny);
  const double alpha = 0.05, epsilon = 0.2;
  const Bounds bounds;
  const LinearProgram lp = build_l1l1_lp(system, alpha, epsilon, bounds);
  const LpSolution solution = solve_lp(lp);
  REQUIRE(solution.status == LpStatus::optimal);

  const double zeta = lp.structure->zeta;
  const double scanned = oracle::grid_min(
      3, bounds.per_contact_ma, bounds.total_budget_ma, 81, [&](const Eigen::VectorXd& y) {
        return oracle::l1l1_objective(tiny.target_rows, tiny.nuisance_rows, tiny.x1, y, alpha,
                                      epsilon, zeta);
      });
  // every scanned point is feasible, so the LP optimum can only be lower;
  // the scan resolution bounds the gap from above
  CHECK(solution.objective_value <= scanned + 1e-8);
  CHECK(scanned - solution.objective_value <= 0.1);
}

TEST_CASE("structured and generic KKT backends agree") {
  const oracle::TinySystem tiny = oracle::random_system(8, 40, 41, 1.0);
  const ReducedSystem system = wrap(tiny);
  const LinearProgram lp = build_l1l1_lp(system, 0.01, 0.1);
  LpOptions generic;
  generic.force_generic_kkt = true;
  const LpSolution fast = solve_lp(lp);
  const LpSolution dense = solve_lp(lp, generic);
  REQUIRE(fast.status == LpStatus::optimal);
  REQUIRE(dense.status == LpStatus::optimal);
  CHECK(fast.objective_value == doctest::Approx(dense.objective_value).epsilon(1e-8));
  const CurrentPattern from_fast = extract_pattern(lp, fast);
  const CurrentPattern from_dense = extract_pattern(lp, dense);
  for (int j = 0; j < 8; ++j)
    CHECK(from_fast.currents()[j] ==
          doctest::Approx(from_dense.currents()[j]).scale(1.0).epsilon(2e-6));
}

TEST_CASE("repeated solves are bit identical") {
  const oracle::TinySystem tiny = oracle::random_system(7, 25, 51, 1.0);
  const ReducedSystem system = wrap(tiny);
  const LinearProgram lp = build_l1l1_lp(system, 0.003, 0.05);
  const LpSolution first = solve_lp(lp);
  const LpSolution second = solve_lp(lp);
  REQUIRE(first.status == LpStatus::optimal);
  CHECK(first.iterations == second.iterations);
  CHECK(first.objective_value == second.objective_value);
  REQUIRE(first.values.size() == second.values.size());
  for (Eigen::Index i = 0; i < first.values.size(); ++i)
    CHECK(first.values[i] == second.values[i]);
}

TEST_CASE("pattern extraction balances the currents exactly") {
  const oracle::TinySystem tiny = oracle::random_system(6, 18, 61, 1.0);
  const ReducedSystem system = wrap(tiny);
  const Bounds bounds;
  const LinearProgram lp = build_l1l1_lp(system, 0.001, 0.02, bounds);
  const LpSolution solution = solve_lp(lp);
  REQUIRE(solution.status == LpStatus::optimal);
  const CurrentPattern pattern = extract_pattern(lp, solution);
  CHECK(std::abs(pattern.currents().sum()) <= 1e-12);
  CHECK(pattern.currents().cwiseAbs().maxCoeff() <=
        bounds.per_contact_ma * (1.0 + CurrentPattern::kConstraintTolerance));
  CHECK(pattern.currents().cwiseAbs().sum() <=
        bounds.total_budget_ma * (1.0 + CurrentPattern::kConstraintTolerance));

  LinearProgram bare = make_lp(Eigen::VectorXd::Ones(2), Eigen::MatrixXd(0, 2),
                               Eigen::VectorXd(0), Eigen::MatrixXd(0, 2), Eigen::VectorXd(0));
  LpSolution fake;
  fake.values = Eigen::VectorXd::Zero(2);
  CHECK_THROWS_AS((void)extract_pattern(bare, fake), ConfigError);
  LpSolution short_values;
  short_values.values = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS((void)extract_pattern(lp, short_values), DimensionError);
}

TEST_CASE("text export writes a readable program") {
  const oracle::TinySystem tiny = oracle::random_system(3, 2, 71, 1.0);
  const ReducedSystem system = wrap(tiny);
  const LinearProgram lp = build_l1l1_lp(system, 0.01, 0.3);
  std::ostringstream out;
  write_lp_text(lp, out);
  const std::string text = out.str();
  CHECK(text.find("Minimize") != std::string::npos);
  CHECK(text.find("Subject To") != std::string::npos);
  CHECK(text.find("Bounds") != std::string::npos);
  CHECK(text.find("End") != std::string::npos);
  // one equality and 2 N1 + 2 M + K + 1 inequalities
  CHECK(text.find("= 0") != std::string::npos);
  CHECK(text.find("<=") != std::string::npos);
}
