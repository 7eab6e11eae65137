#include "steer/solvers.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "steer/numeric.hpp"

namespace steer {

namespace {

Eigen::VectorXd scale_into_constraints(Eigen::VectorXd y, const Bounds& bounds) {
  const double peak = y.cwiseAbs().maxCoeff();
  const double total = y.cwiseAbs().sum();
  const double overshoot =
      std::max(peak / bounds.per_contact_ma, total / bounds.total_budget_ma);
  if (overshoot > 1.0) y /= overshoot;
  return y;
}

SolveOutcome finish_outcome(const ReducedSystem& system, Eigen::VectorXd y, const Bounds& bounds,
                            Method method, std::map<std::string, double> hyperparameters,
                            SolverDiagnostics diagnostics) {
  CurrentPattern pattern(std::move(y), bounds);
  DecisionVariables metrics = decision_variables(system, pattern);
  return SolveOutcome{std::move(pattern), metrics, method, std::move(hyperparameters),
                      std::move(diagnostics)};
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::rp: return "rp";
    case Method::tls: return "tls";
    case Method::l1l1: return "l1l1";
  }
  return "rp";
}

Method method_from_string(const std::string& name) {
  if (name == "rp") return Method::rp;
  if (name == "tls") return Method::tls;
  if (name == "l1l1") return Method::l1l1;
  throw ConfigError("unknown method '" + name + "' (expected rp, tls or l1l1)");
}

SolveOutcome solve_rp(const ReducedSystem& system, const Bounds& bounds) {
  const int K = system.contact_count();
  if (K < 2) throw DimensionError("solve_rp: need at least 2 contacts, got " + std::to_string(K));
  // reciprocity weights: project the wanted density back through the target rows
  Eigen::VectorXd w = system.target_rows.transpose() * system.target_values;
  int anode = 0, cathode = 0;
  for (int j = 1; j < K; ++j) {
    if (w[j] > w[anode]) anode = j;
    if (w[j] < w[cathode]) cathode = j;
  }
  if (w[anode] == w[cathode])
    throw SolveError("solve_rp: all reciprocity weights are equal, no pole pair");

  Eigen::VectorXd y = Eigen::VectorXd::Zero(K);
  y[anode] = bounds.per_contact_ma;
  y[cathode] = -bounds.per_contact_ma;
  y = scale_into_constraints(std::move(y), bounds);

  SolverDiagnostics diagnostics;
  diagnostics.iterations = 1;
  diagnostics.residual = 0.0;
  diagnostics.note = "anode " + std::to_string(anode) + ", cathode " + std::to_string(cathode);
  auto outcome = finish_outcome(system, std::move(y), bounds, Method::rp,
                                {{"per_contact_ma", bounds.per_contact_ma}}, diagnostics);
  outcome.hyperparameters["anode"] = anode;
  outcome.hyperparameters["cathode"] = cathode;
  return outcome;
}

SolveOutcome solve_rp(const ReducedSystem& system, double per_contact_ma) {
  Bounds bounds;
  bounds.per_contact_ma = per_contact_ma;
  bounds.total_budget_ma = 2.0 * per_contact_ma;
  return solve_rp(system, bounds);
}

TlsOperator::TlsOperator(const ReducedSystem& system, const Bounds& bounds)
    : system_(system), bounds_(bounds) {
  const int K = system.contact_count();
  if (K < 1) throw DimensionError("tls: empty system");
  gram_target_.noalias() = system.target_rows.transpose() * system.target_rows;
  if (system.nuisance_count() > 0)
    gram_nuisance_.noalias() = system.nuisance_rows.transpose() * system.nuisance_rows;
  else
    gram_nuisance_ = Eigen::MatrixXd::Zero(K, K);
  rhs_.noalias() = system.target_rows.transpose() * system.target_values;
  // |L|_2 of the stacked system from the Gram spectrum
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(gram_target_ + gram_nuisance_);
  sigma_ = std::sqrt(std::max(0.0, eigen.eigenvalues().maxCoeff()));
}

SolveOutcome TlsOperator::solve(double reg, double beta) const {
  if (!(reg > 0.0)) throw ConfigError("tls: regularization weight must be positive");
  if (!(beta > 0.0)) throw ConfigError("tls: nuisance weight must be positive");
  const int K = static_cast<int>(gram_target_.rows());
  Eigen::MatrixXd normal = gram_target_ + (reg * reg * beta * beta) * gram_nuisance_;
  normal.diagonal().array() += reg * reg * sigma_ * sigma_;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(normal);
  const double lambda_max = eigen.eigenvalues().maxCoeff();
  const double lambda_min = eigen.eigenvalues().minCoeff();
  SolverDiagnostics diagnostics;
  diagnostics.ill_conditioned = !(lambda_min > 0.0) || lambda_max / lambda_min > 1e14;
  if (diagnostics.ill_conditioned)
    diagnostics.note = "normal matrix condition estimate above 1e14";

  Eigen::VectorXd raw = eigen.eigenvectors() *
                        (eigen.eigenvalues().cwiseMax(1e-300).cwiseInverse().asDiagonal() *
                         (eigen.eigenvectors().transpose() * rhs_));
  diagnostics.residual = (normal * raw - rhs_).norm() / std::max(rhs_.norm(), 1e-300);
  diagnostics.iterations = 1;

  // zero net current, then a uniform shrink onto the box and budget
  Eigen::VectorXd y = raw;
  y.array() -= pairwise_sum(y) / static_cast<double>(K);
  y = scale_into_constraints(std::move(y), bounds_);

  std::map<std::string, double> hyperparameters{{"reg", reg},
                                                {"reg_db", linear_to_db(reg)},
                                                {"beta", beta},
                                                {"beta_db", linear_to_db(beta)}};
  auto outcome = finish_outcome(system_, std::move(y), bounds_, Method::tls,
                                std::move(hyperparameters), diagnostics);
  return outcome;
}

Eigen::VectorXd tls_raw_solution(const ReducedSystem& system, double reg, double beta) {
  TlsOperator op(system);
  if (!(reg > 0.0)) throw ConfigError("tls: regularization weight must be positive");
  if (!(beta > 0.0)) throw ConfigError("tls: nuisance weight must be positive");
  Eigen::MatrixXd normal = system.target_rows.transpose() * system.target_rows;
  if (system.nuisance_count() > 0)
    normal += (reg * reg * beta * beta) *
              (system.nuisance_rows.transpose() * system.nuisance_rows);
  normal.diagonal().array() += reg * reg * op.spectral_norm() * op.spectral_norm();
  Eigen::VectorXd rhs = system.target_rows.transpose() * system.target_values;
  return normal.ldlt().solve(rhs);
}

SolveOutcome solve_tls(const ReducedSystem& system, double reg, double beta,
                       const Bounds& bounds) {
  return TlsOperator(system, bounds).solve(reg, beta);
}

L1l1Operator::L1l1Operator(const ReducedSystem& system, const Bounds& bounds,
                           const LpOptions& options)
    : system_(system), bounds_(bounds), options_(options) {
  const double nu = system.target_values.size()
                        ? system.target_values.cwiseAbs().maxCoeff()
                        : 0.0;
  degenerate_target_ = !(nu > 0.0);
  if (!degenerate_target_) lp_ = build_l1l1_lp(system, 0.0, 0.0, bounds);
}

SolveOutcome L1l1Operator::solve(double alpha, double epsilon) {
  if (!(alpha >= 0.0)) throw ConfigError("l1l1: alpha must be >= 0 (linear scale)");
  if (!(epsilon >= 0.0) || !(epsilon <= 1.0))
    throw ConfigError("l1l1: epsilon must lie in [0, 1]");

  std::map<std::string, double> hyperparameters{
      {"alpha", alpha},
      {"alpha_db", alpha > 0.0 ? linear_to_db(alpha) : -std::numeric_limits<double>::infinity()},
      {"epsilon", epsilon},
      {"epsilon_db",
       epsilon > 0.0 ? linear_to_db(epsilon) : -std::numeric_limits<double>::infinity()}};

  if (degenerate_target_) {
    // zero target block: y = 0 attains the censoring floor M * epsilon
    SolverDiagnostics diagnostics;
    diagnostics.note = "zero target block, returning the null pattern";
    Eigen::VectorXd y = Eigen::VectorXd::Zero(system_.contact_count());
    CurrentPattern pattern(std::move(y), bounds_);
    DecisionVariables metrics;
    metrics.gamma = 0.0;
    metrics.xi = 0.0;
    metrics.theta = 0.0;
    return SolveOutcome{std::move(pattern), metrics, Method::l1l1, std::move(hyperparameters),
                        std::move(diagnostics)};
  }

  // only the regularization column and the censoring floor depend on the
  // hyperparameters; the constraint matrix is reused across the sweep
  const int K = lp_.variable_map.contacts;
  lp_.objective.segment(0, 2 * K).setConstant(alpha * lp_.structure->zeta);
  lp_.lower.segment(lp_.variable_map.nuisance_begin, lp_.variable_map.nuisance_count)
      .setConstant(epsilon);
  lp_.structure->alpha = alpha;
  lp_.structure->epsilon = epsilon;

  LpSolution solution = solve_lp(lp_, options_);
  if (solution.status != LpStatus::optimal)
    throw SolveError("l1l1: linear program ended with status " + to_string(solution.status) +
                     " after " + std::to_string(solution.iterations) +
                     " iterations (alpha " + format_double(alpha) + ", epsilon " +
                     format_double(epsilon) + ")");

  CurrentPattern pattern = extract_pattern(lp_, solution);
  DecisionVariables metrics = decision_variables(system_, pattern);
  SolverDiagnostics diagnostics;
  diagnostics.iterations = solution.iterations;
  diagnostics.residual = std::max({solution.certificate.primal_infeasibility,
                                   solution.certificate.dual_infeasibility,
                                   solution.certificate.complementarity});
  diagnostics.note = "objective " + format_double(solution.objective_value);
  return SolveOutcome{std::move(pattern), metrics, Method::l1l1, std::move(hyperparameters),
                      std::move(diagnostics)};
}

SolveOutcome solve_l1l1(const ReducedSystem& system, double alpha, double epsilon,
                        const Bounds& bounds, const LpOptions& options) {
  L1l1Operator op(system, bounds, options);
  return op.solve(alpha, epsilon);
}

}  // namespace steer
