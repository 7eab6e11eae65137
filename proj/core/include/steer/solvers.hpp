#pragma once

#include <map>

#include "steer/lp.hpp"
#include "steer/metrics.hpp"

namespace steer {

enum class Method { rp, tls, l1l1 };

[[nodiscard]] std::string to_string(Method method);
[[nodiscard]] Method method_from_string(const std::string& name);

struct SolverDiagnostics {
  int iterations = 0;
  double residual = 0.0;        // method specific, see each solver
  bool ill_conditioned = false; // TLS: condition estimate above 1e14
  std::string note;
};

/// Result of one solve: the (post processed) pattern, its metrics on the
/// system it was solved on, and the hyperparameters that produced it.
struct SolveOutcome {
  CurrentPattern pattern;
  DecisionVariables metrics;
  Method method = Method::rp;
  std::map<std::string, double> hyperparameters;
  SolverDiagnostics diagnostics;
};

/// Reciprocal rule: w = L1^T x1, anode at argmax w, cathode at argmin w,
/// +/- per contact bound on that pair and zero elsewhere (ties resolve to
/// the lowest index). Errors when every w entry is identical.
[[nodiscard]] SolveOutcome solve_rp(const ReducedSystem& system, const Bounds& bounds = {});
[[nodiscard]] SolveOutcome solve_rp(const ReducedSystem& system, double per_contact_ma);

/// Unconstrained Tikhonov solution of
///   (L1^T L1 + reg^2 beta^2 L2^T L2 + reg^2 sigma^2 I) y = L1^T x1
/// with sigma = |L|_2 of the stacked system. No constraint handling.
[[nodiscard]] Eigen::VectorXd tls_raw_solution(const ReducedSystem& system, double reg,
                                               double beta);

/// Tikhonov solve followed by mean subtraction and, when the box or budget
/// is exceeded, a uniform down scaling onto the constraint set (Theta is
/// scale invariant, so the ratio survives the projection).
[[nodiscard]] SolveOutcome solve_tls(const ReducedSystem& system, double reg, double beta,
                                     const Bounds& bounds = {});

/// Censored L1 fit via the linear program of build_l1l1_lp. alpha and
/// epsilon arrive on linear scale. A zero target block short circuits to
/// y = 0 (the objective floor M * epsilon is attained there).
[[nodiscard]] SolveOutcome solve_l1l1(const ReducedSystem& system, double alpha, double epsilon,
                                      const Bounds& bounds = {}, const LpOptions& options = {});

/// Caches the Gram matrices and the spectral norm of one system so a
/// hyperparameter sweep pays the O(M K^2) setup once.
class TlsOperator {
 public:
  explicit TlsOperator(const ReducedSystem& system, const Bounds& bounds = {});

  [[nodiscard]] SolveOutcome solve(double reg, double beta) const;
  [[nodiscard]] double spectral_norm() const { return sigma_; }

 private:
  const ReducedSystem& system_;
  Bounds bounds_;
  Eigen::MatrixXd gram_target_;    // L1^T L1
  Eigen::MatrixXd gram_nuisance_;  // L2^T L2
  Eigen::VectorXd rhs_;            // L1^T x1
  double sigma_ = 0.0;
};

/// Builds the L1L1 program once and re-solves it for new (alpha, epsilon)
/// by patching the objective and the censoring floor in place.
class L1l1Operator {
 public:
  L1l1Operator(const ReducedSystem& system, const Bounds& bounds = {}, const LpOptions& options = {});

  [[nodiscard]] SolveOutcome solve(double alpha, double epsilon);

 private:
  const ReducedSystem& system_;
  Bounds bounds_;
  LpOptions options_;
  LinearProgram lp_;
  bool degenerate_target_ = false;
};

}  // namespace steer
