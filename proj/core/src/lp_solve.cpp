#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <memory>

#include "steer/lp.hpp"
#include "steer/numeric.hpp"

namespace steer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPrimalReg = 1e-11;  // static diagonal regularization of H
constexpr double kDualReg = 1e-11;    // regularization of the equality Schur block
constexpr double kStepFraction = 0.9995;
constexpr double kBlowup = 1e13;

using Vector = Eigen::VectorXd;

/// Inequality-block operations. The generic backend walks the sparse matrix;
/// the layout-aware backend synthesizes the epigraph rows from the stacked
/// row matrix, which keeps the per-iteration cost at O(M K^2) instead of a
/// dense factorization of the full variable space.
class ConstraintOps {
 public:
  virtual ~ConstraintOps() = default;
  virtual void mult_in(const Vector& x, Vector& out) const = 0;
  virtual void mult_in_t(const Vector& v, Vector& out) const = 0;
  /// Factors H = diag(dx_diag) + A_in^T diag(dw_diag) A_in.
  virtual void factor(const Vector& dx_diag, const Vector& dw_diag) = 0;
  virtual void solve_h(const Vector& rhs, Vector& out) const = 0;
};

class GenericOps final : public ConstraintOps {
 public:
  explicit GenericOps(const LinearProgram& lp) : matrix_(lp.ineq_matrix) {}

  void mult_in(const Vector& x, Vector& out) const override { out.noalias() = matrix_ * x; }

  void mult_in_t(const Vector& v, Vector& out) const override {
    out.noalias() = matrix_.transpose() * v;
  }

  void factor(const Vector& dx_diag, const Vector& dw_diag) override {
    const Eigen::Index n = dx_diag.size();
    h_ = dx_diag.asDiagonal();
    for (int r = 0; r < matrix_.rows(); ++r) {
      const double weight = dw_diag[r];
      if (weight == 0.0) continue;
      for (SparseMatrix::InnerIterator it1(matrix_, r); it1; ++it1)
        for (SparseMatrix::InnerIterator it2(matrix_, r); it2; ++it2)
          h_(it1.col(), it2.col()) += weight * it1.value() * it2.value();
    }
    llt_.compute(h_);
    if (llt_.info() != Eigen::Success) {
      h_.diagonal().array() += 1e-8 * (1.0 + h_.diagonal().maxCoeff());
      llt_.compute(h_);
      if (llt_.info() != Eigen::Success)
        throw SolveError("interior point step: dense KKT factorization failed");
    }
  }

  void solve_h(const Vector& rhs, Vector& out) const override { out = llt_.solve(rhs); }

 private:
  const SparseMatrix& matrix_;
  Eigen::MatrixXd h_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Exploits the canonical layout [y+, y-, t, s] with inequality rows
/// [t pairs, s pairs, box, budget]: the epigraph columns touch one row pair
/// each, so eliminating them leaves a dense core of size 2K.
class StructuredOps final : public ConstraintOps {
 public:
  StructuredOps(const LinearProgram& lp)
      : w_(lp.structure->stacked_rows),
        k_(lp.variable_map.contacts),
        n1_(lp.variable_map.residual_count),
        m_(lp.variable_map.nuisance_count) {}

  void mult_in(const Vector& x, Vector& out) const override {
    const int K = k_, N1 = n1_, M = m_;
    Vector y = x.head(K) - x.segment(K, K);
    Vector wy(N1 + M);
    wy.noalias() = w_ * y;
    out.resize(2 * N1 + 2 * M + K + 1);
    out.segment(0, N1) = wy.head(N1) - x.segment(2 * K, N1);
    out.segment(N1, N1) = -wy.head(N1) - x.segment(2 * K, N1);
    out.segment(2 * N1, M) = wy.tail(M) - x.segment(2 * K + N1, M);
    out.segment(2 * N1 + M, M) = -wy.tail(M) - x.segment(2 * K + N1, M);
    out.segment(2 * N1 + 2 * M, K) = x.head(K) + x.segment(K, K);
    out[2 * N1 + 2 * M + K] = x.head(2 * K).sum();
  }

  void mult_in_t(const Vector& v, Vector& out) const override {
    const int K = k_, N1 = n1_, M = m_;
    Vector fe(N1 + M);
    fe.head(N1) = v.head(N1) - v.segment(N1, N1);
    fe.tail(M) = v.segment(2 * N1, M) - v.segment(2 * N1 + M, M);
    Vector u(K);
    u.noalias() = w_.transpose() * fe;
    const auto box = v.segment(2 * N1 + 2 * M, K);
    const double budget = v[2 * N1 + 2 * M + K];
    out.resize(2 * K + N1 + M);
    out.head(K) = u + box + Vector::Constant(K, budget);
    out.segment(K, K) = -u + box + Vector::Constant(K, budget);
    out.segment(2 * K, N1) = -(v.head(N1) + v.segment(N1, N1));
    out.segment(2 * K + N1, M) = -(v.segment(2 * N1, M) + v.segment(2 * N1 + M, M));
  }

  void factor(const Vector& dx_diag, const Vector& dw_diag) override {
    const int K = k_, N1 = n1_, M = m_, R = N1 + M;
    const auto d_plus_t = dw_diag.segment(0, N1);
    const auto d_minus_t = dw_diag.segment(N1, N1);
    const auto d_plus_s = dw_diag.segment(2 * N1, M);
    const auto d_minus_s = dw_diag.segment(2 * N1 + M, M);
    const auto d_box = dw_diag.segment(2 * N1 + 2 * M, K);
    const double d_budget = dw_diag[2 * N1 + 2 * M + K];

    Vector omega(R), kappa(R), product(R);
    omega.head(N1) = d_plus_t + d_minus_t;
    omega.tail(M) = d_plus_s + d_minus_s;
    kappa.head(N1) = d_minus_t - d_plus_t;
    kappa.tail(M) = d_minus_s - d_plus_s;
    product.head(N1) = d_plus_t.cwiseProduct(d_minus_t);
    product.tail(M) = d_plus_s.cwiseProduct(d_minus_s);

    hee_ = omega + dx_diag.tail(R);
    kappa_over_hee_ = kappa.cwiseQuotient(hee_);
    // effective row weight after eliminating the epigraph variable:
    // omega - kappa^2 / hee == (4 d+ d- + omega dx_e) / hee, which avoids the
    // catastrophic cancellation of the difference form when one multiplier of
    // an inequality pair dominates and the epigraph bound is nearly active
    Vector eff =
        (4.0 * product + omega.cwiseProduct(dx_diag.tail(R))).cwiseQuotient(hee_);

    scaled_ = w_;
    scaled_.array().colwise() *= eff.array().sqrt();
    Eigen::MatrixXd c(K, K);
    c.setZero();
    c.selfadjointView<Eigen::Lower>().rankUpdate(scaled_.transpose());
    c.triangularView<Eigen::StrictlyUpper>() = c.transpose();

    s_.resize(2 * K, 2 * K);
    s_.block(0, 0, K, K) = c;
    s_.block(K, K, K, K) = c;
    s_.block(0, K, K, K) = -c;
    s_.block(K, 0, K, K) = -c;
    s_.array() += d_budget;
    for (int l = 0; l < K; ++l) {
      s_(l, l) += d_box[l] + dx_diag[l];
      s_(K + l, K + l) += d_box[l] + dx_diag[K + l];
      s_(l, K + l) += d_box[l];
      s_(K + l, l) += d_box[l];
    }
    llt_.compute(s_);
    if (llt_.info() != Eigen::Success) {
      s_.diagonal().array() += 1e-8 * (1.0 + s_.diagonal().maxCoeff());
      llt_.compute(s_);
      if (llt_.info() != Eigen::Success)
        throw SolveError("interior point step: structured KKT factorization failed");
    }
  }

  void solve_h(const Vector& rhs, Vector& out) const override {
    const int K = k_, N1 = n1_, M = m_;
    const auto fe = rhs.tail(N1 + M);
    // du solves the dense core after eliminating the epigraph block,
    // then de = (fe - kappa .* (W ydiff)) / hee back-substitutes
    Vector tmp = kappa_over_hee_.cwiseProduct(fe);
    Vector u(K);
    u.noalias() = w_.transpose() * tmp;
    Vector g(2 * K);
    g.head(K) = rhs.head(K) - u;
    g.segment(K, K) = rhs.segment(K, K) + u;
    Vector du = llt_.solve(g);
    Vector ydiff = du.head(K) - du.tail(K);
    Vector wy(N1 + M);
    wy.noalias() = w_ * ydiff;
    out.resize(2 * K + N1 + M);
    out.head(2 * K) = du;
    out.tail(N1 + M) = fe.cwiseQuotient(hee_) - kappa_over_hee_.cwiseProduct(wy);
  }

 private:
  const Eigen::MatrixXd& w_;
  int k_, n1_, m_;
  Vector hee_, kappa_over_hee_;
  Eigen::MatrixXd scaled_, s_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
};

double max_step(const Vector& v, const Vector& dv) {
  double alpha = kInf;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) alpha = std::min(alpha, -v[i] / dv[i]);
  return alpha;
}

}  // namespace

std::string to_string(LpStatus status) {
  switch (status) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "iteration_limit";
}

namespace {

LpSolution run_interior_point(const LinearProgram& lp, const LpOptions& options,
                              bool structured) {
  const int n = lp.variable_count();
  const int p = lp.eq_count();
  const int m = lp.ineq_count();

  std::unique_ptr<ConstraintOps> ops;
  if (structured)
    ops = std::make_unique<StructuredOps>(lp);
  else
    ops = std::make_unique<GenericOps>(lp);

  const Vector& c = lp.objective;
  const double c_scale = 1.0 + (n ? c.cwiseAbs().maxCoeff() : 0.0);
  double b_scale = 1.0;
  if (p > 0) b_scale = std::max(b_scale, lp.eq_rhs.cwiseAbs().maxCoeff());
  if (m > 0) b_scale = std::max(b_scale, lp.ineq_rhs.cwiseAbs().maxCoeff());

  // strictly interior start: midpoints inside boxes, unit slacks elsewhere
  Vector x(n);
  for (int j = 0; j < n; ++j) {
    const double lb = lp.lower[j], ub = lp.upper[j];
    if (std::isfinite(lb) && std::isfinite(ub)) x[j] = 0.5 * (lb + ub);
    else if (std::isfinite(lb)) x[j] = lb + 1.0;
    else if (std::isfinite(ub)) x[j] = ub - 1.0;
    else x[j] = 0.0;
  }
  Vector w, lambda_i;
  if (m > 0) {
    Vector ax(m);
    ops->mult_in(x, ax);
    w = (lp.ineq_rhs - ax).cwiseMax(1.0);
    lambda_i = Vector::Ones(m);
  }
  Vector lambda_e = Vector::Zero(p);
  Vector z = Vector::Zero(n), q = Vector::Zero(n);
  Vector g = Vector::Ones(n), hb = Vector::Ones(n);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j])) z[j] = 1.0;
    if (std::isfinite(lp.upper[j])) q[j] = 1.0;
  }

  int comp_count = m;
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lp.lower[j])) ++comp_count;
    if (std::isfinite(lp.upper[j])) ++comp_count;
  }

  LpSolution best;
  best.values = x;
  best.status = LpStatus::iteration_limit;
  double best_merit = kInf;

  if (comp_count == 0) {
    // no inequalities or bounds: optimal iff c is orthogonal to the equality
    // null space, otherwise the objective is unbounded below
    Eigen::MatrixXd dense_eq = Eigen::MatrixXd(lp.eq_matrix);
    Vector x_ls = dense_eq.completeOrthogonalDecomposition().solve(lp.eq_rhs);
    Vector lambda_ls =
        dense_eq.transpose().completeOrthogonalDecomposition().solve(-c);
    const double dual_res = (c + dense_eq.transpose() * lambda_ls).cwiseAbs().maxCoeff();
    const double primal_res = p ? (dense_eq * x_ls - lp.eq_rhs).cwiseAbs().maxCoeff() : 0.0;
    best.values = x_ls;
    best.objective_value = c.dot(x_ls);
    best.certificate.primal_infeasibility = primal_res / (1.0 + b_scale);
    best.certificate.dual_infeasibility = dual_res / c_scale;
    best.certificate.complementarity = 0.0;
    if (primal_res / (1.0 + b_scale) > options.tolerance) best.status = LpStatus::infeasible;
    else if (dual_res / c_scale > options.tolerance) best.status = LpStatus::unbounded;
    else best.status = LpStatus::optimal;
    return best;
  }

  Vector rd(n), re(p), ri(m), ax(m), atv(n);
  Vector dx_diag(n), dw_diag(m);
  Vector rc_w(m), rc_g(n), rc_h(n);
  Vector f(n), dx(n), dw(m), dlambda_i(m), dz(n), dq(n), dlambda_e(p);
  Vector dx_aff(n), dw_aff(m), dli_aff(m), dz_aff(n), dq_aff(n);
  Eigen::MatrixXd hinv_aeq(n, p);
  Vector hinv_f(n);

  double stall_mu = kInf;
  int stall_counter = 0;
  int iter = 0;

  for (; iter < options.max_iterations; ++iter) {
    // residuals
    if (m > 0) {
      ops->mult_in(x, ax);
      ri = lp.ineq_rhs - ax - w;
      ops->mult_in_t(lambda_i, atv);
    } else {
      atv.setZero();
    }
    rd = c + atv;
    if (p > 0) rd += lp.eq_matrix.transpose() * lambda_e;
    rd -= z;
    rd += q;
    if (p > 0) re = lp.eq_rhs - lp.eq_matrix * x;

    for (int j = 0; j < n; ++j) {
      g[j] = std::isfinite(lp.lower[j]) ? x[j] - lp.lower[j] : 1.0;
      hb[j] = std::isfinite(lp.upper[j]) ? lp.upper[j] - x[j] : 1.0;
    }
    double gap = 0.0;
    if (m > 0) gap += w.dot(lambda_i);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lp.lower[j])) gap += g[j] * z[j];
      if (std::isfinite(lp.upper[j])) gap += hb[j] * q[j];
    }
    const double mu = gap / comp_count;

    const double primal_obj = c.dot(x);
    double dual_obj = 0.0;
    if (p > 0) dual_obj -= lp.eq_rhs.dot(lambda_e);
    if (m > 0) dual_obj -= lp.ineq_rhs.dot(lambda_i);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lp.lower[j])) dual_obj += lp.lower[j] * z[j];
      if (std::isfinite(lp.upper[j])) dual_obj -= lp.upper[j] * q[j];
    }

    const double rel_primal =
        std::max(p ? re.cwiseAbs().maxCoeff() : 0.0, m ? ri.cwiseAbs().maxCoeff() : 0.0) /
        (1.0 + b_scale);
    const double rel_dual = rd.cwiseAbs().maxCoeff() / c_scale;
    const double rel_gap =
        std::abs(primal_obj - dual_obj) / (1.0 + std::abs(primal_obj) + std::abs(dual_obj));

    // keep the iterate with the best certificate; a later iteration can lose
    // accuracy in a degenerate corner, and a numerical collapse must not
    // overwrite a good solution
    const double merit = std::max({rel_primal, rel_dual, rel_gap});
    if (!std::isfinite(merit)) break;
    if (merit <= best_merit) {
      best_merit = merit;
      best.values = x;
      best.objective_value = primal_obj;
      best.iterations = iter;
      best.certificate.primal_infeasibility = rel_primal;
      best.certificate.dual_infeasibility = rel_dual;
      best.certificate.complementarity = rel_gap;
    }

    if (rel_primal <= options.tolerance && rel_dual <= options.tolerance &&
        rel_gap <= options.tolerance) {
      best.status = LpStatus::optimal;
      best.values = x;
      best.objective_value = primal_obj;
      best.iterations = iter;
      best.certificate.primal_infeasibility = rel_primal;
      best.certificate.dual_infeasibility = rel_dual;
      best.certificate.complementarity = rel_gap;
      return best;
    }

    // divergence heuristics: an infeasible primal sends the dual objective
    // and multipliers to +inf, an unbounded primal sends the iterate and the
    // objective to -inf while staying (slack-)feasible
    const double dual_mag = std::max({m ? lambda_i.cwiseAbs().maxCoeff() : 0.0,
                                      z.cwiseAbs().maxCoeff(), q.cwiseAbs().maxCoeff()});
    const double primal_mag = std::max(x.cwiseAbs().maxCoeff(), m ? w.maxCoeff() : 0.0);
    if (rel_primal > 10.0 * options.tolerance &&
        (dual_mag > kBlowup * c_scale ||
         (dual_obj > 1e8 * (1.0 + std::abs(primal_obj)) && dual_mag > 1e8))) {
      best.status = LpStatus::infeasible;
      return best;
    }
    if (primal_mag > 1e10 * (1.0 + b_scale) && rel_primal <= 1e-6 &&
        primal_obj < -1e8 * (1.0 + std::abs(dual_obj))) {
      best.status = LpStatus::unbounded;
      return best;
    }

    // stall detection: no sustained progress in the barrier parameter
    if (mu < 0.9 * stall_mu) {
      stall_mu = mu;
      stall_counter = 0;
    } else if (++stall_counter > 50) {
      best.status = LpStatus::iteration_limit;
      return best;
    }

    // scaling matrices
    for (int j = 0; j < n; ++j) {
      double d = kPrimalReg;
      if (std::isfinite(lp.lower[j])) d += z[j] / std::max(g[j], 1e-300);
      if (std::isfinite(lp.upper[j])) d += q[j] / std::max(hb[j], 1e-300);
      dx_diag[j] = d;
    }
    for (int r = 0; r < m; ++r) dw_diag[r] = lambda_i[r] / std::max(w[r], 1e-300);

    ops->factor(dx_diag, dw_diag);
    if (p > 0) {
      for (int col = 0; col < p; ++col) {
        Vector aeq_col = lp.eq_matrix.transpose() * Vector::Unit(p, col);
        Vector sol(n);
        ops->solve_h(aeq_col, sol);
        hinv_aeq.col(col) = sol;
      }
    }

    auto solve_kkt = [&](const Vector& f_rhs, const Vector& re_rhs, Vector& dx_out,
                         Vector& dlambda_out) {
      ops->solve_h(f_rhs, hinv_f);
      if (p > 0) {
        Eigen::MatrixXd schur = lp.eq_matrix * hinv_aeq;
        schur.diagonal().array() += kDualReg;
        Vector rhs_e = lp.eq_matrix * hinv_f - re_rhs;
        dlambda_out = schur.ldlt().solve(rhs_e);
        dx_out = hinv_f - hinv_aeq * dlambda_out;
      } else {
        dlambda_out.resize(0);
        dx_out = hinv_f;
      }
    };

    auto assemble_f = [&](Vector& f_out) {
      f_out = -rd;
      if (m > 0) {
        Vector tmp = rc_w.cwiseQuotient(w.cwiseMax(1e-300)) - dw_diag.cwiseProduct(ri);
        ops->mult_in_t(tmp, atv);
        f_out -= atv;
      }
      for (int j = 0; j < n; ++j) {
        if (std::isfinite(lp.lower[j])) f_out[j] += rc_g[j] / std::max(g[j], 1e-300);
        if (std::isfinite(lp.upper[j])) f_out[j] -= rc_h[j] / std::max(hb[j], 1e-300);
      }
    };

    auto recover = [&](const Vector& dxv, Vector& dwv, Vector& dliv, Vector& dzv, Vector& dqv) {
      if (m > 0) {
        ops->mult_in(dxv, ax);
        dwv = ri - ax;
        dliv = (rc_w - lambda_i.cwiseProduct(dwv)).cwiseQuotient(w.cwiseMax(1e-300));
      }
      for (int j = 0; j < n; ++j) {
        dzv[j] = std::isfinite(lp.lower[j])
                     ? (rc_g[j] - z[j] * dxv[j]) / std::max(g[j], 1e-300)
                     : 0.0;
        dqv[j] = std::isfinite(lp.upper[j])
                     ? (rc_h[j] + q[j] * dxv[j]) / std::max(hb[j], 1e-300)
                     : 0.0;
      }
    };

    auto primal_step = [&](const Vector& dxv, const Vector& dwv) {
      double alpha = m > 0 ? max_step(w, dwv) : kInf;
      for (int j = 0; j < n; ++j) {
        if (std::isfinite(lp.lower[j]) && dxv[j] < 0.0)
          alpha = std::min(alpha, -g[j] / dxv[j]);
        if (std::isfinite(lp.upper[j]) && dxv[j] > 0.0)
          alpha = std::min(alpha, hb[j] / dxv[j]);
      }
      return std::min(alpha, 1.0);
    };
    auto dual_step = [&](const Vector& dliv, const Vector& dzv, const Vector& dqv) {
      double alpha = m > 0 ? max_step(lambda_i, dliv) : kInf;
      for (int j = 0; j < n; ++j) {
        if (std::isfinite(lp.lower[j]) && dzv[j] < 0.0) alpha = std::min(alpha, -z[j] / dzv[j]);
        if (std::isfinite(lp.upper[j]) && dqv[j] < 0.0) alpha = std::min(alpha, -q[j] / dqv[j]);
      }
      return std::min(alpha, 1.0);
    };

    // affine scaling (predictor) direction
    if (m > 0) rc_w = -w.cwiseProduct(lambda_i);
    for (int j = 0; j < n; ++j) {
      rc_g[j] = std::isfinite(lp.lower[j]) ? -g[j] * z[j] : 0.0;
      rc_h[j] = std::isfinite(lp.upper[j]) ? -hb[j] * q[j] : 0.0;
    }
    assemble_f(f);
    solve_kkt(f, re, dx_aff, dlambda_e);
    recover(dx_aff, dw_aff, dli_aff, dz_aff, dq_aff);

    const double alpha_aff_p = primal_step(dx_aff, dw_aff);
    const double alpha_aff_d = dual_step(dli_aff, dz_aff, dq_aff);

    double gap_aff = 0.0;
    if (m > 0)
      gap_aff += (w + alpha_aff_p * dw_aff).dot(lambda_i + alpha_aff_d * dli_aff);
    for (int j = 0; j < n; ++j) {
      if (std::isfinite(lp.lower[j]))
        gap_aff += (g[j] + alpha_aff_p * dx_aff[j]) * (z[j] + alpha_aff_d * dz_aff[j]);
      if (std::isfinite(lp.upper[j]))
        gap_aff += (hb[j] - alpha_aff_p * dx_aff[j]) * (q[j] + alpha_aff_d * dq_aff[j]);
    }
    const double mu_aff = gap_aff / comp_count;
    const double sigma = std::pow(std::max(mu_aff, 0.0) / std::max(mu, 1e-300), 3);

    // corrector
    const double target = sigma * mu;
    if (m > 0)
      rc_w = Vector::Constant(m, target) - w.cwiseProduct(lambda_i) -
             dw_aff.cwiseProduct(dli_aff);
    for (int j = 0; j < n; ++j) {
      rc_g[j] = std::isfinite(lp.lower[j])
                    ? target - g[j] * z[j] - dx_aff[j] * dz_aff[j]
                    : 0.0;
      rc_h[j] = std::isfinite(lp.upper[j])
                    ? target - hb[j] * q[j] + dx_aff[j] * dq_aff[j]
                    : 0.0;
    }
    assemble_f(f);
    solve_kkt(f, re, dx, dlambda_e);
    recover(dx, dw, dlambda_i, dz, dq);

    const double alpha_p = std::min(1.0, kStepFraction * primal_step(dx, dw));
    const double alpha_d = std::min(1.0, kStepFraction * dual_step(dlambda_i, dz, dq));

    x += alpha_p * dx;
    if (m > 0) {
      w += alpha_p * dw;
      lambda_i += alpha_d * dlambda_i;
    }
    if (p > 0) lambda_e += alpha_d * dlambda_e;
    z += alpha_d * dz;
    q += alpha_d * dq;
  }

  best.iterations = iter;
  best.status = LpStatus::iteration_limit;
  return best;
}

double certificate_merit(const LpSolution& solution) {
  return std::max({solution.certificate.primal_infeasibility,
                   solution.certificate.dual_infeasibility,
                   solution.certificate.complementarity});
}

/// Programs small enough that a dense factorization retry is essentially free.
constexpr int kDenseRetryLimit = 256;

}  // namespace

LpSolution solve_lp(const LinearProgram& lp, const LpOptions& options) {
  const int n = lp.variable_count();
  const int p = lp.eq_count();
  const int m = lp.ineq_count();
  if (n == 0) throw DimensionError("solve_lp: program with no variables");
  if (lp.lower.size() != n || lp.upper.size() != n)
    throw DimensionError("solve_lp: bound vectors do not match the variable count");
  if (lp.eq_matrix.rows() != p || (p > 0 && lp.eq_matrix.cols() != n))
    throw DimensionError("solve_lp: equality block shape mismatch");
  if (lp.ineq_matrix.rows() != m || (m > 0 && lp.ineq_matrix.cols() != n))
    throw DimensionError("solve_lp: inequality block shape mismatch");
  for (int j = 0; j < n; ++j)
    if (lp.lower[j] > lp.upper[j]) {
      LpSolution crossed;
      crossed.values = Vector::Zero(n);
      crossed.status = LpStatus::infeasible;
      crossed.certificate.primal_infeasibility = lp.lower[j] - lp.upper[j];
      return crossed;
    }
  if (!(options.tolerance > 0.0)) throw ConfigError("solve_lp: tolerance must be positive");

  const bool structured =
      lp.structure && !lp.variable_map.empty() && !options.force_generic_kkt;
  LpSolution solution = run_interior_point(lp, options, structured);

  // a stalled structured run on a small program gets one dense retry; heavy
  // primal degeneracy can defeat the condensed factorization while the full
  // one converges, and a dense solve at this size costs next to nothing
  if (structured && solution.status != LpStatus::optimal && n <= kDenseRetryLimit) {
    LpSolution retry = run_interior_point(lp, options, false);
    if (retry.status != LpStatus::iteration_limit) return retry;
    if (certificate_merit(retry) < certificate_merit(solution)) return retry;
  }
  return solution;
}

}  // namespace steer
