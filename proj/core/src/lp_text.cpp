#include <cmath>
#include <ostream>

#include "steer/lp.hpp"
#include "steer/numeric.hpp"

namespace steer {

namespace {

std::string variable_name(const LinearProgram& lp, int index) {
  const VariableMap& map = lp.variable_map;
  if (!map.empty()) {
    const int K = map.contacts;
    if (index < map.y_minus_begin) return "yp" + std::to_string(index);
    if (index < map.residual_begin) return "yn" + std::to_string(index - K);
    if (index < map.nuisance_begin) return "t" + std::to_string(index - map.residual_begin);
    return "s" + std::to_string(index - map.nuisance_begin);
  }
  return "x" + std::to_string(index);
}

void write_terms(std::ostream& out, const LinearProgram& lp,
                 const std::vector<std::pair<int, double>>& terms) {
  bool first = true;
  for (const auto& [index, coeff] : terms) {
    if (coeff == 0.0) continue;
    if (first) {
      out << format_double(coeff) << ' ' << variable_name(lp, index);
      first = false;
    } else if (coeff < 0.0) {
      out << " - " << format_double(-coeff) << ' ' << variable_name(lp, index);
    } else {
      out << " + " << format_double(coeff) << ' ' << variable_name(lp, index);
    }
  }
  if (first) out << "0 " << variable_name(lp, 0);
}

std::vector<std::pair<int, double>> sparse_row_terms(const SparseMatrix& matrix, int row) {
  std::vector<std::pair<int, double>> terms;
  for (SparseMatrix::InnerIterator it(matrix, row); it; ++it)
    terms.emplace_back(static_cast<int>(it.col()), it.value());
  return terms;
}

}  // namespace

void write_lp_text(const LinearProgram& lp, std::ostream& out) {
  out << "\\ " << lp.name << "\n";
  out << "Minimize\n obj: ";
  std::vector<std::pair<int, double>> objective_terms;
  for (int j = 0; j < lp.variable_count(); ++j) objective_terms.emplace_back(j, lp.objective[j]);
  write_terms(out, lp, objective_terms);
  out << "\nSubject To\n";
  for (int i = 0; i < lp.eq_count(); ++i) {
    out << " e" << i << ": ";
    write_terms(out, lp, sparse_row_terms(lp.eq_matrix, i));
    out << " = " << format_double(lp.eq_rhs[i]) << "\n";
  }
  for (int i = 0; i < lp.ineq_count(); ++i) {
    out << " c" << i << ": ";
    write_terms(out, lp, sparse_row_terms(lp.ineq_matrix, i));
    out << " <= " << format_double(lp.ineq_rhs[i]) << "\n";
  }
  out << "Bounds\n";
  for (int j = 0; j < lp.variable_count(); ++j) {
    const double lb = lp.lower[j];
    const double ub = lp.upper[j];
    const std::string name = variable_name(lp, j);
    if (std::isinf(lb) && std::isinf(ub)) {
      out << ' ' << name << " free\n";
    } else if (std::isinf(ub)) {
      out << ' ' << name << " >= " << format_double(lb) << "\n";
    } else if (std::isinf(lb)) {
      out << ' ' << name << " <= " << format_double(ub) << "\n";
    } else {
      out << ' ' << format_double(lb) << " <= " << name << " <= " << format_double(ub) << "\n";
    }
  }
  out << "End\n";
}

}  // namespace steer
