#pragma once

#include <optional>

#include "steer/solvers.hpp"

namespace steer {

/// One hyperparameter axis, sampled on a uniform dB lattice (amplitude
/// decibels, value = 10^(db/20)); steps == 1 collapses to min_db.
struct AxisSpec {
  std::string name;
  double min_db = 0.0;
  double max_db = 0.0;
  int steps = 8;

  [[nodiscard]] double value_db(int index) const;
  [[nodiscard]] double value(int index) const;
};

struct SearchSpace {
  Method method = Method::l1l1;
  std::string variant;  // "a" / "b" for the censored fit, empty otherwise
  AxisSpec param1;
  AxisSpec param2;
};

enum class SearchPreset { l1l1_a, l1l1_b, tls_default };

[[nodiscard]] SearchPreset search_preset_from_string(const std::string& name);

/// Published hyperparameter windows: the censored fit searches alpha in
/// [-100, -30] dB with epsilon in [-160, 0] dB (variant a, overfitting
/// allowed) or [-10, 0] dB (variant b, censoring floor held high); TLS
/// searches reg in [-200, -110] dB and beta in [-50, 40] dB.
[[nodiscard]] SearchSpace make_search_space(SearchPreset preset, int steps = 8);

struct CandidateSolution {
  int i = 0;  // param1 lattice index
  int j = 0;  // param2 lattice index
  std::optional<SolveOutcome> outcome;
  std::string error;  // nonempty when the point failed to solve
  bool feasible = false;

  [[nodiscard]] bool solved() const { return outcome.has_value(); }
};

struct SearchResult {
  CandidateSolution best;
  std::vector<CandidateSolution> lattice;  // row major, index = i * steps2 + j
  bool feasible_set_empty = false;
  double gamma0 = 0.0;
};

/// Exhaustive lattice evaluation. A candidate is feasible when its focused
/// density reaches gamma0 (inclusive). The best candidate maximizes Theta
/// over the feasible set; if the set is empty the search falls back to
/// maximizing Gamma and flags the result. Ties resolve lexicographically by
/// (i, j). Optional worker threads evaluate lattice points concurrently;
/// the selection is order independent, so results do not depend on workers.
[[nodiscard]] SearchResult lattice_search(const ReducedSystem& system, const SearchSpace& space,
                                          double gamma0, const Bounds& bounds = {},
                                          int workers = 1, const LpOptions& lp_options = {});

}  // namespace steer
