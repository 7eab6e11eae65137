#include "steer/search.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "steer/numeric.hpp"

namespace steer {

double AxisSpec::value_db(int index) const {
  if (index < 0 || index >= steps)
    throw ConfigError("axis '" + name + "': index " + std::to_string(index) +
                      " outside [0, " + std::to_string(steps) + ")");
  if (steps == 1) return min_db;
  return min_db + (max_db - min_db) * static_cast<double>(index) /
                      static_cast<double>(steps - 1);
}

double AxisSpec::value(int index) const { return db_to_linear(value_db(index)); }

SearchPreset search_preset_from_string(const std::string& name) {
  if (name == "l1l1_a" || name == "a") return SearchPreset::l1l1_a;
  if (name == "l1l1_b" || name == "b") return SearchPreset::l1l1_b;
  if (name == "tls_default" || name == "tls") return SearchPreset::tls_default;
  throw ConfigError("unknown search preset '" + name +
                    "' (expected l1l1_a, l1l1_b or tls_default)");
}

SearchSpace make_search_space(SearchPreset preset, int steps) {
  if (steps < 1) throw ConfigError("search lattice needs at least one step per axis");
  SearchSpace space;
  space.param1.steps = steps;
  space.param2.steps = steps;
  switch (preset) {
    case SearchPreset::l1l1_a:
      space.method = Method::l1l1;
      space.variant = "a";
      space.param1 = {"alpha", -100.0, -30.0, steps};
      space.param2 = {"epsilon", -160.0, 0.0, steps};
      break;
    case SearchPreset::l1l1_b:
      space.method = Method::l1l1;
      space.variant = "b";
      space.param1 = {"alpha", -100.0, -30.0, steps};
      space.param2 = {"epsilon", -10.0, 0.0, steps};
      break;
    case SearchPreset::tls_default:
      space.method = Method::tls;
      space.variant = "";
      space.param1 = {"reg", -200.0, -110.0, steps};
      space.param2 = {"beta", -50.0, 40.0, steps};
      break;
  }
  return space;
}

namespace {

/// Ranks a against b for the primary objective: feasible first, then Theta,
/// then lexicographic lattice order. Returns true when a should replace b.
bool improves_theta(const CandidateSolution& a, const CandidateSolution& b) {
  if (!a.solved() || !a.feasible) return false;
  if (!b.solved() || !b.feasible) return true;
  const double ta = a.outcome->metrics.theta;
  const double tb = b.outcome->metrics.theta;
  if (ta != tb) return ta > tb;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

/// Fallback ranking when nothing is feasible: maximize Gamma instead.
bool improves_gamma(const CandidateSolution& a, const CandidateSolution& b) {
  if (!a.solved()) return false;
  if (!b.solved()) return true;
  const double ga = a.outcome->metrics.gamma;
  const double gb = b.outcome->metrics.gamma;
  if (ga != gb) return ga > gb;
  if (a.i != b.i) return a.i < b.i;
  return a.j < b.j;
}

}  // namespace

SearchResult lattice_search(const ReducedSystem& system, const SearchSpace& space, double gamma0,
                            const Bounds& bounds, int workers, const LpOptions& lp_options) {
  if (space.param1.steps < 1 || space.param2.steps < 1)
    throw ConfigError("search lattice needs at least one step per axis");
  if (workers < 1) throw ConfigError("lattice_search: workers must be >= 1");

  const int steps1 = space.param1.steps;
  const int steps2 = space.param2.steps;
  const int total = steps1 * steps2;

  SearchResult result;
  result.gamma0 = gamma0;
  result.lattice.resize(total);

  auto evaluate = [&](int flat, L1l1Operator* censored, const TlsOperator* tikhonov) {
    CandidateSolution& slot = result.lattice[flat];
    slot.i = flat / steps2;
    slot.j = flat % steps2;
    const double v1 = space.param1.value(slot.i);
    const double v2 = space.param2.value(slot.j);
    try {
      SolveOutcome outcome = space.method == Method::l1l1 ? censored->solve(v1, v2)
                                                          : tikhonov->solve(v1, v2);
      slot.feasible = outcome.metrics.gamma >= gamma0;
      slot.outcome = std::move(outcome);
    } catch (const std::exception& err) {
      slot.error = err.what();
    }
  };

  if (space.method == Method::rp)
    throw ConfigError("lattice_search: the reciprocal rule has no hyperparameters to sweep");

  const int thread_count = std::min(workers, total);
  if (thread_count <= 1) {
    // one operator reused across the sweep: the program (or the Grams) are
    // assembled once and only the hyperparameters move
    if (space.method == Method::l1l1) {
      L1l1Operator op(system, bounds, lp_options);
      for (int flat = 0; flat < total; ++flat) evaluate(flat, &op, nullptr);
    } else {
      TlsOperator op(system, bounds);
      for (int flat = 0; flat < total; ++flat) evaluate(flat, nullptr, &op);
    }
  } else {
    std::atomic<int> cursor{0};
    auto worker_loop = [&]() {
      // each worker owns its operator; the censored program keeps mutable
      // state (patched objective), so sharing one across threads is unsafe
      if (space.method == Method::l1l1) {
        L1l1Operator op(system, bounds, lp_options);
        for (int flat = cursor.fetch_add(1); flat < total; flat = cursor.fetch_add(1))
          evaluate(flat, &op, nullptr);
      } else {
        TlsOperator op(system, bounds);
        for (int flat = cursor.fetch_add(1); flat < total; flat = cursor.fetch_add(1))
          evaluate(flat, nullptr, &op);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(thread_count);
    for (int t = 0; t < thread_count; ++t) pool.emplace_back(worker_loop);
    for (auto& thread : pool) thread.join();
  }

  int solved = 0;
  for (const auto& slot : result.lattice)
    if (slot.solved()) ++solved;
  if (solved == 0) {
    std::string detail = result.lattice.empty() ? "" : result.lattice.front().error;
    throw SolveError("lattice_search: every lattice point failed (first error: " + detail + ")");
  }

  int best = -1;
  for (int flat = 0; flat < total; ++flat)
    if (best < 0 ? (result.lattice[flat].solved() && result.lattice[flat].feasible)
                 : improves_theta(result.lattice[flat], result.lattice[best]))
      best = flat;
  result.feasible_set_empty = best < 0;
  if (best < 0) {
    for (int flat = 0; flat < total; ++flat)
      if (best < 0 ? result.lattice[flat].solved()
                   : improves_gamma(result.lattice[flat], result.lattice[best]))
        best = flat;
  }
  result.best = result.lattice[best];
  return result;
}

}  // namespace steer
