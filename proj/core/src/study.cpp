#include "steer/study.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <thread>

#include "steer/leadfield.hpp"
#include "steer/numeric.hpp"

namespace steer {

void validate_noise_plan(const NoisePlan& plan) {
  if (plan.realizations < 0) throw ConfigError("noise realizations must be >= 0");
  if (!plan.psnr_db.empty() && plan.realizations < 1)
    throw ConfigError("noise levels listed but realizations == 0");
  for (double psnr : plan.psnr_db)
    if (!std::isfinite(psnr)) throw ConfigError("noise psnr must be finite");
  if (plan.psnr_db.empty() && !plan.include_noiseless)
    throw ConfigError("study produces no rows: noiseless disabled and no noise levels");
}

double quantile(const std::vector<double>& sorted_values, double p) {
  if (sorted_values.empty()) throw ConfigError("quantile of an empty sample");
  if (!(p >= 0.0) || !(p <= 1.0))
    throw ConfigError("quantile probability must lie in [0, 1], got " + format_double(p));
  const int n = static_cast<int>(sorted_values.size());
  if (n == 1) return sorted_values.front();
  const double h = p * static_cast<double>(n - 1);
  const int lo = std::min(static_cast<int>(std::floor(h)), n - 2);
  const double frac = h - static_cast<double>(lo);
  return sorted_values[lo] + frac * (sorted_values[lo + 1] - sorted_values[lo]);
}

BoxStats box_stats(std::vector<double> values) {
  BoxStats stats;
  stats.count = static_cast<int>(values.size());
  if (values.empty()) return stats;
  std::sort(values.begin(), values.end());
  stats.median = quantile(values, 0.5);
  stats.q1 = quantile(values, 0.25);
  stats.q3 = quantile(values, 0.75);
  const double iqr = stats.q3 - stats.q1;
  const double fence_low = stats.q1 - 1.5 * iqr;
  const double fence_high = stats.q3 + 1.5 * iqr;
  stats.whisker_low = stats.q3;
  stats.whisker_high = stats.q1;
  bool any_inside = false;
  for (double v : values) {
    if (v < fence_low || v > fence_high) {
      stats.outliers.push_back(v);
      continue;
    }
    if (!any_inside) {
      stats.whisker_low = v;
      stats.whisker_high = v;
      any_inside = true;
    } else {
      stats.whisker_low = std::min(stats.whisker_low, v);
      stats.whisker_high = std::max(stats.whisker_high, v);
    }
  }
  if (!any_inside) {
    // pathological: every point is an outlier (cannot happen with a finite
    // IQR, but keep the summary well defined)
    stats.whisker_low = stats.median;
    stats.whisker_high = stats.median;
  }
  return stats;
}

namespace {

struct ResolvedTarget {
  TargetSpec spec;
  int position_index = -1;
};

Vec3 orientation_for(const TargetDirective& directive) {
  switch (directive.alignment) {
    case Alignment::parallel: return Vec3::UnitZ();
    case Alignment::perpendicular: return Vec3::UnitX();
    case Alignment::custom: {
      const double norm = directive.direction.norm();
      if (!(norm > 0.0))
        throw ConfigError("custom target alignment needs a nonzero direction");
      return directive.direction / norm;
    }
  }
  throw ConfigError("unhandled alignment tag");
}

std::vector<ResolvedTarget> resolve_targets(const StudyConfig& config, const LeadField& field) {
  if (config.targets.empty()) throw ConfigError("study config lists no targets");
  std::vector<ResolvedTarget> resolved;
  for (std::size_t d = 0; d < config.targets.size(); ++d) {
    const TargetDirective& directive = config.targets[d];
    std::vector<int> indices;
    if (directive.sweep_all) {
      indices.resize(field.position_count());
      for (int p = 0; p < field.position_count(); ++p) indices[p] = p;
    } else if (directive.position_index.has_value()) {
      const int p = *directive.position_index;
      if (p < 0 || p >= field.position_count())
        throw ConfigError("target directive " + std::to_string(d) + ": position index " +
                          std::to_string(p) + " outside the grid (" +
                          std::to_string(field.position_count()) + " positions)");
      indices.push_back(p);
    } else if (directive.position.has_value()) {
      indices.push_back(nearest_position(field.grid, *directive.position));
    } else {
      throw ConfigError("target directive " + std::to_string(d) +
                        ": needs position, position_index or sweep_all");
    }
    const Vec3 orientation = orientation_for(directive);
    for (int p : indices) {
      ResolvedTarget target;
      target.position_index = p;
      target.spec.position = field.grid.positions[p];
      target.spec.orientation = orientation;
      target.spec.alignment = directive.alignment;
      target.spec.magnitude = directive.magnitude;
      if (directive.id.empty())
        target.spec.id = "t" + std::to_string(resolved.size());
      else if (directive.sweep_all)
        target.spec.id = directive.id + "_p" + std::to_string(p);
      else
        target.spec.id = directive.id;
      validate_target(target.spec);
      resolved.push_back(std::move(target));
    }
  }
  return resolved;
}

struct NoiseCase {
  std::optional<double> psnr_db;
  int realization = -1;        // index within its PSNR group, -1 = noiseless
  std::uint64_t counter = 0;   // realization_index handed to the noise draw
};

std::vector<NoiseCase> build_cases(const NoisePlan& plan) {
  validate_noise_plan(plan);
  std::vector<NoiseCase> cases;
  if (plan.include_noiseless) cases.push_back(NoiseCase{});
  for (std::size_t pi = 0; pi < plan.psnr_db.size(); ++pi)
    for (int k = 0; k < plan.realizations; ++k)
      cases.push_back(NoiseCase{plan.psnr_db[pi], k,
                                static_cast<std::uint64_t>(pi) *
                                        static_cast<std::uint64_t>(plan.realizations) +
                                    static_cast<std::uint64_t>(k)});
  return cases;
}

SearchPreset preset_for(const MethodSpec& spec) {
  if (spec.method == Method::tls) return SearchPreset::tls_default;
  if (spec.variant == "a") return SearchPreset::l1l1_a;
  if (spec.variant == "b") return SearchPreset::l1l1_b;
  throw ConfigError("censored fit method needs variant 'a' or 'b', got '" + spec.variant + "'");
}

void fill_outcome(StudyRow& row, const SolveOutcome& outcome) {
  row.gamma = outcome.metrics.gamma;
  row.xi = outcome.metrics.xi;
  row.theta = outcome.metrics.theta;
  row.pattern = outcome.pattern.currents();
}

}  // namespace

StudyResult run_study(const StudyConfig& config, int workers) {
  const auto wall_start = std::chrono::steady_clock::now();
  if (workers < 1) throw ConfigError("run_study: workers must be >= 1");
  if (config.methods.empty()) throw ConfigError("study config lists no methods");
  if (!(config.lp_tolerance > 0.0)) throw ConfigError("lp_tolerance must be positive");
  if (!std::isfinite(config.gamma0)) throw ConfigError("gamma0 must be finite");

  const ContactArray contacts = build_geometry(config.geometry);
  const DofGrid grid = make_grid(config.resolution, config.grid_params);
  const LeadField field = synthesize_leadfield(contacts, grid, config.conductivity_s_m);

  const std::vector<ResolvedTarget> targets = resolve_targets(config, field);
  const std::vector<NoiseCase> cases = build_cases(config.noise);

  const int n_targets = static_cast<int>(targets.size());
  const int n_methods = static_cast<int>(config.methods.size());
  const int n_cases = static_cast<int>(cases.size());

  StudyResult result;
  result.config = config;
  result.rows.resize(static_cast<std::size_t>(n_targets) * n_methods * n_cases);

  LpOptions lp_options;
  lp_options.tolerance = config.lp_tolerance;

  // one work unit = one (target, noise case) pair; every method then sees
  // the same perturbed field, and each unit writes preassigned row slots
  auto process_unit = [&](int unit) {
    const int t = unit / n_cases;
    const int c = unit % n_cases;
    const ResolvedTarget& target = targets[t];
    const NoiseCase& ncase = cases[c];
    const std::uint64_t target_seed = mix_seed(config.seed, static_cast<std::uint64_t>(t));

    const LeadField* active = &field;
    LeadField noisy;
    std::uint64_t row_seed = config.seed;
    if (ncase.psnr_db.has_value()) {
      NoiseSpec spec;
      spec.psnr_db = *ncase.psnr_db;
      spec.seed = target_seed;
      spec.realization_index = ncase.counter;
      noisy = add_noise(field, spec);
      active = &noisy;
      row_seed = target_seed;
    }

    ReducedSystem system;
    std::string reduce_error;
    try {
      system = reduce_system(*active, target.spec);
    } catch (const std::exception& err) {
      reduce_error = err.what();
    }

    for (int m = 0; m < n_methods; ++m) {
      const MethodSpec& mspec = config.methods[m];
      StudyRow& row =
          result.rows[(static_cast<std::size_t>(t) * n_methods + m) * n_cases + c];
      row.target_id = target.spec.id;
      row.target_index = target.position_index;
      row.alignment = to_string(target.spec.alignment);
      row.method = to_string(mspec.method);
      row.variant = mspec.method == Method::l1l1 ? mspec.variant : "";
      row.psnr_db = ncase.psnr_db;
      row.realization = ncase.realization;
      row.seed = row_seed;
      if (!reduce_error.empty()) {
        row.status = reduce_error;
        continue;
      }
      const auto t0 = std::chrono::steady_clock::now();
      try {
        if (mspec.method == Method::rp) {
          SolveOutcome outcome = solve_rp(system, config.bounds);
          fill_outcome(row, outcome);
          row.feasible = outcome.metrics.gamma >= config.gamma0;
        } else {
          const SearchSpace space = mspec.space.has_value()
                                        ? *mspec.space
                                        : make_search_space(preset_for(mspec), mspec.steps);
          SearchResult search =
              lattice_search(system, space, config.gamma0, config.bounds, 1, lp_options);
          const CandidateSolution& best = search.best;
          fill_outcome(row, *best.outcome);
          row.feasible = best.feasible;
          row.fallback = search.feasible_set_empty;
          row.param1_name = space.param1.name;
          row.param2_name = space.param2.name;
          row.param1_db = space.param1.value_db(best.i);
          row.param1 = space.param1.value(best.i);
          row.param2_db = space.param2.value_db(best.j);
          row.param2 = space.param2.value(best.j);
          row.grid_i = best.i;
          row.grid_j = best.j;
        }
      } catch (const std::exception& err) {
        row.status = err.what();
      }
      row.runtime_ms =
          std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
              .count();
    }
  };

  const int total_units = n_targets * n_cases;
  const int pool_size = std::min(workers, total_units);
  if (pool_size <= 1) {
    for (int unit = 0; unit < total_units; ++unit) process_unit(unit);
  } else {
    std::atomic<int> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(pool_size);
    for (int w = 0; w < pool_size; ++w)
      pool.emplace_back([&]() {
        for (int unit = cursor.fetch_add(1); unit < total_units;
             unit = cursor.fetch_add(1))
          process_unit(unit);
      });
    for (auto& thread : pool) thread.join();
  }

  // summaries group rows by (target, alignment, method, variant, psnr) in
  // row order; failed rows are excluded from the statistics
  struct GroupKey {
    std::string target_id, alignment, method, variant;
    std::optional<double> psnr_db;
    bool operator==(const GroupKey& other) const {
      return target_id == other.target_id && alignment == other.alignment &&
             method == other.method && variant == other.variant && psnr_db == other.psnr_db;
    }
  };
  std::vector<GroupKey> keys;
  std::vector<std::array<std::vector<double>, 3>> samples;
  for (const StudyRow& row : result.rows) {
    GroupKey key{row.target_id, row.alignment, row.method, row.variant, row.psnr_db};
    std::size_t g = 0;
    while (g < keys.size() && !(keys[g] == key)) ++g;
    if (g == keys.size()) {
      keys.push_back(key);
      samples.emplace_back();
    }
    if (row.status != "ok") continue;
    samples[g][0].push_back(row.gamma);
    samples[g][1].push_back(row.xi);
    samples[g][2].push_back(row.theta);
  }
  const char* metric_names[3] = {"gamma", "xi", "theta"};
  for (std::size_t g = 0; g < keys.size(); ++g)
    for (int metric = 0; metric < 3; ++metric) {
      StudySummary summary;
      summary.target_id = keys[g].target_id;
      summary.alignment = keys[g].alignment;
      summary.method = keys[g].method;
      summary.variant = keys[g].variant;
      summary.psnr_db = keys[g].psnr_db;
      summary.metric = metric_names[metric];
      summary.stats = box_stats(samples[g][metric]);
      result.summaries.push_back(std::move(summary));
    }

  result.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - wall_start)
          .count();
  return result;
}

}  // namespace steer
