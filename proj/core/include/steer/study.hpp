#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "steer/geometry.hpp"
#include "steer/search.hpp"

namespace steer {

/// Reference activation threshold reported alongside study outputs. Metadata
/// only; no solver consumes it.
inline constexpr double kReferenceActivationAm2 = 3.85;

/// Target request in a study config: either an explicit grid position index,
/// a point snapped to the nearest grid position, or a sweep over every
/// position.
struct TargetDirective {
  std::optional<int> position_index;
  std::optional<Vec3> position;
  bool sweep_all = false;
  Alignment alignment = Alignment::parallel;
  Vec3 direction = Vec3::UnitZ();  // used when alignment == custom
  double magnitude = 1.0;
  std::string id;  // defaults to t<index> when empty
};

struct MethodSpec {
  Method method = Method::rp;
  std::string variant;       // "a" / "b" selects the censored fit preset
  int steps = 8;             // lattice steps per axis for searched methods
  std::optional<SearchSpace> space;  // explicit axis override
};

struct NoisePlan {
  std::vector<double> psnr_db;
  int realizations = 0;
  bool include_noiseless = true;
};

/// Rejects impossible noise plans: negative counts, levels without
/// realizations, non-finite levels, or a plan that yields no cases at all.
void validate_noise_plan(const NoisePlan& plan);

struct StudyConfig {
  LeadModel geometry = LeadModel::contacts8;
  GridResolution resolution = GridResolution::low;
  GridParams grid_params;
  double conductivity_s_m = 0.33;
  std::vector<TargetDirective> targets;
  std::vector<MethodSpec> methods;
  NoisePlan noise;
  double gamma0 = 0.8;
  Bounds bounds;
  std::uint64_t seed = 1;
  double lp_tolerance = 1e-8;
  std::string name = "study";
};

[[nodiscard]] StudyConfig parse_study_config(std::istream& in);
[[nodiscard]] StudyConfig parse_study_config(const std::filesystem::path& path);
[[nodiscard]] std::string study_config_to_json(const StudyConfig& config);

struct StudyRow {
  std::string target_id;
  int target_index = -1;
  std::string alignment;
  std::string method;
  std::string variant;
  std::optional<double> psnr_db;  // empty for the noiseless row
  int realization = -1;           // -1 for the noiseless row
  std::uint64_t seed = 0;
  std::string status = "ok";      // error text for failed solves
  bool feasible = false;
  bool fallback = false;          // search fell back to max Gamma
  double gamma = 0.0;
  double xi = 0.0;
  double theta = 0.0;
  std::string param1_name, param2_name;
  double param1_db = 0.0, param1 = 0.0;
  double param2_db = 0.0, param2 = 0.0;
  int grid_i = -1, grid_j = -1;
  Eigen::VectorXd pattern;        // contact currents, mA
  double runtime_ms = 0.0;        // excluded from the deterministic CSV
};

/// Five number summary with Tukey whiskers: box at [Q1, Q3], whiskers reach
/// the most extreme data inside [Q1 - 1.5 IQR, Q3 + 1.5 IQR], the rest are
/// outliers. Quantiles interpolate linearly between order statistics.
struct BoxStats {
  int count = 0;
  double median = 0.0, q1 = 0.0, q3 = 0.0;
  double whisker_low = 0.0, whisker_high = 0.0;
  std::vector<double> outliers;
};

[[nodiscard]] BoxStats box_stats(std::vector<double> values);
[[nodiscard]] double quantile(const std::vector<double>& sorted_values, double p);

struct StudySummary {
  std::string target_id;
  std::string alignment;
  std::string method;
  std::string variant;
  std::optional<double> psnr_db;
  std::string metric;  // gamma / xi / theta
  BoxStats stats;
};

struct StudyResult {
  StudyConfig config;
  std::vector<StudyRow> rows;
  std::vector<StudySummary> summaries;
  double wall_ms = 0.0;
};

/// Runs the full target x method x realization grid. Rows are computed by a
/// worker pool and written into preassigned slots, so the output is
/// identical for any worker count. Per row failures land in the row status.
[[nodiscard]] StudyResult run_study(const StudyConfig& config, int workers = 1);

/// Deterministic outputs: fixed column order, shortest round-trip decimals.
void emit_rows_csv(const StudyResult& result, std::ostream& out);
void emit_summary_csv(const StudyResult& result, std::ostream& out);
/// Lossless mirror of the rows (including patterns and runtimes).
void emit_json(const StudyResult& result, std::ostream& out);
/// Wall clock and timestamp sidecar; the only place timing appears on disk.
void write_metadata(const StudyResult& result, std::ostream& out);

/// Writes <name>_rows.csv, <name>_summary.csv, <name>.json and
/// <name>_meta.txt into the directory.
void write_study_outputs(const StudyResult& result, const std::filesystem::path& directory);

/// Parses a result back from its JSON mirror (round trip support).
[[nodiscard]] StudyResult parse_study_json(std::istream& in);

}  // namespace steer
