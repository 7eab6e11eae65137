#include "steer/study.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "steer/numeric.hpp"

namespace steer {

namespace {

using nlohmann::json;

void check_keys(const json& object, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (auto it = object.begin(); it != object.end(); ++it) {
    bool known = false;
    for (const char* key : allowed)
      if (it.key() == key) {
        known = true;
        break;
      }
    if (!known) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const json& object, const char* key, double fallback,
                  const std::string& where) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return value.get<double>();
}

int get_int(const json& object, const char* key, int fallback, const std::string& where) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  return value.get<int>();
}

bool get_bool(const json& object, const char* key, bool fallback, const std::string& where) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_boolean()) throw ConfigError(where + "." + key + " must be a boolean");
  return value.get<bool>();
}

std::string get_string(const json& object, const char* key, const std::string& fallback,
                       const std::string& where) {
  if (!object.contains(key)) return fallback;
  const json& value = object.at(key);
  if (!value.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return value.get<std::string>();
}

Vec3 get_vec3(const json& value, const std::string& where) {
  if (!value.is_array() || value.size() != 3)
    throw ConfigError(where + " must be an array of 3 numbers");
  Vec3 out;
  for (int c = 0; c < 3; ++c) {
    if (!value[c].is_number()) throw ConfigError(where + "[" + std::to_string(c) + "] must be a number");
    out[c] = value[c].get<double>();
  }
  return out;
}

Alignment alignment_from_string(const std::string& tag, const std::string& where) {
  if (tag == "parallel") return Alignment::parallel;
  if (tag == "perpendicular") return Alignment::perpendicular;
  if (tag == "custom") return Alignment::custom;
  throw ConfigError(where + ": unknown alignment '" + tag +
                    "' (expected parallel, perpendicular or custom)");
}

AxisSpec axis_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) throw ConfigError(where + " must be an object");
  check_keys(value, {"name", "min_db", "max_db", "steps"}, where);
  AxisSpec axis;
  axis.name = get_string(value, "name", "", where);
  if (!value.contains("min_db") || !value.contains("max_db"))
    throw ConfigError(where + " needs min_db and max_db");
  axis.min_db = get_number(value, "min_db", 0.0, where);
  axis.max_db = get_number(value, "max_db", 0.0, where);
  axis.steps = get_int(value, "steps", 8, where);
  if (axis.steps < 1) throw ConfigError(where + ".steps must be >= 1");
  return axis;
}

json axis_to_json(const AxisSpec& axis) {
  return json{{"name", axis.name},
              {"min_db", axis.min_db},
              {"max_db", axis.max_db},
              {"steps", axis.steps}};
}

TargetDirective target_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) throw ConfigError(where + " must be an object");
  check_keys(value,
             {"position_index", "position", "sweep_all", "alignment", "direction", "magnitude",
              "id"},
             where);
  TargetDirective directive;
  int selectors = 0;
  if (value.contains("position_index")) {
    directive.position_index = get_int(value, "position_index", 0, where);
    ++selectors;
  }
  if (value.contains("position")) {
    directive.position = get_vec3(value.at("position"), where + ".position");
    ++selectors;
  }
  if (value.contains("sweep_all")) {
    directive.sweep_all = get_bool(value, "sweep_all", false, where);
    if (directive.sweep_all) ++selectors;
  }
  if (selectors != 1)
    throw ConfigError(where + ": exactly one of position_index, position or sweep_all");
  directive.alignment =
      alignment_from_string(get_string(value, "alignment", "parallel", where), where);
  if (value.contains("direction"))
    directive.direction = get_vec3(value.at("direction"), where + ".direction");
  else if (directive.alignment == Alignment::custom)
    throw ConfigError(where + ": custom alignment needs a direction");
  directive.magnitude = get_number(value, "magnitude", 1.0, where);
  directive.id = get_string(value, "id", "", where);
  return directive;
}

json target_to_json(const TargetDirective& directive) {
  json value = json::object();
  if (directive.position_index.has_value()) value["position_index"] = *directive.position_index;
  if (directive.position.has_value())
    value["position"] = {(*directive.position)[0], (*directive.position)[1],
                         (*directive.position)[2]};
  if (directive.sweep_all) value["sweep_all"] = true;
  value["alignment"] = to_string(directive.alignment);
  if (directive.alignment == Alignment::custom)
    value["direction"] = {directive.direction[0], directive.direction[1],
                          directive.direction[2]};
  value["magnitude"] = directive.magnitude;
  if (!directive.id.empty()) value["id"] = directive.id;
  return value;
}

MethodSpec method_from_json(const json& value, const std::string& where) {
  if (!value.is_object()) throw ConfigError(where + " must be an object");
  check_keys(value, {"method", "variant", "steps", "space"}, where);
  MethodSpec spec;
  spec.method = method_from_string(get_string(value, "method", "", where));
  spec.variant = get_string(value, "variant", "", where);
  spec.steps = get_int(value, "steps", 8, where);
  if (spec.steps < 1) throw ConfigError(where + ".steps must be >= 1");
  if (value.contains("space")) {
    const json& space = value.at("space");
    if (!space.is_object()) throw ConfigError(where + ".space must be an object");
    check_keys(space, {"param1", "param2"}, where + ".space");
    SearchSpace parsed;
    parsed.method = spec.method;
    parsed.variant = spec.variant;
    parsed.param1 = axis_from_json(space.at("param1"), where + ".space.param1");
    parsed.param2 = axis_from_json(space.at("param2"), where + ".space.param2");
    spec.space = parsed;
  }
  if (spec.method == Method::l1l1 && !spec.space.has_value() && spec.variant != "a" &&
      spec.variant != "b")
    throw ConfigError(where + ": censored fit needs variant 'a' or 'b'");
  return spec;
}

json method_to_json(const MethodSpec& spec) {
  json value = json::object();
  value["method"] = to_string(spec.method);
  if (!spec.variant.empty()) value["variant"] = spec.variant;
  if (spec.method != Method::rp) value["steps"] = spec.steps;
  if (spec.space.has_value())
    value["space"] = json{{"param1", axis_to_json(spec.space->param1)},
                          {"param2", axis_to_json(spec.space->param2)}};
  return value;
}

StudyConfig config_from_json(const json& root) {
  if (!root.is_object()) throw ConfigError("study config must be a JSON object");
  check_keys(root,
             {"name", "geometry", "grid", "conductivity_s_m", "targets", "methods", "noise",
              "gamma0", "bounds", "seed", "lp_tolerance"},
             "config");
  StudyConfig config;
  config.name = get_string(root, "name", "study", "config");
  config.geometry = lead_model_from_string(get_string(root, "geometry", "contacts8", "config"));
  if (root.contains("grid")) {
    const json& grid = root.at("grid");
    if (!grid.is_object()) throw ConfigError("config.grid must be an object");
    check_keys(grid, {"resolution", "spacing_mm", "radius_mm"}, "config.grid");
    const std::string resolution = get_string(grid, "resolution", "low", "config.grid");
    if (resolution == "low")
      config.resolution = GridResolution::low;
    else if (resolution == "high")
      config.resolution = GridResolution::high;
    else
      throw ConfigError("config.grid.resolution must be low or high, got '" + resolution + "'");
    config.grid_params.spacing_mm =
        get_number(grid, "spacing_mm", config.grid_params.spacing_mm, "config.grid");
    config.grid_params.radius_mm =
        get_number(grid, "radius_mm", config.grid_params.radius_mm, "config.grid");
  }
  config.conductivity_s_m =
      get_number(root, "conductivity_s_m", config.conductivity_s_m, "config");
  if (!root.contains("targets") || !root.at("targets").is_array() ||
      root.at("targets").empty())
    throw ConfigError("config.targets must be a non-empty array");
  for (std::size_t i = 0; i < root.at("targets").size(); ++i)
    config.targets.push_back(
        target_from_json(root.at("targets")[i], "config.targets[" + std::to_string(i) + "]"));
  if (!root.contains("methods") || !root.at("methods").is_array() ||
      root.at("methods").empty())
    throw ConfigError("config.methods must be a non-empty array");
  for (std::size_t i = 0; i < root.at("methods").size(); ++i)
    config.methods.push_back(
        method_from_json(root.at("methods")[i], "config.methods[" + std::to_string(i) + "]"));
  if (root.contains("noise")) {
    const json& noise = root.at("noise");
    if (!noise.is_object()) throw ConfigError("config.noise must be an object");
    check_keys(noise, {"psnr_db", "realizations", "include_noiseless"}, "config.noise");
    if (noise.contains("psnr_db")) {
      if (!noise.at("psnr_db").is_array())
        throw ConfigError("config.noise.psnr_db must be an array");
      for (const json& level : noise.at("psnr_db")) {
        if (!level.is_number()) throw ConfigError("config.noise.psnr_db entries must be numbers");
        config.noise.psnr_db.push_back(level.get<double>());
      }
    }
    config.noise.realizations = get_int(noise, "realizations", 0, "config.noise");
    config.noise.include_noiseless =
        get_bool(noise, "include_noiseless", true, "config.noise");
  }
  validate_noise_plan(config.noise);
  config.gamma0 = get_number(root, "gamma0", config.gamma0, "config");
  if (root.contains("bounds")) {
    const json& bounds = root.at("bounds");
    if (!bounds.is_object()) throw ConfigError("config.bounds must be an object");
    check_keys(bounds, {"per_contact_ma", "total_budget_ma"}, "config.bounds");
    config.bounds.per_contact_ma =
        get_number(bounds, "per_contact_ma", config.bounds.per_contact_ma, "config.bounds");
    config.bounds.total_budget_ma =
        get_number(bounds, "total_budget_ma", config.bounds.total_budget_ma, "config.bounds");
  }
  if (root.contains("seed")) {
    const json& seed = root.at("seed");
    if (!seed.is_number_unsigned() && !seed.is_number_integer())
      throw ConfigError("config.seed must be an integer");
    config.seed = seed.get<std::uint64_t>();
  }
  config.lp_tolerance = get_number(root, "lp_tolerance", config.lp_tolerance, "config");
  if (!(config.lp_tolerance > 0.0)) throw ConfigError("config.lp_tolerance must be positive");
  return config;
}

json config_to_json_object(const StudyConfig& config) {
  json root;
  root["name"] = config.name;
  root["geometry"] = to_string(config.geometry);
  root["grid"] = json{{"resolution", config.resolution == GridResolution::low ? "low" : "high"},
                      {"spacing_mm", config.grid_params.spacing_mm},
                      {"radius_mm", config.grid_params.radius_mm}};
  root["conductivity_s_m"] = config.conductivity_s_m;
  root["targets"] = json::array();
  for (const TargetDirective& directive : config.targets)
    root["targets"].push_back(target_to_json(directive));
  root["methods"] = json::array();
  for (const MethodSpec& spec : config.methods) root["methods"].push_back(method_to_json(spec));
  root["noise"] = json{{"psnr_db", config.noise.psnr_db},
                       {"realizations", config.noise.realizations},
                       {"include_noiseless", config.noise.include_noiseless}};
  root["gamma0"] = config.gamma0;
  root["bounds"] = json{{"per_contact_ma", config.bounds.per_contact_ma},
                        {"total_budget_ma", config.bounds.total_budget_ma}};
  root["seed"] = config.seed;
  root["lp_tolerance"] = config.lp_tolerance;
  return root;
}

/// CSV field quoting per RFC 4180: quote when a comma, quote or newline is
/// present, doubling embedded quotes.
std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string quoted = "\"";
  for (char c : field) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  quoted += '"';
  return quoted;
}

std::string join_doubles(const Eigen::VectorXd& values) {
  std::string joined;
  for (int i = 0; i < values.size(); ++i) {
    if (i) joined += ';';
    joined += format_double(values[i]);
  }
  return joined;
}

std::string join_doubles(const std::vector<double>& values) {
  std::string joined;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) joined += ';';
    joined += format_double(values[i]);
  }
  return joined;
}

double number_or_nan(const json& value) {
  return value.is_number() ? value.get<double>()
                           : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace

StudyConfig parse_study_config(std::istream& in) {
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& err) {
    throw ParseError(std::string("study config is not valid JSON: ") + err.what());
  }
  return config_from_json(root);
}

StudyConfig parse_study_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open study config '" + path.string() + "'");
  try {
    return parse_study_config(in);
  } catch (const Error& err) {
    throw ConfigError(path.string() + ": " + err.what());
  }
}

std::string study_config_to_json(const StudyConfig& config) {
  return config_to_json_object(config).dump(2);
}

void emit_rows_csv(const StudyResult& result, std::ostream& out) {
  out << "target_id,target_index,alignment,method,variant,psnr_db,realization,seed,status,"
         "feasible,fallback,gamma,xi,theta,param1_name,param1_db,param1,param2_name,"
         "param2_db,param2,grid_i,grid_j,pattern_ma\n";
  for (const StudyRow& row : result.rows) {
    out << csv_escape(row.target_id) << ',' << row.target_index << ','
        << csv_escape(row.alignment) << ',' << csv_escape(row.method) << ','
        << csv_escape(row.variant) << ','
        << (row.psnr_db.has_value() ? format_double(*row.psnr_db) : std::string()) << ','
        << row.realization << ',' << row.seed << ',' << csv_escape(row.status) << ','
        << (row.feasible ? '1' : '0') << ',' << (row.fallback ? '1' : '0') << ','
        << format_double(row.gamma) << ',' << format_double(row.xi) << ','
        << format_double(row.theta) << ',' << csv_escape(row.param1_name) << ','
        << format_double(row.param1_db) << ',' << format_double(row.param1) << ','
        << csv_escape(row.param2_name) << ',' << format_double(row.param2_db) << ','
        << format_double(row.param2) << ',' << row.grid_i << ',' << row.grid_j << ','
        << join_doubles(row.pattern) << '\n';
  }
}

void emit_summary_csv(const StudyResult& result, std::ostream& out) {
  out << "target_id,alignment,method,variant,psnr_db,metric,count,median,q1,q3,"
         "whisker_low,whisker_high,outliers\n";
  for (const StudySummary& summary : result.summaries) {
    out << csv_escape(summary.target_id) << ',' << csv_escape(summary.alignment) << ','
        << csv_escape(summary.method) << ',' << csv_escape(summary.variant) << ','
        << (summary.psnr_db.has_value() ? format_double(*summary.psnr_db) : std::string())
        << ',' << summary.metric << ',' << summary.stats.count << ','
        << format_double(summary.stats.median) << ',' << format_double(summary.stats.q1) << ','
        << format_double(summary.stats.q3) << ',' << format_double(summary.stats.whisker_low)
        << ',' << format_double(summary.stats.whisker_high) << ','
        << join_doubles(summary.stats.outliers) << '\n';
  }
}

void emit_json(const StudyResult& result, std::ostream& out) {
  json root;
  root["config"] = config_to_json_object(result.config);
  root["reference_activation_a_m2"] = kReferenceActivationAm2;
  root["wall_ms"] = result.wall_ms;
  root["rows"] = json::array();
  for (const StudyRow& row : result.rows) {
    json entry;
    entry["target_id"] = row.target_id;
    entry["target_index"] = row.target_index;
    entry["alignment"] = row.alignment;
    entry["method"] = row.method;
    entry["variant"] = row.variant;
    if (row.psnr_db.has_value()) entry["psnr_db"] = *row.psnr_db;
    entry["realization"] = row.realization;
    entry["seed"] = row.seed;
    entry["status"] = row.status;
    entry["feasible"] = row.feasible;
    entry["fallback"] = row.fallback;
    entry["gamma"] = row.gamma;
    entry["xi"] = row.xi;
    entry["theta"] = row.theta;
    entry["param1_name"] = row.param1_name;
    entry["param1_db"] = row.param1_db;
    entry["param1"] = row.param1;
    entry["param2_name"] = row.param2_name;
    entry["param2_db"] = row.param2_db;
    entry["param2"] = row.param2;
    entry["grid_i"] = row.grid_i;
    entry["grid_j"] = row.grid_j;
    entry["pattern_ma"] = std::vector<double>(row.pattern.data(),
                                              row.pattern.data() + row.pattern.size());
    entry["runtime_ms"] = row.runtime_ms;
    root["rows"].push_back(std::move(entry));
  }
  root["summaries"] = json::array();
  for (const StudySummary& summary : result.summaries) {
    json entry;
    entry["target_id"] = summary.target_id;
    entry["alignment"] = summary.alignment;
    entry["method"] = summary.method;
    entry["variant"] = summary.variant;
    if (summary.psnr_db.has_value()) entry["psnr_db"] = *summary.psnr_db;
    entry["metric"] = summary.metric;
    entry["count"] = summary.stats.count;
    entry["median"] = summary.stats.median;
    entry["q1"] = summary.stats.q1;
    entry["q3"] = summary.stats.q3;
    entry["whisker_low"] = summary.stats.whisker_low;
    entry["whisker_high"] = summary.stats.whisker_high;
    entry["outliers"] = summary.stats.outliers;
    root["summaries"].push_back(std::move(entry));
  }
  out << root.dump(2) << '\n';
}

void write_metadata(const StudyResult& result, std::ostream& out) {
  const auto now = std::chrono::system_clock::now();
  const std::time_t stamp = std::chrono::system_clock::to_time_t(now);
  char text[32] = {0};
  std::strftime(text, sizeof(text), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&stamp));
  out << "study " << result.config.name << '\n'
      << "generated " << text << '\n'
      << "wall_ms " << format_double(result.wall_ms) << '\n'
      << "rows " << result.rows.size() << '\n'
      << "summaries " << result.summaries.size() << '\n'
      << "reference_activation_a_m2 " << format_double(kReferenceActivationAm2) << '\n';
}

void write_study_outputs(const StudyResult& result, const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw IoError("cannot create output directory '" + directory.string() + "': " +
                        ec.message());
  auto open = [&](const std::string& filename) {
    std::ofstream out(directory / filename, std::ios::binary);
    if (!out)
      throw IoError("cannot open '" + (directory / filename).string() + "' for writing");
    return out;
  };
  {
    auto out = open(result.config.name + "_rows.csv");
    emit_rows_csv(result, out);
  }
  {
    auto out = open(result.config.name + "_summary.csv");
    emit_summary_csv(result, out);
  }
  {
    auto out = open(result.config.name + ".json");
    emit_json(result, out);
  }
  {
    auto out = open(result.config.name + "_meta.txt");
    write_metadata(result, out);
  }
}

StudyResult parse_study_json(std::istream& in) {
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& err) {
    throw ParseError(std::string("study result is not valid JSON: ") + err.what());
  }
  if (!root.is_object() || !root.contains("config") || !root.contains("rows"))
    throw ParseError("study result JSON needs config and rows");
  StudyResult result;
  result.config = config_from_json(root.at("config"));
  result.wall_ms = get_number(root, "wall_ms", 0.0, "result");
  for (const json& entry : root.at("rows")) {
    StudyRow row;
    row.target_id = get_string(entry, "target_id", "", "row");
    row.target_index = get_int(entry, "target_index", -1, "row");
    row.alignment = get_string(entry, "alignment", "", "row");
    row.method = get_string(entry, "method", "", "row");
    row.variant = get_string(entry, "variant", "", "row");
    if (entry.contains("psnr_db")) row.psnr_db = number_or_nan(entry.at("psnr_db"));
    row.realization = get_int(entry, "realization", -1, "row");
    if (entry.contains("seed")) row.seed = entry.at("seed").get<std::uint64_t>();
    row.status = get_string(entry, "status", "ok", "row");
    row.feasible = get_bool(entry, "feasible", false, "row");
    row.fallback = get_bool(entry, "fallback", false, "row");
    row.gamma = number_or_nan(entry.value("gamma", json(0.0)));
    row.xi = number_or_nan(entry.value("xi", json(0.0)));
    row.theta = number_or_nan(entry.value("theta", json(0.0)));
    row.param1_name = get_string(entry, "param1_name", "", "row");
    row.param1_db = get_number(entry, "param1_db", 0.0, "row");
    row.param1 = get_number(entry, "param1", 0.0, "row");
    row.param2_name = get_string(entry, "param2_name", "", "row");
    row.param2_db = get_number(entry, "param2_db", 0.0, "row");
    row.param2 = get_number(entry, "param2", 0.0, "row");
    row.grid_i = get_int(entry, "grid_i", -1, "row");
    row.grid_j = get_int(entry, "grid_j", -1, "row");
    if (entry.contains("pattern_ma")) {
      const json& pattern = entry.at("pattern_ma");
      row.pattern.resize(static_cast<Eigen::Index>(pattern.size()));
      for (std::size_t i = 0; i < pattern.size(); ++i)
        row.pattern[static_cast<Eigen::Index>(i)] = number_or_nan(pattern[i]);
    }
    row.runtime_ms = get_number(entry, "runtime_ms", 0.0, "row");
    result.rows.push_back(std::move(row));
  }
  if (root.contains("summaries")) {
    for (const json& entry : root.at("summaries")) {
      StudySummary summary;
      summary.target_id = get_string(entry, "target_id", "", "summary");
      summary.alignment = get_string(entry, "alignment", "", "summary");
      summary.method = get_string(entry, "method", "", "summary");
      summary.variant = get_string(entry, "variant", "", "summary");
      if (entry.contains("psnr_db")) summary.psnr_db = number_or_nan(entry.at("psnr_db"));
      summary.metric = get_string(entry, "metric", "", "summary");
      summary.stats.count = get_int(entry, "count", 0, "summary");
      summary.stats.median = get_number(entry, "median", 0.0, "summary");
      summary.stats.q1 = get_number(entry, "q1", 0.0, "summary");
      summary.stats.q3 = get_number(entry, "q3", 0.0, "summary");
      summary.stats.whisker_low = get_number(entry, "whisker_low", 0.0, "summary");
      summary.stats.whisker_high = get_number(entry, "whisker_high", 0.0, "summary");
      if (entry.contains("outliers"))
        for (const json& value : entry.at("outliers"))
          summary.stats.outliers.push_back(number_or_nan(value));
      result.summaries.push_back(std::move(summary));
    }
  }
  return result;
}

}  // namespace steer
