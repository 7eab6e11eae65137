// Command line front end: scene construction, single solves, lattice
// searches, full study runs and attenuation-set reports.

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "steer/leadfield_io.hpp"
#include "steer/lp.hpp"
#include "steer/numeric.hpp"
#include "steer/search.hpp"
#include "steer/study.hpp"

namespace {

using nlohmann::json;

/// Options shared by every subcommand that assembles a synthetic scene.
struct SceneOptions {
  std::string geometry = "contacts8";
  std::string resolution = "low";
  double spacing_mm = 0.63;
  double radius_mm = 6.0;
  double conductivity = 0.33;
  int target_index = -1;  // -1 selects the position with the strongest field
  std::string alignment = "parallel";
  std::vector<double> direction{0.0, 0.0, 1.0};
  double magnitude = 1.0;
  double psnr_db = 0.0;
  bool noisy = false;
  std::uint64_t seed = 1;
  std::uint64_t realization = 0;
};

void add_scene_flags(CLI::App* cmd, SceneOptions& scene) {
  cmd->add_option("--geometry", scene.geometry, "Lead model: contacts8 or contacts40")
      ->check(CLI::IsMember({"contacts8", "contacts40"}));
  cmd->add_option("--resolution", scene.resolution, "Grid resolution: low or high")
      ->check(CLI::IsMember({"low", "high"}));
  cmd->add_option("--spacing-mm", scene.spacing_mm, "High resolution lattice pitch (mm)");
  cmd->add_option("--radius-mm", scene.radius_mm, "High resolution sphere radius (mm)");
  cmd->add_option("--conductivity", scene.conductivity, "Medium conductivity (S/m, metadata)");
  cmd->add_option("--target-index", scene.target_index,
                  "Grid position index of the target; -1 picks the position with the "
                  "strongest field response");
  cmd->add_option("--alignment", scene.alignment,
                  "Target dipole alignment: parallel, perpendicular or custom")
      ->check(CLI::IsMember({"parallel", "perpendicular", "custom"}));
  cmd->add_option("--direction", scene.direction,
                  "Dipole direction for custom alignment (3 numbers)")
      ->expected(3);
  cmd->add_option("--magnitude", scene.magnitude, "Wanted current density (A/m^2)");
  cmd->add_option("--psnr-db", scene.psnr_db,
                  "Corrupt the field with Gaussian noise at this PSNR");
  cmd->add_option("--seed", scene.seed, "Noise seed");
  cmd->add_option("--realization", scene.realization, "Noise realization index");
}

steer::LeadField build_scene_field(const SceneOptions& scene, bool apply_noise) {
  const steer::ContactArray contacts =
      steer::build_geometry(steer::lead_model_from_string(scene.geometry));
  steer::GridParams params;
  params.spacing_mm = scene.spacing_mm;
  params.radius_mm = scene.radius_mm;
  const steer::DofGrid grid = steer::make_grid(
      scene.resolution == "low" ? steer::GridResolution::low : steer::GridResolution::high,
      params);
  steer::LeadField field = steer::synthesize_leadfield(contacts, grid, scene.conductivity);
  if (apply_noise && scene.noisy) {
    steer::NoiseSpec spec;
    spec.psnr_db = scene.psnr_db;
    spec.seed = scene.seed;
    spec.realization_index = scene.realization;
    field = steer::add_noise(field, spec);
  }
  return field;
}

steer::TargetSpec pick_target(const steer::LeadField& field, const SceneOptions& scene,
                              int* position_index) {
  int index = scene.target_index;
  if (index < 0) {
    const steer::AttenuationSet strongest = steer::attenuation_set(field, 1.0);
    index = strongest.member_positions.front();
  }
  if (index >= field.position_count())
    throw steer::ConfigError("target index " + std::to_string(index) + " outside the grid (" +
                             std::to_string(field.position_count()) + " positions)");
  steer::TargetSpec target;
  target.position = field.grid.positions[index];
  if (scene.alignment == "parallel") {
    target.alignment = steer::Alignment::parallel;
    target.orientation = steer::Vec3::UnitZ();
  } else if (scene.alignment == "perpendicular") {
    target.alignment = steer::Alignment::perpendicular;
    target.orientation = steer::Vec3::UnitX();
  } else {
    target.alignment = steer::Alignment::custom;
    steer::Vec3 direction(scene.direction[0], scene.direction[1], scene.direction[2]);
    const double norm = direction.norm();
    if (!(norm > 0.0)) throw steer::ConfigError("--direction must be nonzero");
    target.orientation = direction / norm;
  }
  target.magnitude = scene.magnitude;
  target.id = "cli";
  if (position_index) *position_index = index;
  return target;
}

std::ostream& open_sink(const std::string& path, std::ofstream& file) {
  if (path.empty()) return std::cout;
  file.open(path, std::ios::binary);
  if (!file) throw steer::IoError("cannot open '" + path + "' for writing");
  return file;
}

json outcome_to_json(const steer::SolveOutcome& outcome, const steer::LeadField& field,
                     int position_index) {
  json entry;
  entry["method"] = steer::to_string(outcome.method);
  entry["target_index"] = position_index;
  entry["gamma"] = outcome.metrics.gamma;
  entry["xi"] = outcome.metrics.xi;
  entry["theta"] = outcome.metrics.theta;
  entry["hyperparameters"] = outcome.hyperparameters;
  json pattern = json::object();
  for (int l = 0; l < outcome.pattern.contact_count(); ++l)
    pattern[field.contacts.contacts[l].label] = outcome.pattern.currents()[l];
  entry["pattern_ma"] = pattern;
  entry["iterations"] = outcome.diagnostics.iterations;
  entry["note"] = outcome.diagnostics.note;
  return entry;
}

void print_outcome(std::ostream& out, const steer::SolveOutcome& outcome,
                   const steer::LeadField& field, int position_index) {
  const steer::Vec3 p = field.grid.positions[position_index];
  out << "method    " << steer::to_string(outcome.method) << "\n"
      << "target    position " << position_index << " (" << p.x() << ", " << p.y() << ", "
      << p.z() << ") mm\n";
  if (outcome.method == steer::Method::rp) {
    const int anode = static_cast<int>(outcome.hyperparameters.at("anode"));
    const int cathode = static_cast<int>(outcome.hyperparameters.at("cathode"));
    out << "anode     " << field.contacts.contacts[anode].label << "\n"
        << "cathode   " << field.contacts.contacts[cathode].label << "\n";
  }
  for (const auto& [key, value] : outcome.hyperparameters)
    if (key != "anode" && key != "cathode")
      out << "param     " << key << " = " << steer::format_double(value) << "\n";
  out << "gamma     " << steer::format_double(outcome.metrics.gamma) << " A/m^2\n"
      << "xi        " << steer::format_double(outcome.metrics.xi) << " A/m^2\n"
      << "theta     " << steer::format_double(outcome.metrics.theta) << "\n"
      << "pattern (mA)\n";
  for (int l = 0; l < outcome.pattern.contact_count(); ++l)
    out << "  " << field.contacts.contacts[l].label << "  "
        << steer::format_double(outcome.pattern.currents()[l]) << "\n";
  if (!outcome.diagnostics.note.empty()) out << "note      " << outcome.diagnostics.note << "\n";
}

int run_geometry(const std::string& model_name, const std::string& format,
                 const std::string& out_path) {
  const steer::ContactArray contacts =
      steer::build_geometry(steer::lead_model_from_string(model_name));
  std::ofstream file;
  std::ostream& out = open_sink(out_path, file);
  if (format == "json") {
    json root;
    root["model"] = contacts.model;
    root["lead_diameter_mm"] = contacts.lead_diameter_mm;
    root["impedance_kohm"] = contacts.impedance_kohm;
    root["contacts"] = json::array();
    for (const steer::Contact& contact : contacts.contacts)
      root["contacts"].push_back(json{{"label", contact.label},
                                      {"row", contact.row},
                                      {"sector", contact.sector},
                                      {"center", {contact.center.x(), contact.center.y(),
                                                  contact.center.z()}},
                                      {"normal", {contact.outward_normal.x(),
                                                  contact.outward_normal.y(),
                                                  contact.outward_normal.z()}}});
    out << root.dump(2) << "\n";
    return 0;
  }
  out << "label,row,sector,x_mm,y_mm,z_mm,nx,ny,nz\n";
  for (const steer::Contact& contact : contacts.contacts)
    out << contact.label << ',' << contact.row << ',' << contact.sector << ','
        << steer::format_double(contact.center.x()) << ','
        << steer::format_double(contact.center.y()) << ','
        << steer::format_double(contact.center.z()) << ','
        << steer::format_double(contact.outward_normal.x()) << ','
        << steer::format_double(contact.outward_normal.y()) << ','
        << steer::format_double(contact.outward_normal.z()) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electrode current pattern optimization for multi-contact leads"};
  app.require_subcommand(1);

  // geometry ---------------------------------------------------------------
  auto* geometry_cmd = app.add_subcommand("geometry", "Print or export a contact array");
  std::string geometry_model = "contacts8";
  std::string geometry_format = "csv";
  std::string geometry_out;
  geometry_cmd->add_option("--geometry", geometry_model, "Lead model")
      ->check(CLI::IsMember({"contacts8", "contacts40"}));
  geometry_cmd->add_option("--format", geometry_format, "Output format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}));
  geometry_cmd->add_option("--out", geometry_out, "Output file (default stdout)");

  // synth ------------------------------------------------------------------
  auto* synth_cmd = app.add_subcommand("synth", "Synthesize and export a lead field");
  SceneOptions synth_scene;
  add_scene_flags(synth_cmd, synth_scene);
  std::string synth_out;
  std::string synth_format = "field";
  synth_cmd->add_option("--out", synth_out, "Output file")->required();
  synth_cmd->add_option("--format", synth_format,
                        "field (full interchange format) or csv (matrix only)")
      ->check(CLI::IsMember({"field", "csv"}));

  // solve ------------------------------------------------------------------
  auto* solve_cmd = app.add_subcommand("solve", "Solve one target with one method");
  SceneOptions solve_scene;
  add_scene_flags(solve_cmd, solve_scene);
  std::string solve_method = "rp";
  std::string solve_format = "text";
  std::string solve_out;
  double alpha_db = -60.0, epsilon_db = -40.0, reg_db = -160.0, beta_db = 0.0;
  double solve_lp_tolerance = 1e-8;
  solve_cmd->add_option("--method", solve_method, "rp, tls or l1l1")
      ->check(CLI::IsMember({"rp", "tls", "l1l1"}));
  solve_cmd->add_option("--alpha-db", alpha_db, "Regularization weight (dB) for l1l1");
  solve_cmd->add_option("--epsilon-db", epsilon_db, "Censoring level (dB) for l1l1");
  solve_cmd->add_option("--reg-db", reg_db, "Regularization weight (dB) for tls");
  solve_cmd->add_option("--beta-db", beta_db, "Nuisance weight (dB) for tls");
  solve_cmd->add_option("--lp-tolerance", solve_lp_tolerance, "Interior point tolerance");
  solve_cmd->add_option("--format", solve_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  solve_cmd->add_option("--out", solve_out, "Output file (default stdout)");

  // search -----------------------------------------------------------------
  auto* search_cmd = app.add_subcommand("search", "Hyperparameter lattice search");
  SceneOptions search_scene;
  add_scene_flags(search_cmd, search_scene);
  std::string search_method = "l1l1";
  std::string search_variant = "a";
  int search_steps = 8;
  double search_gamma0 = 0.0;
  int search_parallel = 1;
  double search_lp_tolerance = 1e-8;
  std::string search_format = "text";
  std::string search_out;
  search_cmd->add_option("--method", search_method, "tls or l1l1")
      ->check(CLI::IsMember({"tls", "l1l1"}));
  search_cmd->add_option("--variant", search_variant, "Censoring window: a (wide) or b (high)")
      ->check(CLI::IsMember({"a", "b"}));
  search_cmd->add_option("--steps", search_steps, "Lattice steps per axis");
  search_cmd->add_option("--gamma0", search_gamma0, "Feasibility threshold on gamma");
  search_cmd->add_option("--parallel", search_parallel, "Worker threads");
  search_cmd->add_option("--lp-tolerance", search_lp_tolerance, "Interior point tolerance");
  search_cmd->add_option("--format", search_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  search_cmd->add_option("--out", search_out, "Output file (default stdout)");

  // study ------------------------------------------------------------------
  auto* study_cmd = app.add_subcommand("study", "Run a full study from a config file");
  std::string study_config_path;
  std::string study_out = ".";
  int study_parallel = 1;
  std::uint64_t study_seed = 0;
  bool study_seed_set = false;
  study_cmd->add_option("--config", study_config_path, "Study config (JSON)")->required();
  study_cmd->add_option("--out", study_out, "Output directory");
  study_cmd->add_option("--parallel", study_parallel, "Worker threads");
  study_cmd->add_option("--seed", study_seed, "Override the master seed")
      ->each([&](const std::string&) { study_seed_set = true; });

  // vta --------------------------------------------------------------------
  auto* vta_cmd = app.add_subcommand("vta", "Attenuation set sizes over a delta ladder");
  SceneOptions vta_scene;
  add_scene_flags(vta_cmd, vta_scene);
  std::vector<double> delta_db{-10.0, -20.0, -30.0, -40.0};
  std::string vta_format = "text";
  std::string vta_out;
  vta_cmd->add_option("--delta-db", delta_db, "Relative attenuation levels (dB, <= 0)");
  vta_cmd->add_option("--format", vta_format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  vta_cmd->add_option("--out", vta_out, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (geometry_cmd->parsed())
      return run_geometry(geometry_model, geometry_format, geometry_out);

    if (synth_cmd->parsed()) {
      synth_scene.noisy = synth_cmd->count("--psnr-db") > 0;
      const steer::LeadField field = build_scene_field(synth_scene, true);
      if (synth_format == "csv")
        steer::export_matrix_csv(field.matrix, synth_out);
      else
        steer::export_leadfield(field, synth_out);
      std::cout << "wrote " << field.row_count() << " x " << field.contact_count() << " field ("
                << field.position_count() << " positions) to " << synth_out << "\n";
      return 0;
    }

    if (solve_cmd->parsed()) {
      solve_scene.noisy = solve_cmd->count("--psnr-db") > 0;
      const steer::LeadField field = build_scene_field(solve_scene, true);
      int position_index = -1;
      const steer::TargetSpec target = pick_target(field, solve_scene, &position_index);
      const steer::ReducedSystem system = steer::reduce_system(field, target);
      steer::SolveOutcome outcome = [&]() {
        if (solve_method == "rp") return steer::solve_rp(system);
        if (solve_method == "tls")
          return steer::solve_tls(system, steer::db_to_linear(reg_db),
                                  steer::db_to_linear(beta_db));
        steer::LpOptions options;
        options.tolerance = solve_lp_tolerance;
        return steer::solve_l1l1(system, steer::db_to_linear(alpha_db),
                                 steer::db_to_linear(epsilon_db), steer::Bounds{}, options);
      }();
      std::ofstream file;
      std::ostream& out = open_sink(solve_out, file);
      if (solve_format == "json")
        out << outcome_to_json(outcome, field, position_index).dump(2) << "\n";
      else
        print_outcome(out, outcome, field, position_index);
      return 0;
    }

    if (search_cmd->parsed()) {
      search_scene.noisy = search_cmd->count("--psnr-db") > 0;
      const steer::LeadField field = build_scene_field(search_scene, true);
      int position_index = -1;
      const steer::TargetSpec target = pick_target(field, search_scene, &position_index);
      const steer::ReducedSystem system = steer::reduce_system(field, target);
      const steer::SearchPreset preset =
          search_method == "tls" ? steer::SearchPreset::tls_default
                                 : steer::search_preset_from_string("l1l1_" + search_variant);
      const steer::SearchSpace space = steer::make_search_space(preset, search_steps);
      steer::LpOptions options;
      options.tolerance = search_lp_tolerance;
      const steer::SearchResult result = steer::lattice_search(
          system, space, search_gamma0, steer::Bounds{}, search_parallel, options);
      std::ofstream file;
      std::ostream& out = open_sink(search_out, file);
      if (search_format == "json") {
        json root;
        root["gamma0"] = result.gamma0;
        root["fallback"] = result.feasible_set_empty;
        root["best"] = outcome_to_json(*result.best.outcome, field, position_index);
        root["best"]["i"] = result.best.i;
        root["best"]["j"] = result.best.j;
        root["lattice"] = json::array();
        for (const steer::CandidateSolution& slot : result.lattice) {
          json entry;
          entry["i"] = slot.i;
          entry["j"] = slot.j;
          entry["param1_db"] = space.param1.value_db(slot.i);
          entry["param2_db"] = space.param2.value_db(slot.j);
          if (slot.solved()) {
            entry["gamma"] = slot.outcome->metrics.gamma;
            entry["xi"] = slot.outcome->metrics.xi;
            entry["theta"] = slot.outcome->metrics.theta;
            entry["feasible"] = slot.feasible;
          } else {
            entry["error"] = slot.error;
          }
          root["lattice"].push_back(std::move(entry));
        }
        out << root.dump(2) << "\n";
      } else {
        out << space.param1.name << "_db," << space.param2.name
            << "_db,gamma,xi,theta,feasible,error\n";
        for (const steer::CandidateSolution& slot : result.lattice) {
          out << steer::format_double(space.param1.value_db(slot.i)) << ','
              << steer::format_double(space.param2.value_db(slot.j)) << ',';
          if (slot.solved())
            out << steer::format_double(slot.outcome->metrics.gamma) << ','
                << steer::format_double(slot.outcome->metrics.xi) << ','
                << steer::format_double(slot.outcome->metrics.theta) << ','
                << (slot.feasible ? '1' : '0') << ",\n";
          else
            out << ",,,0," << slot.error << "\n";
        }
        out << "\nbest: " << space.param1.name << " "
            << steer::format_double(space.param1.value_db(result.best.i)) << " dB, "
            << space.param2.name << " "
            << steer::format_double(space.param2.value_db(result.best.j)) << " dB"
            << (result.feasible_set_empty ? " (fallback: empty feasible set)" : "") << "\n";
        print_outcome(out, *result.best.outcome, field, position_index);
      }
      return 0;
    }

    if (study_cmd->parsed()) {
      steer::StudyConfig config = steer::parse_study_config(
          std::filesystem::path(study_config_path));
      if (study_seed_set) config.seed = study_seed;
      const steer::StudyResult result = steer::run_study(config, study_parallel);
      steer::write_study_outputs(result, study_out);
      int failed = 0;
      for (const steer::StudyRow& row : result.rows)
        if (row.status != "ok") ++failed;
      std::cout << "study " << config.name << ": " << result.rows.size() << " rows ("
                << failed << " failed), " << result.summaries.size() << " summaries, "
                << steer::format_double(result.wall_ms / 1000.0) << " s\n"
                << "outputs in " << study_out << "/" << config.name << "_*\n";
      return failed == 0 ? 0 : 3;
    }

    if (vta_cmd->parsed()) {
      vta_scene.noisy = vta_cmd->count("--psnr-db") > 0;
      const steer::LeadField field = build_scene_field(vta_scene, true);
      int position_index = -1;
      pick_target(field, vta_scene, &position_index);
      std::ofstream file;
      std::ostream& out = open_sink(vta_out, file);
      json levels = json::array();
      if (vta_format == "text")
        out << "delta_db,delta,members,fraction,epsilon_bound\n";
      for (double db : delta_db) {
        const double delta = steer::db_to_linear(db);
        const steer::AttenuationSet set = steer::attenuation_set(field, delta);
        const double bound = steer::dynamic_range_bound(set, position_index);
        const double fraction = static_cast<double>(set.member_positions.size()) /
                                static_cast<double>(field.position_count());
        if (vta_format == "json")
          levels.push_back(json{{"delta_db", db},
                                {"delta", delta},
                                {"members", set.member_positions.size()},
                                {"fraction", fraction},
                                {"epsilon_bound", bound}});
        else
          out << steer::format_double(db) << ',' << steer::format_double(delta) << ','
              << set.member_positions.size() << ',' << steer::format_double(fraction) << ','
              << steer::format_double(bound) << "\n";
      }
      if (vta_format == "json") {
        json root;
        root["target_index"] = position_index;
        root["levels"] = std::move(levels);
        out << root.dump(2) << "\n";
      }
      return 0;
    }
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 2;
  }
  return 0;
}
