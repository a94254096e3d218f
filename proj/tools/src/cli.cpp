#include "hhmo_cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hhmo/errors.hpp"
#include "hhmo/ode_toy.hpp"

namespace hhmo::cli {

namespace fs = std::filesystem;

namespace {

struct Overrides {
  std::string config_path;
  std::string output_dir;
  std::optional<double> alpha, beta, u_star_fraction, u_star, dx, dt, x_max, t_max, record_x_max,
      epsilon, agreement_tol;
  std::optional<std::size_t> stride;
  std::string relay, scheme;
};

void add_run_options(CLI::App* app, Overrides& o) {
  app->add_option("-c,--config", o.config_path, "JSON configuration file");
  app->add_option("-o,--output-dir", o.output_dir, "Output directory (overrides HHMO_OUTPUT_DIR)");
  app->add_option("--alpha", o.alpha, "Source speed");
  app->add_option("--beta", o.beta, "Source strength");
  app->add_option("--u-star-fraction", o.u_star_fraction, "Threshold as a fraction of Psi(alpha)");
  app->add_option("--u-star", o.u_star, "Absolute threshold");
  app->add_option("--dx", o.dx, "Space step");
  app->add_option("--dt", o.dt, "Time step");
  app->add_option("--x-max", o.x_max, "Domain length");
  app->add_option("--t-max", o.t_max, "Final time");
  app->add_option("--record-x-max", o.record_x_max, "Largest x stored in snapshots");
  app->add_option("--stride", o.stride, "Steps between snapshots");
  app->add_option("--relay", o.relay, "sharp | mollified | property_p");
  app->add_option("--epsilon", o.epsilon, "Mollifier width");
  app->add_option("--scheme", o.scheme, "deficit | source_deposition");
  app->add_option("--agreement-tol", o.agreement_tol, "Agreement tolerance for compare/sweep");
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

RunConfig resolve_config(const Overrides& o) {
  Json doc = Json::object();
  if (!o.config_path.empty()) {
    const std::string text = read_text(o.config_path);
    try {
      parse_config(text);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::Validation) throw;
    }
    doc = Json::parse(text);
  }
  auto set = [&](const char* key, const auto& value) {
    if (value) doc[key] = *value;
  };
  set("alpha", o.alpha);
  set("beta", o.beta);
  if (o.u_star_fraction) {
    doc.erase("u_star");
    doc["u_star_fraction"] = *o.u_star_fraction;
  }
  if (o.u_star) {
    doc.erase("u_star_fraction");
    doc["u_star"] = *o.u_star;
  }
  set("dx", o.dx);
  set("dt", o.dt);
  set("x_max", o.x_max);
  set("t_max", o.t_max);
  set("record_x_max", o.record_x_max);
  set("snapshot_stride", o.stride);
  set("epsilon", o.epsilon);
  set("agreement_tol", o.agreement_tol);
  if (!o.relay.empty()) doc["relay"] = o.relay;
  if (!o.scheme.empty()) doc["scheme"] = o.scheme;
  if (const char* env = std::getenv("HHMO_OUTPUT_DIR"); env && *env) doc["output_dir"] = env;
  if (!o.output_dir.empty()) doc["output_dir"] = o.output_dir;
  return parse_config(doc.dump(2));
}

ModelConstants constants_for(const SolutionRecord& r) {
  return r.constants ? *r.constants : compute_constants(r.params);
}

Json record_config(const fs::path& dir) {
  const Json meta = read_json(dir / "record.json");
  return meta.contains("config") ? meta.at("config") : Json(nullptr);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_constants(const RunConfig& cfg, bool measure, std::ostream& out) {
  const ModelParams p = cfg.params();
  ModelConstants c = compute_constants(p);
  if (measure) {
    const auto record = run(p, cfg.grid(), cfg.relay_kind(), cfg.snapshot_stride);
    c = compute_constants(p, {measure_t1(record, c.alpha_star), std::nullopt});
  }
  const fs::path dir = cfg.output_dir;
  write_json(dir / "constants.json", constants_json(c));
  write_json(dir / "constants_report.json", constants_report(c, to_json(cfg)));
  out << constants_json(c).dump(2) << "\n";
  return 0;
}

int cmd_simulate(const RunConfig& cfg, const std::string& record_dir, bool no_precipitation,
                 std::ostream& out) {
  const auto t0 = std::chrono::steady_clock::now();
  RunOptions opts;
  opts.disable_precipitation = no_precipitation;
  const GridSpec grid = cfg.grid();
  const SolutionRecord record =
      cfg.scheme == Scheme::Deficit
          ? run(cfg.params(), grid, cfg.relay_kind(), cfg.snapshot_stride, opts)
          : source_deposition_run(cfg.params(), grid, cfg.relay_kind(), cfg.snapshot_stride, opts);
  const double elapsed = seconds_since(t0);
  const fs::path dir = record_dir.empty() ? fs::path(cfg.output_dir) / "record" : fs::path(record_dir);
  write_record(dir, record, to_json(cfg));
  std::size_t ignited = 0;
  for (const auto& ig : record.ignition) ignited += ig.ignited() ? 1 : 0;
  out << "simulated " << grid.n_t << " steps to t = " << grid.t_max << " in " << elapsed
      << " s; " << record.snapshots() << " snapshots, " << ignited << " ignited nodes\n"
      << "record written to " << dir.string() << "\n";
  return 0;
}

fs::path record_path(const RunConfig& cfg, const std::string& given) {
  return given.empty() ? fs::path(cfg.output_dir) / "record" : fs::path(given);
}

int cmd_analyze(const RunConfig& cfg, const std::string& given, std::ostream& out) {
  const fs::path dir = record_path(cfg, given);
  const SolutionRecord record = read_record(dir);
  const FrontAnalysis a = analyze_front(record, cfg);
  Json report = front_report(a, to_json(cfg));
  report["record_config"] = record_config(dir);
  const fs::path outdir = cfg.output_dir;
  write_json(outdir / "front_report.json", report);
  write_csv(outdir / "front.csv", front_table(a));
  out << "front nodes: " << a.front.count() << ", rings: " << a.rings.rings.size()
      << ", X* = " << a.rings.X_star << "\n";
  for (const auto& ring : a.rings.rings) {
    out << "  ring [" << ring.begin << ", " << ring.end << "]\n";
  }
  out << "monotonicity: " << a.monotonicity.ties << " ties, " << a.monotonicity.decreases
      << " decreases over " << a.monotonicity.pairs << " pairs\n"
      << "envelope: " << a.envelope.below << " below, " << a.envelope.above << " above of "
      << a.envelope.nodes << "\n";
  return 0;
}

int cmd_diagnose(const RunConfig& cfg, const std::string& given, std::ostream& out) {
  const fs::path dir = record_path(cfg, given);
  const SolutionRecord record = read_record(dir);
  const FrontFunction front = extract_front(record);
  const Diagnostics d = run_diagnostics(record, front, cfg);
  Json report = diagnostics_report(d, to_json(cfg));
  report["record_config"] = record_config(dir);
  write_json(fs::path(cfg.output_dir) / "diagnostics.json", report);
  out << "probes: " << d.identity.rows.size() << " evaluated, " << d.skipped.size()
      << " skipped; max |residual| = " << d.identity.max_abs_residual << "\n"
      << "F1 max " << d.bounds.F1_max << " (bound " << d.bounds.F1_bound << "), F2 max "
      << d.bounds.F2_max << " (bound " << d.bounds.F2_bound << ")\n"
      << "transversality on " << d.transversality.rows.size() << " nodes: spatial "
      << d.transversality.spatial_fraction() << ", temporal "
      << d.transversality.temporal_fraction() << "\n";
  return 0;
}

int cmd_toy(const RunConfig& cfg, const toy::ToyConfig& toy_cfg, std::ostream& out) {
  toy::validate(toy_cfg);
  const auto table = toy::enumerate(toy_cfg);
  write_json(fs::path(cfg.output_dir) / "toy.json", toy_report(table));
  out << toy::format_table(table);
  return 0;
}

int cmd_compare(const RunConfig& cfg, const std::string& first, const std::string& second,
                bool interpolate, std::size_t window, std::ostream& out) {
  const SolutionRecord a = read_record(first);
  const SolutionRecord b = read_record(second);
  const double tol = cfg.agreement_tol.value_or(1e-4);
  const ComparisonReport r =
      interpolate ? compare_interpolated(a, b, tol, window) : compare(a, b, tol, window);
  const fs::path dir = cfg.output_dir;
  Json report = comparison_report(r, to_json(cfg));
  report["first"] = first;
  report["second"] = second;
  write_json(dir / "comparison.json", report);
  write_csv(dir / "comparison.csv", comparison_table(r));
  out << "max sup_diff " << (r.times.empty() ? 0.0 : r.max_sup_diff(r.times.back()))
      << ", agreement_tol " << tol << ", divergence "
      << (r.divergence_time ? std::to_string(*r.divergence_time) : std::string("none"))
      << ", entangled " << (r.entangled ? "yes" : "no") << "\n";
  return 0;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
  SweepBase base;
  base.params = cfg.params();
  base.grid = cfg.grid();
  base.relay = cfg.relay_kind();
  base.snapshot_stride = cfg.snapshot_stride;
  const SweepTable table = perturbation_sweep(base, cfg.perturbations, cfg.agreement_tol);
  write_json(fs::path(cfg.output_dir) / "sweep.json", sweep_report(table, to_json(cfg)));
  out << "T_unique " << table.T_unique << ", agreement_tol " << table.agreement_tol
      << (table.agreement_tol_measured ? " (measured)" : "") << "\n";
  for (const auto& r : table.rows) {
    out << "  " << r.label << ": max sup_diff " << r.max_sup_diff << ", divergence "
        << (r.divergence_time ? std::to_string(*r.divergence_time) : std::string("none"))
        << ", energy " << (r.energy_monotone ? "monotone" : "not monotone") << ", "
        << (r.holds ? "holds" : "fails") << "\n";
  }
  return 0;
}

}  // namespace

FrontAnalysis analyze_front(const SolutionRecord& record, const RunConfig& config) {
  const ModelConstants c = constants_for(record);
  FrontAnalysis a;
  a.front = extract_front(record);
  a.rings = segment_rings(record, config.measure_tol);
  a.boundary = classify_boundary(a.front, record.params, config.jump_factor);
  a.monotonicity = front_monotonicity(a.front);
  a.envelope = front_envelope(a.front, record.params, c.alpha_star, record.grid.dt);
  a.slope = front_slope_check(a.front, c, record.grid.dt);
  a.canonical = canonical_p_check(record, a.front);
  a.frozen = frozen_above_parabola(record);
  return a;
}

Diagnostics run_diagnostics(const SolutionRecord& record, const FrontFunction& front,
                            const RunConfig& config) {
  const ModelConstants c = constants_for(record);
  Diagnostics d;
  const std::vector<Probe> probes = config.probes.empty() ? default_probes() : config.probes;
  for (const Probe& probe : probes) {
    try {
      const Probe one[1] = {probe};
      const IdentityTable t = check_ut_identity(record, front, one, config.slope_floor);
      d.identity.rows.push_back(t.rows.front());
      d.identity.max_abs_residual = std::max(d.identity.max_abs_residual, t.max_abs_residual);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ProbeOnFront && e.code() != ErrorCode::InsufficientSnapshots) throw;
      d.skipped.push_back({probe, e.what()});
    }
  }
  d.t_limit = c.T_unique;
  d.transversality =
      transversality_scan(record, front, c.T_unique, config.slope_floor, config.rate_floor);
  d.bounds.F1_bound = F1_upper_bound(c);
  d.bounds.F2_bound = F2_upper_bound(c);
  for (const auto& row : d.identity.rows) {
    d.bounds.F1_max = std::max(d.bounds.F1_max, row.F1);
    if (row.t <= c.T2 && std::isfinite(row.F2)) d.bounds.F2_max = std::max(d.bounds.F2_max, row.F2);
  }
  d.bounds.psi_t_worst_margin = psi_t_lower_margin(record, c);
  return d;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulation and analysis of fast-reaction precipitation with a moving source"};
  app.name("hhmo");
  app.require_subcommand(1);

  Overrides o;
  bool measure = false;
  auto* constants = app.add_subcommand("constants", "Compute the model constants");
  add_run_options(constants, o);
  constants->add_flag("--measure-t1", measure, "Measure T1 on a reference run");

  std::string record_dir;
  bool no_precipitation = false;
  auto* simulate = app.add_subcommand("simulate", "Run the solver and write a record");
  add_run_options(simulate, o);
  simulate->add_option("--record", record_dir, "Record directory (default <output>/record)");
  simulate->add_flag("--no-precipitation", no_precipitation, "Force p = 0");

  auto* analyze = app.add_subcommand("analyze", "Front and ring analysis of a record");
  add_run_options(analyze, o);
  analyze->add_option("--record", record_dir, "Record directory (default <output>/record)");

  auto* diagnose = app.add_subcommand("diagnose", "Duhamel identity and transversality checks");
  add_run_options(diagnose, o);
  diagnose->add_option("--record", record_dir, "Record directory (default <output>/record)");

  toy::ToyConfig toy_cfg;
  std::string forcing = "constant";
  std::optional<double> toy_tol;
  auto* toy_cmd = app.add_subcommand("toy", "Feasibility of the two-relay ODE example");
  add_run_options(toy_cmd, o);
  toy_cmd->add_option("--forcing", forcing, "constant | linear")->check(CLI::IsMember({"constant", "linear"}));
  toy_cmd->add_option("--horizon", toy_cfg.horizon, "Final time T");
  toy_cmd->add_option("--step", toy_cfg.dt, "RK4 step");
  toy_cmd->add_option("--tol", toy_tol, "Feasibility tolerance (default 1e-9 T)");

  std::string first, second;
  bool interpolate = false;
  std::size_t window = kDefaultEntanglementWindow;
  auto* compare_cmd = app.add_subcommand("compare", "Compare two records");
  add_run_options(compare_cmd, o);
  compare_cmd->add_option("first", first, "First record directory")->required();
  compare_cmd->add_option("second", second, "Second record directory")->required();
  compare_cmd->add_flag("--interpolate", interpolate, "Allow different grids");
  compare_cmd->add_option("--window", window, "Entanglement window in nodes");

  auto* sweep = app.add_subcommand("sweep", "Perturbation sweep against the base run");
  add_run_options(sweep, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = resolve_config(o);
    if (constants->parsed()) return cmd_constants(cfg, measure, out);
    if (simulate->parsed()) return cmd_simulate(cfg, record_dir, no_precipitation, out);
    if (analyze->parsed()) return cmd_analyze(cfg, record_dir, out);
    if (diagnose->parsed()) return cmd_diagnose(cfg, record_dir, out);
    if (toy_cmd->parsed()) {
      toy_cfg.forcing = toy::parse_forcing(forcing);
      toy_cfg.tol = toy_tol;
      return cmd_toy(cfg, toy_cfg, out);
    }
    if (compare_cmd->parsed()) return cmd_compare(cfg, first, second, interpolate, window, out);
    if (sweep->parsed()) return cmd_sweep(cfg, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return is_numerical(e.code()) ? 2 : 1;
  } catch (const Json::exception& e) {
    err << "error (Parse): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

}  // namespace hhmo::cli
