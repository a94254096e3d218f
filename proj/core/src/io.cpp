#include "hhmo/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "hhmo/errors.hpp"

namespace hhmo {

namespace fs = std::filesystem;

namespace {

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double number_from(const Json& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

Json optional_json(const std::optional<double>& v) {
  return v ? number_or_null(*v) : Json(nullptr);
}

Json optional_index(const std::optional<std::size_t>& v) { return v ? Json(*v) : Json(nullptr); }

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw Error(ErrorCode::Io, "cannot create " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

void append_double(std::string& out, double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

Json interval_json(const Interval& iv) {
  return {{"begin", iv.begin},
          {"end", number_or_null(iv.end)},
          {"first_node", iv.first_node},
          {"last_node", iv.last_node},
          {"width", number_or_null(iv.width())}};
}

CsvTable field_table(const SolutionRecord& r, const std::vector<double>& data,
                     std::size_t width) {
  CsvTable t;
  t.header.reserve(width + 1);
  t.header.push_back("t");
  for (std::size_t i = 0; i < width; ++i) t.header.push_back(format_double(r.x(i)));
  t.rows.resize(r.snapshots());
  for (std::size_t k = 0; k < r.snapshots(); ++k) {
    auto& row = t.rows[k];
    row.reserve(width + 1);
    row.push_back(r.times[k]);
    row.insert(row.end(), data.begin() + static_cast<std::ptrdiff_t>(k * width),
               data.begin() + static_cast<std::ptrdiff_t>((k + 1) * width));
  }
  return t;
}

std::vector<double> field_from_table(const CsvTable& t, std::size_t snapshots, std::size_t width,
                                     const std::string& name) {
  if (t.rows.size() != snapshots || t.header.size() != width + 1) {
    throw Error(ErrorCode::LengthMismatch, name + " does not match record.json dimensions");
  }
  std::vector<double> data;
  data.reserve(snapshots * width);
  for (const auto& row : t.rows) data.insert(data.end(), row.begin() + 1, row.end());
  return data;
}

Scheme scheme_from(const std::string& s) {
  if (s == to_string(Scheme::Deficit)) return Scheme::Deficit;
  if (s == to_string(Scheme::SourceDeposition)) return Scheme::SourceDeposition;
  throw Error(ErrorCode::Parse, "unknown scheme '" + s + "' in record");
}

}  // namespace

void write_json(const fs::path& path, const Json& doc) { write_file(path, doc.dump(2) + "\n"); }

Json read_json(const fs::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

double parse_double(std::string_view text) {
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(ErrorCode::Parse, "not a number: '" + std::string(text) + "'");
  }
  return v;
}

void write_csv(const fs::path& path, const CsvTable& table) {
  std::string out;
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (i) out += ',';
    out += table.header[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      append_double(out, row[i]);
    }
    out += '\n';
  }
  write_file(path, out);
}

CsvTable read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string::npos) eol = text.size();
    std::string_view line(text.data() + pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos = eol + 1;
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string_view::npos ? comma : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (table.header.empty()) {
      for (auto c : cells) table.header.emplace_back(c);
      continue;
    }
    if (cells.size() != table.header.size()) {
      throw Error(ErrorCode::Parse, path.string() + ": line " + std::to_string(line_no) +
                                        " has " + std::to_string(cells.size()) + " fields, expected " +
                                        std::to_string(table.header.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto c : cells) {
      try {
        row.push_back(parse_double(c));
      } catch (const Error& e) {
        throw Error(ErrorCode::Parse,
                    path.string() + ": line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    table.rows.push_back(std::move(row));
  }
  if (table.header.empty()) throw Error(ErrorCode::Parse, path.string() + ": empty CSV");
  return table;
}

Json to_json(const ModelParams& p) {
  return {{"alpha", p.alpha}, {"beta", p.beta}, {"u_star", number_or_null(p.u_star)}};
}

Json to_json(const GridSpec& g) {
  return {{"dx", g.dx},   {"dt", g.dt},   {"x_max", g.x_max},
          {"t_max", g.t_max}, {"n_x", g.n_x}, {"n_t", g.n_t},
          {"record_x_max", g.record_x_max}};
}

Json to_json(const RelayKind& r) {
  Json j{{"kind", variant_name(r.variant)}};
  if (r.variant == RelayVariant::Mollified) j["epsilon"] = r.epsilon;
  return j;
}

Json constants_json(const ModelConstants& c) {
  return {{"psi_alpha", c.psi_alpha}, {"alpha_star", c.alpha_star}, {"t_star", c.t_star},
          {"L", c.L},                 {"C_psi", c.C_psi},           {"c_psi", c.c_psi},
          {"C_ell", c.C_ell},         {"T1", c.T1},                 {"T2", c.T2},
          {"T_unique", c.T_unique}};
}

ModelConstants constants_from_json(const Json& j) {
  ModelConstants c;
  c.psi_alpha = j.at("psi_alpha").get<double>();
  c.alpha_star = j.at("alpha_star").get<double>();
  c.t_star = j.at("t_star").get<double>();
  c.L = j.at("L").get<double>();
  c.C_psi = j.at("C_psi").get<double>();
  c.c_psi = j.at("c_psi").get<double>();
  c.C_ell = j.at("C_ell").get<double>();
  c.T1 = j.at("T1").get<double>();
  c.T2 = j.at("T2").get<double>();
  c.T_unique = j.at("T_unique").get<double>();
  if (j.contains("L_lemma")) c.L_lemma = j.at("L_lemma").get<double>();
  if (j.contains("T1_ceiling")) c.T1_ceiling = j.at("T1_ceiling").get<double>();
  if (j.contains("T1_measured")) c.T1_measured = j.at("T1_measured").get<bool>();
  return c;
}

Json constants_report(const ModelConstants& c, const Json& config) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = config;
  j["constants"] = constants_json(c);
  j["L_lemma"] = c.L_lemma;
  j["T1_ceiling"] = c.T1_ceiling;
  j["T1_measured"] = c.T1_measured;
  return j;
}

void write_record(const fs::path& dir, const SolutionRecord& r, const Json& config) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + dir.string());

  Json meta;
  meta["schema_version"] = r.schema_version;
  meta["config"] = config;
  meta["params"] = to_json(r.params);
  if (r.constants) {
    Json c = constants_json(*r.constants);
    c["L_lemma"] = r.constants->L_lemma;
    c["T1_ceiling"] = r.constants->T1_ceiling;
    c["T1_measured"] = r.constants->T1_measured;
    meta["constants"] = c;
  } else {
    meta["constants"] = nullptr;
  }
  meta["grid"] = to_json(r.grid);
  meta["relay"] = to_json(r.relay);
  meta["scheme"] = to_string(r.scheme);
  meta["precipitation_disabled"] = r.precipitation_disabled;
  meta["snapshot_stride"] = r.snapshot_stride;
  meta["n_nodes"] = r.n_nodes;
  meta["n_relay"] = r.n_relay;
  meta["times"] = r.times;
  meta["steps"] = r.steps;
  Json ignition = Json::array();
  for (std::size_t i = 0; i < r.ignition.size(); ++i) {
    const auto& ig = r.ignition[i];
    if (!ig.ignited()) continue;
    Json lags = Json::array();
    for (double v : ig.u_lags) lags.push_back(number_or_null(v));
    Json right = Json::array();
    for (double v : ig.u_right) right.push_back(number_or_null(v));
    ignition.push_back({{"node", i}, {"time", ig.time}, {"u_lags", lags}, {"u_right", right}});
  }
  meta["ignition"] = ignition;
  write_json(dir / "record.json", meta);

  write_csv(dir / "u.csv", field_table(r, r.u, r.n_nodes));
  write_csv(dir / "p.csv", field_table(r, r.p, r.n_nodes));
  write_csv(dir / "accumulator.csv", field_table(r, r.accumulator, r.n_relay));
}

SolutionRecord read_record(const fs::path& dir) {
  const Json meta = read_json(dir / "record.json");
  SolutionRecord r;
  try {
    r.schema_version = meta.at("schema_version").get<int>();
    if (r.schema_version != SolutionRecord::kSchemaVersion) {
      throw Error(ErrorCode::Parse, "unsupported record schema_version " +
                                        std::to_string(r.schema_version));
    }
    const Json& p = meta.at("params");
    r.params.alpha = p.at("alpha").get<double>();
    r.params.beta = p.at("beta").get<double>();
    r.params.u_star = p.at("u_star").is_null() ? std::numeric_limits<double>::infinity()
                                               : p.at("u_star").get<double>();
    if (!meta.at("constants").is_null()) r.constants = constants_from_json(meta.at("constants"));
    const Json& g = meta.at("grid");
    r.grid.dx = g.at("dx").get<double>();
    r.grid.dt = g.at("dt").get<double>();
    r.grid.x_max = g.at("x_max").get<double>();
    r.grid.t_max = g.at("t_max").get<double>();
    r.grid.n_x = g.at("n_x").get<std::size_t>();
    r.grid.n_t = g.at("n_t").get<std::size_t>();
    r.grid.record_x_max = g.at("record_x_max").get<double>();
    const Json& relay = meta.at("relay");
    r.relay.variant = parse_relay_variant(relay.at("kind").get<std::string>());
    if (relay.contains("epsilon")) r.relay.epsilon = relay.at("epsilon").get<double>();
    r.scheme = scheme_from(meta.at("scheme").get<std::string>());
    r.precipitation_disabled = meta.at("precipitation_disabled").get<bool>();
    r.snapshot_stride = meta.at("snapshot_stride").get<std::size_t>();
    r.n_nodes = meta.at("n_nodes").get<std::size_t>();
    r.n_relay = meta.at("n_relay").get<std::size_t>();
    r.times = meta.at("times").get<std::vector<double>>();
    r.steps = meta.at("steps").get<std::vector<std::size_t>>();
    r.ignition.assign(r.n_relay, IgnitionData{});
    for (const Json& item : meta.at("ignition")) {
      const auto node = item.at("node").get<std::size_t>();
      if (node >= r.n_relay) throw Error(ErrorCode::Parse, "ignition node out of range");
      IgnitionData& ig = r.ignition[node];
      ig.time = item.at("time").get<double>();
      const Json& lags = item.at("u_lags");
      const Json& right = item.at("u_right");
      if (lags.size() != kLagCount || right.size() != kStencilCount) {
        throw Error(ErrorCode::Parse, "ignition history has the wrong length");
      }
      for (std::size_t k = 0; k < kLagCount; ++k) ig.u_lags[k] = number_from(lags[k]);
      for (std::size_t k = 0; k < kStencilCount; ++k) ig.u_right[k] = number_from(right[k]);
    }
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, (dir / "record.json").string() + ": " + e.what());
  }
  if (r.steps.size() != r.times.size()) {
    throw Error(ErrorCode::LengthMismatch, "record.json: times and steps differ in length");
  }
  r.u = field_from_table(read_csv(dir / "u.csv"), r.snapshots(), r.n_nodes, "u.csv");
  r.p = field_from_table(read_csv(dir / "p.csv"), r.snapshots(), r.n_nodes, "p.csv");
  r.accumulator = field_from_table(read_csv(dir / "accumulator.csv"), r.snapshots(), r.n_relay,
                                   "accumulator.csv");
  return r;
}

Json front_report(const FrontAnalysis& a, const Json& config) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = config;

  const auto& f = a.front;
  Json front{{"dx", f.dx},
             {"dt", f.dt},
             {"nodes", f.size()},
             {"ignited", f.count()},
             {"max_residual", f.max_residual},
             {"max_residual_node", f.max_residual_node},
             {"max_residual_all", f.max_residual_all}};
  Json runs = Json::array();
  for (const auto& r : front_ranges(f)) runs.push_back({{"first", r.first}, {"last", r.last}});
  front["runs"] = runs;
  j["front"] = front;

  Json rings{{"X_star", a.rings.X_star},
             {"reached_data_end", a.rings.reached_data_end},
             {"analyzed_nodes", a.rings.analyzed_nodes}};
  rings["rings"] = Json::array();
  for (const auto& iv : a.rings.rings) rings["rings"].push_back(interval_json(iv));
  rings["interrings"] = Json::array();
  for (const auto& iv : a.rings.interrings) rings["interrings"].push_back(interval_json(iv));
  j["segmentation"] = rings;

  Json boundary{{"regular", a.boundary.regular},
                {"degenerate", a.boundary.degenerate},
                {"jump", a.boundary.jump},
                {"median_increment", a.boundary.median_increment}};
  boundary["ring_starts"] = Json::array();
  for (const auto& s : a.boundary.ring_starts) {
    boundary["ring_starts"].push_back({{"node", s.node},
                                       {"ell", s.ell},
                                       {"parabola", s.parabola},
                                       {"on_parabola", s.on_parabola}});
  }
  j["boundary"] = boundary;

  j["monotonicity"] = {{"pairs", a.monotonicity.pairs},
                       {"ties", a.monotonicity.ties},
                       {"decreases", a.monotonicity.decreases},
                       {"flagged", a.monotonicity.flagged}};
  j["envelope"] = {{"nodes", a.envelope.nodes},
                   {"below", a.envelope.below},
                   {"above", a.envelope.above},
                   {"worst_lower_margin", number_or_null(a.envelope.worst_lower_margin)},
                   {"worst_upper_margin", number_or_null(a.envelope.worst_upper_margin)}};
  j["slope_check"] = {{"pairs", a.slope.pairs},
                      {"worst_margin", number_or_null(a.slope.worst_margin)},
                      {"worst_first", a.slope.worst_first},
                      {"worst_second", a.slope.worst_second},
                      {"slack", a.slope.slack},
                      {"holds", a.slope.holds}};
  j["canonical_p"] = {{"checked", a.canonical.checked},
                      {"mismatches", a.canonical.mismatches},
                      {"mismatches_outside_window", a.canonical.mismatches_outside_window}};
  j["frozen_above_parabola"] = {{"checked", a.frozen.checked},
                                {"violations", a.frozen.violations},
                                {"first_violation_node", optional_index(a.frozen.first_violation_node)}};
  return j;
}

CsvTable front_table(const FrontAnalysis& a) {
  CsvTable t;
  t.header = {"x", "ell", "crossing", "u_residual", "class"};
  const auto& f = a.front;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!f.contains(i)) continue;
    double cls = std::numeric_limits<double>::quiet_NaN();
    if (i < a.boundary.node_class.size() && a.boundary.node_class[i]) {
      cls = static_cast<double>(*a.boundary.node_class[i]);
    }
    t.rows.push_back({f.x(i), f.ell[i], f.crossing_at(i), f.u_residual[i], cls});
  }
  return t;
}

Json diagnostics_report(const Diagnostics& d, const Json& config) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = config;
  Json rows = Json::array();
  for (const auto& r : d.identity.rows) {
    rows.push_back({{"requested", {{"x", r.requested.x}, {"t", r.requested.t}}},
                    {"node", r.node},
                    {"snapshot", r.snapshot},
                    {"x", r.x},
                    {"t", r.t},
                    {"F1", number_or_null(r.F1)},
                    {"F2", number_or_null(r.F2)},
                    {"psi_t", r.psi_t},
                    {"u_t", r.u_t},
                    {"residual", number_or_null(r.residual)}});
  }
  Json skipped = Json::array();
  for (const auto& s : d.skipped) {
    skipped.push_back({{"x", s.probe.x}, {"t", s.probe.t}, {"reason", s.reason}});
  }
  j["identity"] = {{"rows", rows},
                   {"skipped", skipped},
                   {"max_abs_residual", number_or_null(d.identity.max_abs_residual)}};

  const auto& scan = d.transversality;
  j["transversality"] = {{"t_limit", d.t_limit},
                         {"nodes", scan.rows.size()},
                         {"spatial_true", scan.spatial_true},
                         {"temporal_true", scan.temporal_true},
                         {"spatial_fraction", number_or_null(scan.spatial_fraction())},
                         {"temporal_fraction", number_or_null(scan.temporal_fraction())}};
  Json trows = Json::array();
  for (const auto& r : scan.rows) {
    Json row{{"node", r.node},
             {"x", r.x},
             {"ell", r.ell},
             {"u_x_plus", number_or_null(r.spatial.value)},
             {"spatial", r.spatial.flag},
             {"u_t_minus", number_or_null(r.temporal.value)},
             {"temporal", r.temporal.flag}};
    if (r.derivative) {
      row["front_derivative"] = number_or_null(r.derivative->estimate);
      row["discrete_slope"] = number_or_null(r.derivative->discrete_slope);
    }
    trows.push_back(row);
  }
  j["transversality"]["rows"] = trows;

  j["bounds"] = {{"F1_max", d.bounds.F1_max},
                 {"F1_bound", d.bounds.F1_bound},
                 {"F2_max", d.bounds.F2_max},
                 {"F2_bound", d.bounds.F2_bound},
                 {"psi_t_worst_margin", number_or_null(d.bounds.psi_t_worst_margin)}};
  return j;
}

Json comparison_report(const ComparisonReport& r, const Json& config) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = config;
  j["dx"] = r.dx;
  j["interpolated"] = r.interpolated;
  j["agreement_tol"] = r.agreement_tol;
  j["divergence_time"] = optional_json(r.divergence_time);
  j["max_sup_diff"] = r.times.empty() ? Json(nullptr) : Json(r.max_sup_diff(r.times.back()));
  j["entangled"] = r.entangled;
  j["window_nodes"] = r.window_nodes;
  if (r.witness) {
    j["witness"] = {{"first_node", r.witness->first_node},
                    {"last_node", r.witness->last_node},
                    {"x_begin", r.witness->x_begin},
                    {"x_end", r.witness->x_end}};
  } else {
    j["witness"] = nullptr;
  }
  const auto verdict = energy_monotonicity_check(
      r, r.times.empty() ? 0.0 : r.times.front(), r.times.empty() ? 0.0 : r.times.back());
  j["energy_monotone"] = verdict.monotone;
  j["energy_first_violation"] = optional_index(verdict.first_violation);
  return j;
}

CsvTable comparison_table(const ComparisonReport& r) {
  CsvTable t;
  t.header = {"t", "sup_diff", "energy", "energy_reverse"};
  for (std::size_t k = 0; k < r.times.size(); ++k) {
    t.rows.push_back({r.times[k], r.sup_diff[k], r.energy[k], r.energy_reverse[k]});
  }
  return t;
}

Json toy_report(const toy::FeasibilityTable& table) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = {{"forcing", toy::to_string(table.config.forcing)},
                 {"horizon", table.config.horizon},
                 {"dt", table.config.dt},
                 {"tol", table.config.tolerance()}};
  Json rows = Json::array();
  for (const auto& row : table.rows) {
    Json r{{"pu_switches", row.policy.pu_switches_at_zero},
           {"pv_switches", row.policy.pv_switches_at_zero},
           {"feasible", row.result.feasible},
           {"u_end", row.u_end},
           {"v_end", row.v_end}};
    if (!row.result.feasible) {
      r["component"] = row.result.component;
      r["violation_time"] = row.result.violation_time;
      r["reason"] = row.result.reason;
    }
    rows.push_back(r);
  }
  j["policies"] = rows;
  j["feasible_count"] = table.feasible_count;
  j["verdict"] = table.verdict;
  return j;
}

Json sweep_report(const SweepTable& table, const Json& config) {
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["config"] = config;
  j["T_unique"] = table.T_unique;
  j["agreement_tol"] = table.agreement_tol;
  j["agreement_tol_measured"] = table.agreement_tol_measured;
  Json rows = Json::array();
  for (const auto& r : table.rows) {
    rows.push_back({{"perturbation", r.label},
                    {"divergence_time", optional_json(r.divergence_time)},
                    {"max_sup_diff", r.max_sup_diff},
                    {"energy_monotone", r.energy_monotone},
                    {"holds", r.holds}});
  }
  j["rows"] = rows;
  return j;
}

}  // namespace hhmo
