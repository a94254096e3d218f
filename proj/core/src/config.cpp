#include "hhmo/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "hhmo/errors.hpp"

namespace hhmo {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "schema_version", "alpha",         "beta",          "u_star_fraction", "u_star",
      "dx",             "dt",            "x_max",         "t_max",           "record_x_max",
      "snapshot_stride", "scheme",       "relay",         "epsilon",         "output_dir",
      "probes",         "slope_floor",   "rate_floor",    "jump_factor",     "measure_tol",
      "agreement_tol",  "perturbations"};
  return keys;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(),
                                                 text.begin() + static_cast<std::ptrdiff_t>(offset),
                                                 '\n'));
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find('"' + key + '"');
  return pos == std::string::npos ? 0 : line_of_offset(text, pos);
}

[[noreturn]] void key_error(const std::string& text, const std::string& key,
                            const std::string& what) {
  std::ostringstream os;
  os << "config key '" << key << "'";
  if (const auto line = line_of_key(text, key)) os << " (line " << line << ")";
  os << ": " << what;
  throw Error(ErrorCode::Parse, os.str());
}

double number(const Json& doc, const std::string& text, const std::string& key) {
  const Json& v = doc.at(key);
  if (!v.is_number()) key_error(text, key, "expected a number");
  return v.get<double>();
}

std::optional<double> optional_number(const Json& doc, const std::string& text,
                                      const std::string& key) {
  if (doc.at(key).is_null()) return std::nullopt;
  return number(doc, text, key);
}

std::string string_value(const Json& doc, const std::string& text, const std::string& key) {
  const Json& v = doc.at(key);
  if (!v.is_string()) key_error(text, key, "expected a string");
  return v.get<std::string>();
}

Scheme parse_scheme(const std::string& s) {
  if (s == "deficit") return Scheme::Deficit;
  if (s == "source_deposition") return Scheme::SourceDeposition;
  throw Error(ErrorCode::Validation, "unknown scheme '" + s + "'");
}

Perturbation parse_perturbation(const Json& item, const std::string& text) {
  if (!item.is_object() || !item.contains("kind") || !item.at("kind").is_string()) {
    key_error(text, "perturbations", "each entry needs a string 'kind'");
  }
  for (const auto& [k, v] : item.items()) {
    if (k != "kind" && k != "epsilon") key_error(text, "perturbations", "unknown field '" + k + "'");
  }
  const std::string kind = item.at("kind").get<std::string>();
  if (kind == "grid") return Perturbation::refine_grid();
  if (kind == "mollified") {
    if (!item.contains("epsilon") || !item.at("epsilon").is_number()) {
      key_error(text, "perturbations", "mollified entry needs a numeric 'epsilon'");
    }
    return Perturbation::relay_kind(RelayKind::mollified(item.at("epsilon").get<double>()));
  }
  if (kind == "sharp") return Perturbation::relay_kind(RelayKind::sharp());
  if (kind == "property_p") return Perturbation::relay_kind(RelayKind::property_p());
  key_error(text, "perturbations", "unknown kind '" + kind + "'");
}

}  // namespace

std::vector<Perturbation> RunConfig::default_perturbations() {
  return {Perturbation::relay_kind(RelayKind::mollified(1e-3)),
          Perturbation::relay_kind(RelayKind::mollified(5e-4)),
          Perturbation::relay_kind(RelayKind::mollified(2.5e-4)), Perturbation::refine_grid()};
}

ModelParams RunConfig::params() const {
  ModelParams p;
  p.alpha = alpha;
  p.beta = beta;
  p.u_star = u_star ? *u_star : u_star_fraction.value_or(0.8) * psi_alpha(p);
  return p;
}

RelayKind RunConfig::relay_kind() const {
  switch (relay) {
    case RelayVariant::Sharp:
      return RelayKind::sharp();
    case RelayVariant::Mollified:
      return RelayKind::mollified(epsilon);
    case RelayVariant::PropertyP:
      return RelayKind::property_p();
  }
  return RelayKind::sharp();
}

double RunConfig::resolved_t_max() const {
  if (t_max) return *t_max;
  return 2.0 * compute_constants(params()).T2;
}

GridSpec RunConfig::grid() const {
  return make_grid(dx, dt, x_max, resolved_t_max(), record_x_max);
}

void validate(const RunConfig& c) {
  std::vector<std::string> problems;
  auto require = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  require(c.alpha > 0.0 && std::isfinite(c.alpha), "alpha must be a positive number");
  require(c.beta > 0.0 && std::isfinite(c.beta), "beta must be a positive number");
  require(c.u_star_fraction.has_value() != c.u_star.has_value(),
          "give exactly one of u_star_fraction and u_star");
  if (c.u_star_fraction) {
    require(*c.u_star_fraction > 0.0 && *c.u_star_fraction < 1.0,
            "u_star_fraction must be in (0, 1) for a supercritical threshold");
  }
  if (c.u_star) require(*c.u_star > 0.0, "u_star must be > 0");
  require(c.dx > 0.0, "dx must be > 0");
  require(c.dt > 0.0, "dt must be > 0");
  require(c.x_max > 0.0, "x_max must be > 0");
  if (c.t_max) require(*c.t_max > 0.0, "t_max must be > 0");
  if (c.record_x_max) require(*c.record_x_max > 0.0, "record_x_max must be > 0");
  require(c.snapshot_stride >= 1, "snapshot_stride must be >= 1");
  if (c.relay == RelayVariant::Mollified) require(c.epsilon > 0.0, "epsilon must be > 0");
  require(!c.output_dir.empty(), "output_dir must not be empty");
  require(c.slope_floor > 0.0, "slope_floor must be > 0");
  require(c.rate_floor > 0.0, "rate_floor must be > 0");
  require(c.jump_factor > 0.0, "jump_factor must be > 0");
  require(c.measure_tol >= 0.0 && c.measure_tol < 1.0, "measure_tol must be in [0, 1)");
  if (c.agreement_tol) require(*c.agreement_tol > 0.0, "agreement_tol must be > 0");
  for (const auto& p : c.perturbations) {
    if (p.kind == Perturbation::Kind::Relay && p.relay.variant == RelayVariant::Mollified) {
      require(p.relay.epsilon > 0.0, "perturbation epsilon must be > 0");
    }
  }
  for (const auto& p : c.probes) {
    require(p.x >= 0.0 && p.t > 0.0, "probes need x >= 0 and t > 0");
  }
  if (c.dx > 0.0 && c.dt > 0.0 && c.dt / (c.dx * c.dx) > 1.0) {
    problems.push_back("dt/dx^2 must be <= 1 for the monotone scheme");
  }
  if (problems.empty() && c.alpha > 0.0 && c.beta > 0.0) {
    const ModelParams p = c.params();
    if (!is_supercritical(p)) {
      problems.push_back("u_star must be below Psi(alpha) (not supercritical)");
    } else {
      try {
        validate(c.grid(), p);
      } catch (const Error& e) {
        problems.push_back(e.what());
      }
    }
  }
  if (!problems.empty()) {
    std::ostringstream os;
    os << "invalid configuration:";
    for (const auto& m : problems) os << "\n  - " << m;
    throw Error(ErrorCode::Validation, os.str());
  }
}

RunConfig parse_config(const std::string& text) {
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::ostringstream os;
    os << "config parse error at line " << line_of_offset(text, e.byte > 0 ? e.byte - 1 : 0)
       << ": " << e.what();
    throw Error(ErrorCode::Parse, os.str());
  }
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "config must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!known_keys().count(key)) key_error(text, key, "unknown key");
  }

  RunConfig c;
  if (doc.contains("schema_version")) {
    const Json& v = doc.at("schema_version");
    if (!v.is_number_integer() || v.get<int>() != RunConfig::kSchemaVersion) {
      key_error(text, "schema_version",
                "unsupported version (expected " + std::to_string(RunConfig::kSchemaVersion) + ")");
    }
  }
  if (doc.contains("alpha")) c.alpha = number(doc, text, "alpha");
  if (doc.contains("beta")) c.beta = number(doc, text, "beta");
  if (doc.contains("u_star")) {
    c.u_star = optional_number(doc, text, "u_star");
    if (c.u_star) c.u_star_fraction.reset();
  }
  if (doc.contains("u_star_fraction")) c.u_star_fraction = optional_number(doc, text, "u_star_fraction");
  if (!c.u_star && !c.u_star_fraction) c.u_star_fraction = 0.8;
  if (doc.contains("dx")) c.dx = number(doc, text, "dx");
  if (doc.contains("dt")) c.dt = number(doc, text, "dt");
  if (doc.contains("x_max")) c.x_max = number(doc, text, "x_max");
  if (doc.contains("t_max")) c.t_max = optional_number(doc, text, "t_max");
  if (doc.contains("record_x_max")) c.record_x_max = optional_number(doc, text, "record_x_max");
  if (doc.contains("snapshot_stride")) {
    const Json& v = doc.at("snapshot_stride");
    if (!v.is_number_integer() || v.get<long long>() < 1) {
      key_error(text, "snapshot_stride", "expected a positive integer");
    }
    c.snapshot_stride = v.get<std::size_t>();
  }
  try {
    if (doc.contains("scheme")) c.scheme = parse_scheme(string_value(doc, text, "scheme"));
    if (doc.contains("relay")) c.relay = parse_relay_variant(string_value(doc, text, "relay"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Parse) throw;
    throw Error(ErrorCode::Parse, e.what());
  }
  if (doc.contains("epsilon")) c.epsilon = number(doc, text, "epsilon");
  if (doc.contains("output_dir")) c.output_dir = string_value(doc, text, "output_dir");
  if (doc.contains("probes")) {
    const Json& v = doc.at("probes");
    if (!v.is_array()) key_error(text, "probes", "expected an array");
    for (const Json& item : v) {
      if (!item.is_object() || item.size() != 2 || !item.contains("x") || !item.contains("t") ||
          !item.at("x").is_number() || !item.at("t").is_number()) {
        key_error(text, "probes", "each probe is {\"x\": number, \"t\": number}");
      }
      c.probes.push_back({item.at("x").get<double>(), item.at("t").get<double>()});
    }
  }
  if (doc.contains("slope_floor")) c.slope_floor = number(doc, text, "slope_floor");
  if (doc.contains("rate_floor")) c.rate_floor = number(doc, text, "rate_floor");
  if (doc.contains("jump_factor")) c.jump_factor = number(doc, text, "jump_factor");
  if (doc.contains("measure_tol")) c.measure_tol = number(doc, text, "measure_tol");
  if (doc.contains("agreement_tol")) c.agreement_tol = optional_number(doc, text, "agreement_tol");
  if (doc.contains("perturbations")) {
    const Json& v = doc.at("perturbations");
    if (!v.is_array()) key_error(text, "perturbations", "expected an array");
    c.perturbations.clear();
    for (const Json& item : v) c.perturbations.push_back(parse_perturbation(item, text));
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Json to_json(const RunConfig& c) {
  auto opt = [](const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); };
  Json j;
  j["schema_version"] = RunConfig::kSchemaVersion;
  j["alpha"] = c.alpha;
  j["beta"] = c.beta;
  if (c.u_star) {
    j["u_star"] = *c.u_star;
  } else {
    j["u_star_fraction"] = opt(c.u_star_fraction);
  }
  j["dx"] = c.dx;
  j["dt"] = c.dt;
  j["x_max"] = c.x_max;
  j["t_max"] = opt(c.t_max);
  j["record_x_max"] = opt(c.record_x_max);
  j["snapshot_stride"] = c.snapshot_stride;
  j["scheme"] = to_string(c.scheme);
  j["relay"] = variant_name(c.relay);
  j["epsilon"] = c.epsilon;
  j["output_dir"] = c.output_dir;
  j["probes"] = Json::array();
  for (const auto& p : c.probes) j["probes"].push_back({{"x", p.x}, {"t", p.t}});
  j["slope_floor"] = c.slope_floor;
  j["rate_floor"] = c.rate_floor;
  j["jump_factor"] = c.jump_factor;
  j["measure_tol"] = c.measure_tol;
  j["agreement_tol"] = opt(c.agreement_tol);
  j["perturbations"] = Json::array();
  for (const auto& p : c.perturbations) {
    if (p.kind == Perturbation::Kind::Grid) {
      j["perturbations"].push_back({{"kind", "grid"}});
    } else if (p.relay.variant == RelayVariant::Mollified) {
      j["perturbations"].push_back({{"kind", "mollified"}, {"epsilon", p.relay.epsilon}});
    } else {
      j["perturbations"].push_back({{"kind", variant_name(p.relay.variant)}});
    }
  }
  return j;
}

}  // namespace hhmo
