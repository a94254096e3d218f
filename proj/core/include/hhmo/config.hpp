#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hhmo/duhamel.hpp"
#include "hhmo/model.hpp"
#include "hhmo/relay.hpp"
#include "hhmo/solver.hpp"
#include "hhmo/uniqueness.hpp"

namespace hhmo {

using Json = nlohmann::ordered_json;

/// Everything a CLI subcommand needs. Parsed from a flat JSON object:
///
///   schema_version     1
///   alpha, beta        model parameters (default 1, 1)
///   u_star_fraction    u* / Psi(alpha), in (0, 1) (default 0.8)
///   u_star             absolute threshold; excludes u_star_fraction
///   dx, dt, x_max      grid (default 2.5e-3, 2.5e-6, 6)
///   t_max              final time; null means 2 T2
///   record_x_max       only nodes up to here are stored; null means x_max
///   snapshot_stride    steps between stored snapshots (default 400)
///   scheme             "deficit" | "source_deposition"
///   relay              "sharp" | "mollified" | "property_p"
///   epsilon            mollifier width, used by "mollified" (default 1e-3)
///   output_dir         default "out"
///   probes             [{"x": .., "t": ..}, ...]; empty selects defaults
///   slope_floor, rate_floor, jump_factor, measure_tol
///   agreement_tol      null means measured (10 x self-refinement error)
///   perturbations      [{"kind": "mollified", "epsilon": ..} | {"kind": "grid"}
///                       | {"kind": "sharp"} | {"kind": "property_p"}]
///
/// Unknown keys are rejected.
struct RunConfig {
  static constexpr int kSchemaVersion = 1;

  double alpha = 1.0;
  double beta = 1.0;
  std::optional<double> u_star_fraction = 0.8;
  std::optional<double> u_star;
  double dx = 2.5e-3;
  double dt = 2.5e-6;
  double x_max = 6.0;
  std::optional<double> t_max;
  std::optional<double> record_x_max;
  std::size_t snapshot_stride = 400;
  Scheme scheme = Scheme::Deficit;
  RelayVariant relay = RelayVariant::Sharp;
  double epsilon = 1e-3;
  std::string output_dir = "out";
  std::vector<Probe> probes;
  double slope_floor = 1e-4;
  double rate_floor = 1e-4;
  double jump_factor = 50.0;
  double measure_tol = 0.0;
  std::optional<double> agreement_tol;
  std::vector<Perturbation> perturbations = default_perturbations();

  static std::vector<Perturbation> default_perturbations();

  ModelParams params() const;
  RelayKind relay_kind() const;
  /// t_max, or 2 T2 when unset.
  double resolved_t_max() const;
  GridSpec grid() const;

  bool operator==(const RunConfig&) const = default;
};

/// Throws Error{Parse} (with line number or key) for malformed input and
/// Error{Validation} listing every violated constraint.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Throws Error{Validation} listing all violations.
void validate(const RunConfig& config);

/// Effective configuration; parse_config(to_json(c).dump()) == c.
Json to_json(const RunConfig& config);

}  // namespace hhmo
