#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hhmo::toy {

/// Two linearly coupled relay ODEs with threshold 0:
///   u' = f(t) + u + v - p_u,   v' = f(t) + u + v - p_v,   u(0) = v(0) = 0.
enum class Forcing { Constant, Linear };

std::string to_string(Forcing f);
Forcing parse_forcing(const std::string& name);

/// Constant: f = 1/2. Linear: f = t.
double forcing_value(Forcing f, double t);

struct ToyConfig {
  Forcing forcing = Forcing::Constant;
  double horizon = 1.0;
  double dt = 1e-4;
  /// Feasibility tolerance; nullopt means 1e-9 * horizon.
  std::optional<double> tol{};

  double tolerance() const { return tol.value_or(1e-9 * horizon); }
};

/// Throws Error{Validation} unless horizon, dt and the tolerance are positive.
void validate(const ToyConfig& config);

/// Each relay either switches to 1 at t = 0 or stays 0.
struct SwitchPolicy {
  bool pu_switches_at_zero = false;
  bool pv_switches_at_zero = false;

  bool operator==(const SwitchPolicy&) const = default;
};

struct Trajectory {
  std::vector<double> t, u, v;
};

/// Classical RK4 with fixed step; the last step is shortened to land on T.
Trajectory integrate(const ToyConfig& config, SwitchPolicy policy);

struct Feasibility {
  bool feasible = true;
  /// First offending sample and component ("u" or "v").
  std::optional<std::size_t> violation_sample;
  double violation_time = 0.0;
  std::string component;
  std::string reason;
};

/// A component held at p = 0 must keep int_0^t (.)_+ ds <= tol; one switched
/// at t = 0 must have touched the threshold there (value >= -tol).
Feasibility feasible(const Trajectory& trajectory, SwitchPolicy policy, double tol);

struct PolicyRow {
  SwitchPolicy policy;
  Feasibility result;
  double u_end = 0.0;
  double v_end = 0.0;
};

struct FeasibilityTable {
  ToyConfig config;
  std::array<PolicyRow, 4> rows;  // (F,F), (T,F), (F,T), (T,T)
  std::size_t feasible_count = 0;
  /// "unique" when exactly one policy is feasible, "non-unique" when several,
  /// "none" otherwise.
  std::string verdict;
};

FeasibilityTable enumerate(const ToyConfig& config);

/// Aligned plain-text rendering of the table.
std::string format_table(const FeasibilityTable& table);

}  // namespace hhmo::toy
