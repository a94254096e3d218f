#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace hhmo {

enum class RelayVariant { Sharp, Mollified, PropertyP };

/// Which switching law the spatially distributed relay follows.
///
/// Sharp: p = H(a) with H(0) = 0. Mollified: p = S(a/epsilon) with the cubic
/// smoothstep S. PropertyP: sharp, but the accumulator stops integrating at
/// each node once the source has passed it (t > x^2/alpha^2).
struct RelayKind {
  RelayVariant variant = RelayVariant::Sharp;
  double epsilon = 0.0;

  static RelayKind sharp() { return {RelayVariant::Sharp, 0.0}; }
  static RelayKind mollified(double eps) { return {RelayVariant::Mollified, eps}; }
  static RelayKind property_p() { return {RelayVariant::PropertyP, 0.0}; }

  bool operator==(const RelayKind&) const = default;
};

/// Throws Error{Validation} for a mollified kind with epsilon <= 0.
void validate(const RelayKind& kind);

std::string to_string(const RelayKind& kind);

/// "sharp", "mollified" or "property_p"; inverse of parse_relay_variant.
std::string variant_name(RelayVariant variant);

/// Parses "sharp", "property_p" or "mollified" (epsilon supplied separately).
RelayVariant parse_relay_variant(const std::string& name);

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

/// Per-node relay memory.
struct RelayState {
  std::vector<double> accumulator;    // int_0^t (u - u*)_+ ds
  std::vector<double> p_value;        // in [0, 1]
  std::vector<double> ignition_time;  // NaN until the accumulator first grows

  std::size_t size() const { return accumulator.size(); }
};

/// 3s^2 - 2s^3 clamped to [0, 1].
double smoothstep(double s);

/// A relay bank over a fixed set of nodes.
class Relay {
 public:
  /// `freeze_time[i]` is x_i^2/alpha^2; only used by PropertyP.
  Relay(RelayKind kind, double u_star, std::vector<double> freeze_time);

  RelayState initial_state() const;

  /// a += (u - u*)_+ dt at every node (PropertyP: only where t_new <= freeze
  /// time). Records the ignition time as t_new on the first strict increase.
  /// Returns the indices that ignited during this call.
  std::vector<std::size_t> accumulate(RelayState& state, std::span<const double> u,
                                      double dt, double t_new) const;

  /// p as a function of the accumulator; writes state.p_value and returns it.
  const std::vector<double>& evaluate(RelayState& state) const;

  double value(double accumulator) const;

  const RelayKind& kind() const { return kind_; }
  double threshold() const { return u_star_; }
  std::size_t size() const { return freeze_time_.size(); }

 private:
  RelayKind kind_;
  double u_star_;
  std::vector<double> freeze_time_;
};

}  // namespace hhmo
