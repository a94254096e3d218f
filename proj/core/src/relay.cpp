#include "hhmo/relay.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hhmo/errors.hpp"

namespace hhmo {

void validate(const RelayKind& kind) {
  if (kind.variant == RelayVariant::Mollified &&
      !(kind.epsilon > 0.0 && std::isfinite(kind.epsilon))) {
    throw Error(ErrorCode::Validation, "mollified relay needs epsilon > 0");
  }
}

std::string to_string(const RelayKind& kind) {
  switch (kind.variant) {
    case RelayVariant::Sharp: return "sharp";
    case RelayVariant::PropertyP: return "property_p";
    case RelayVariant::Mollified: {
      std::ostringstream os;
      os << "mollified(" << kind.epsilon << ")";
      return os.str();
    }
  }
  return "unknown";
}

std::string variant_name(RelayVariant variant) {
  switch (variant) {
    case RelayVariant::Sharp:
      return "sharp";
    case RelayVariant::Mollified:
      return "mollified";
    case RelayVariant::PropertyP:
      return "property_p";
  }
  return "sharp";
}

RelayVariant parse_relay_variant(const std::string& name) {
  if (name == "sharp") return RelayVariant::Sharp;
  if (name == "mollified") return RelayVariant::Mollified;
  if (name == "property_p" || name == "propertyp" || name == "P") return RelayVariant::PropertyP;
  throw Error(ErrorCode::Validation, "unknown relay kind '" + name + "'");
}

double smoothstep(double s) {
  if (s <= 0.0) return 0.0;
  if (s >= 1.0) return 1.0;
  return s * s * (3.0 - 2.0 * s);
}

Relay::Relay(RelayKind kind, double u_star, std::vector<double> freeze_time)
    : kind_(kind), u_star_(u_star), freeze_time_(std::move(freeze_time)) {
  validate(kind_);
}

RelayState Relay::initial_state() const {
  RelayState s;
  s.accumulator.assign(size(), 0.0);
  s.p_value.assign(size(), 0.0);
  s.ignition_time.assign(size(), kUnset);
  return s;
}

std::vector<std::size_t> Relay::accumulate(RelayState& state, std::span<const double> u,
                                           double dt, double t_new) const {
  if (u.size() != state.size() || state.size() != size()) {
    std::ostringstream os;
    os << "relay field length " << u.size() << " does not match state length "
       << state.size();
    throw Error(ErrorCode::LengthMismatch, os.str());
  }
  if (!(dt > 0.0)) throw Error(ErrorCode::Validation, "relay step needs dt > 0");
  std::vector<std::size_t> ignited;
  const bool capped = kind_.variant == RelayVariant::PropertyP;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (capped && t_new > freeze_time_[i]) continue;
    const double excess = u[i] - u_star_;
    if (!(excess > 0.0)) continue;
    state.accumulator[i] += excess * dt;
    if (std::isnan(state.ignition_time[i])) {
      state.ignition_time[i] = t_new;
      ignited.push_back(i);
    }
  }
  return ignited;
}

double Relay::value(double a) const {
  if (kind_.variant == RelayVariant::Mollified) return smoothstep(a / kind_.epsilon);
  return a > 0.0 ? 1.0 : 0.0;
}

const std::vector<double>& Relay::evaluate(RelayState& state) const {
  for (std::size_t i = 0; i < state.size(); ++i) {
    state.p_value[i] = value(state.accumulator[i]);
  }
  return state.p_value;
}

}  // namespace hhmo
