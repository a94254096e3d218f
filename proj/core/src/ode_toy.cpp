#include "hhmo/ode_toy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hhmo/errors.hpp"

namespace hhmo::toy {

std::string to_string(Forcing f) { return f == Forcing::Constant ? "constant" : "linear"; }

Forcing parse_forcing(const std::string& name) {
  if (name == "constant") return Forcing::Constant;
  if (name == "linear") return Forcing::Linear;
  throw Error(ErrorCode::Validation, "unknown forcing '" + name + "' (constant|linear)");
}

double forcing_value(Forcing f, double t) { return f == Forcing::Constant ? 0.5 : t; }

void validate(const ToyConfig& config) {
  std::ostringstream os;
  bool bad = false;
  if (!(config.horizon > 0.0)) {
    os << " horizon must be > 0;";
    bad = true;
  }
  if (!(config.dt > 0.0)) {
    os << " dt must be > 0;";
    bad = true;
  }
  if (!(config.tolerance() > 0.0)) {
    os << " tol must be > 0;";
    bad = true;
  }
  if (bad) throw Error(ErrorCode::Validation, "invalid toy config:" + os.str());
}

Trajectory integrate(const ToyConfig& config, SwitchPolicy policy) {
  validate(config);
  const double pu = policy.pu_switches_at_zero ? 1.0 : 0.0;
  const double pv = policy.pv_switches_at_zero ? 1.0 : 0.0;
  auto rhs = [&](double t, double u, double v, double& du, double& dv) {
    const double common = forcing_value(config.forcing, t) + u + v;
    du = common - pu;
    dv = common - pv;
  };

  Trajectory tr;
  const auto steps = static_cast<std::size_t>(std::ceil(config.horizon / config.dt - 1e-9));
  tr.t.reserve(steps + 1);
  tr.u.reserve(steps + 1);
  tr.v.reserve(steps + 1);
  double t = 0.0, u = 0.0, v = 0.0;
  tr.t.push_back(t);
  tr.u.push_back(u);
  tr.v.push_back(v);
  for (std::size_t n = 0; n < steps; ++n) {
    const double t_next = std::min(config.horizon, static_cast<double>(n + 1) * config.dt);
    const double h = t_next - t;
    double k1u, k1v, k2u, k2v, k3u, k3v, k4u, k4v;
    rhs(t, u, v, k1u, k1v);
    rhs(t + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v, k2u, k2v);
    rhs(t + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v, k3u, k3v);
    rhs(t + h, u + h * k3u, v + h * k3v, k4u, k4v);
    u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
    v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    t = t_next;
    tr.t.push_back(t);
    tr.u.push_back(u);
    tr.v.push_back(v);
  }
  return tr;
}

namespace {

void check_component(const std::vector<double>& t, const std::vector<double>& values,
                     bool switched, double tol, const char* name, Feasibility& out) {
  if (values.empty()) return;
  std::optional<std::size_t> bad;
  std::string reason;
  if (switched) {
    if (values.front() < -tol) {
      bad = 0;
      reason = "switched at t=0 without reaching the threshold";
    }
  } else {
    double accumulated = 0.0;
    for (std::size_t n = 1; n < values.size(); ++n) {
      accumulated += 0.5 * (std::max(values[n - 1], 0.0) + std::max(values[n], 0.0)) *
                     (t[n] - t[n - 1]);
      if (accumulated > tol) {
        bad = n;
        reason = "exceeds the threshold while its relay stays off";
        break;
      }
    }
  }
  if (bad && (!out.violation_sample || *bad < *out.violation_sample)) {
    out.feasible = false;
    out.violation_sample = bad;
    out.violation_time = t[*bad];
    out.component = name;
    out.reason = reason;
  }
}

}  // namespace

Feasibility feasible(const Trajectory& trajectory, SwitchPolicy policy, double tol) {
  Feasibility out;
  check_component(trajectory.t, trajectory.u, policy.pu_switches_at_zero, tol, "u", out);
  check_component(trajectory.t, trajectory.v, policy.pv_switches_at_zero, tol, "v", out);
  return out;
}

FeasibilityTable enumerate(const ToyConfig& config) {
  validate(config);
  FeasibilityTable table;
  table.config = config;
  const std::array<SwitchPolicy, 4> policies{
      {{false, false}, {true, false}, {false, true}, {true, true}}};
  for (std::size_t k = 0; k < policies.size(); ++k) {
    const auto tr = integrate(config, policies[k]);
    PolicyRow& row = table.rows[k];
    row.policy = policies[k];
    row.result = feasible(tr, policies[k], config.tolerance());
    row.u_end = tr.u.back();
    row.v_end = tr.v.back();
    if (row.result.feasible) ++table.feasible_count;
  }
  table.verdict = table.feasible_count == 1   ? "unique"
                  : table.feasible_count > 1 ? "non-unique"
                                             : "none";
  return table;
}

std::string format_table(const FeasibilityTable& table) {
  std::ostringstream os;
  os << "forcing " << to_string(table.config.forcing) << ", T = " << table.config.horizon
     << ", dt = " << table.config.dt << "\n";
  os << "  p_u    p_v    feasible  u(T)          v(T)          violation\n";
  char line[160];
  for (const auto& row : table.rows) {
    std::string violation = "-";
    if (!row.result.feasible) {
      std::ostringstream v;
      v << row.result.component << " at t=" << row.result.violation_time;
      violation = v.str();
    }
    std::snprintf(line, sizeof line, "  %-6s %-6s %-9s %-13.6g %-13.6g %s\n",
                  row.policy.pu_switches_at_zero ? "true" : "false",
                  row.policy.pv_switches_at_zero ? "true" : "false",
                  row.result.feasible ? "yes" : "no", row.u_end, row.v_end, violation.c_str());
    os << line;
  }
  os << "feasible policies: " << table.feasible_count << " (" << table.verdict << ")\n";
  return os.str();
}

}  // namespace hhmo::toy
