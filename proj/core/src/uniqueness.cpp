#include "hhmo/uniqueness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>

#include "hhmo/errors.hpp"

namespace hhmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool same(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), 1.0); }

int order_sign(double ell1, double ell2, double threshold) {
  const double a = ell1 == ell1 ? ell1 : kInf;
  const double b = ell2 == ell2 ? ell2 : kInf;
  if (a == b) return 0;
  if (a == kInf) return 1;
  if (b == kInf) return -1;
  if (a - b > threshold) return 1;
  if (b - a > threshold) return -1;
  return 0;
}

double ignition_at(const SolutionRecord& rec, std::size_t i) {
  return i < rec.ignition.size() ? rec.ignition[i].time : kUnset;
}

// Ignition time of `rec` at position x by linear interpolation between the
// bracketing nodes; unset unless both ignited.
double ignition_interp(const SolutionRecord& rec, double x) {
  const double s = x / rec.grid.dx;
  const auto j = static_cast<std::size_t>(std::floor(s + 1e-9));
  const double theta = s - static_cast<double>(j);
  if (theta < 1e-9) return ignition_at(rec, j);
  const double a = ignition_at(rec, j);
  const double b = ignition_at(rec, j + 1);
  if (a != a || b != b) return kUnset;
  return (1.0 - theta) * a + theta * b;
}

void finish(ComparisonReport& rep, std::size_t window_nodes) {
  rep.window_nodes = window_nodes;
  rep.witness = find_entanglement(rep.front_order, rep.dx, window_nodes);
  rep.entangled = rep.witness.has_value();
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    if (rep.sup_diff[k] > rep.agreement_tol) {
      rep.divergence_time = rep.times[k];
      break;
    }
  }
}

struct DiffAccumulator {
  double sup = 0.0;
  double energy = 0.0;
  double energy_reverse = 0.0;

  void add(double d, double weight) {
    sup = std::max(sup, std::abs(d));
    if (d > 0.0) {
      energy += weight * d * d;
    } else {
      energy_reverse += weight * d * d;
    }
  }
};

}  // namespace

double ComparisonReport::max_sup_diff(double t_end) const {
  double m = 0.0;
  for (std::size_t k = 0; k < times.size() && times[k] <= t_end * (1.0 + 1e-12); ++k) {
    m = std::max(m, sup_diff[k]);
  }
  return m;
}

std::optional<EntanglementWitness> find_entanglement(std::span<const int> order, double dx,
                                                     std::size_t window_nodes) {
  const std::size_t w = std::max<std::size_t>(window_nodes, 2);
  // Slide a window and track the most recent node of each sign.
  std::optional<std::size_t> last_pos, last_neg;
  for (std::size_t i = 0; i < order.size(); ++i) {
    if (order[i] > 0) last_pos = i;
    if (order[i] < 0) last_neg = i;
    if (last_pos && last_neg) {
      const std::size_t lo = std::min(*last_pos, *last_neg);
      if (i - lo + 1 <= w) {
        EntanglementWitness wit;
        wit.first_node = lo;
        wit.last_node = i;
        wit.x_begin = static_cast<double>(lo) * dx;
        wit.x_end = static_cast<double>(i) * dx;
        return wit;
      }
    }
  }
  return std::nullopt;
}

ComparisonReport compare(const SolutionRecord& first, const SolutionRecord& second,
                         double agreement_tol, std::size_t window_nodes) {
  if (!same(first.grid.dx, second.grid.dx) || !same(first.grid.dt, second.grid.dt) ||
      first.n_nodes != second.n_nodes || first.times.size() != second.times.size()) {
    std::ostringstream os;
    os << "records differ in grid: dx " << first.grid.dx << " vs " << second.grid.dx << ", dt "
       << first.grid.dt << " vs " << second.grid.dt << ", nodes " << first.n_nodes << " vs "
       << second.n_nodes << ", snapshots " << first.snapshots() << " vs " << second.snapshots();
    throw Error(ErrorCode::GridMismatch, os.str());
  }
  for (std::size_t k = 0; k < first.times.size(); ++k) {
    if (!same(first.times[k], second.times[k])) {
      throw Error(ErrorCode::GridMismatch, "records have different snapshot times");
    }
  }

  ComparisonReport rep;
  rep.dx = first.grid.dx;
  rep.agreement_tol = agreement_tol;
  const std::size_t n = first.n_nodes;
  for (std::size_t k = 0; k < first.snapshots(); ++k) {
    DiffAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i + 1 == n) ? 0.5 * rep.dx : rep.dx;
      acc.add(first.u_value(k, i) - second.u_value(k, i), w);
    }
    rep.times.push_back(first.times[k]);
    rep.sup_diff.push_back(acc.sup);
    rep.energy.push_back(acc.energy);
    rep.energy_reverse.push_back(acc.energy_reverse);
  }
  const std::size_t m = std::max(first.ignition.size(), second.ignition.size());
  rep.front_order.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    rep.front_order[i] = order_sign(ignition_at(first, i), ignition_at(second, i), first.grid.dt);
  }
  finish(rep, window_nodes);
  return rep;
}

ComparisonReport compare_interpolated(const SolutionRecord& first, const SolutionRecord& second,
                                      double agreement_tol, std::size_t window_nodes) {
  if (first.snapshots() == 0 || second.snapshots() == 0) {
    throw Error(ErrorCode::InsufficientSnapshots, "comparison needs snapshots in both records");
  }
  const bool first_is_target = first.grid.dx >= second.grid.dx;
  const SolutionRecord& target = first_is_target ? first : second;
  const SolutionRecord& other = first_is_target ? second : first;
  const double sign = first_is_target ? 1.0 : -1.0;

  ComparisonReport rep;
  rep.interpolated = true;
  rep.dx = target.grid.dx;
  rep.agreement_tol = agreement_tol;
  const double x_limit = other.x(other.n_nodes - 1);
  std::size_t n = 0;
  while (n < target.n_nodes && target.x(n) <= x_limit * (1.0 + 1e-12)) ++n;
  const double t_lo = other.times.front();
  const double t_hi = other.times.back() * (1.0 + 1e-12);

  for (std::size_t k = 0; k < target.snapshots(); ++k) {
    const double t = target.times[k];
    if (t < t_lo || t > t_hi) continue;
    DiffAccumulator acc;
    for (std::size_t i = 0; i < n; ++i) {
      const double w = (i == 0 || i + 1 == n) ? 0.5 * rep.dx : rep.dx;
      const double d = target.u_value(k, i) - other.u_interp(target.x(i), t);
      acc.add(sign * d, w);
    }
    rep.times.push_back(t);
    rep.sup_diff.push_back(acc.sup);
    rep.energy.push_back(acc.energy);
    rep.energy_reverse.push_back(acc.energy_reverse);
  }
  const double threshold = std::max(first.grid.dt, second.grid.dt);
  rep.front_order.resize(target.ignition.size());
  for (std::size_t i = 0; i < target.ignition.size(); ++i) {
    const double a = ignition_at(target, i);
    const double b = ignition_interp(other, target.x(i));
    rep.front_order[i] = first_is_target ? order_sign(a, b, threshold)
                                         : order_sign(b, a, threshold);
  }
  finish(rep, window_nodes);
  return rep;
}

MonotonicityVerdict energy_monotonicity_check(const ComparisonReport& report, double t_begin,
                                              double t_end) {
  MonotonicityVerdict v;
  std::optional<std::size_t> prev;
  for (std::size_t k = 0; k < report.times.size(); ++k) {
    const double t = report.times[k];
    if (t < t_begin || t > t_end * (1.0 + 1e-12)) continue;
    if (prev) {
      ++v.checked;
      const double before = report.energy[*prev];
      const double increase = report.energy[k] - before;
      if (increase > 1e-10 + 1e-6 * before && v.monotone) {
        v.monotone = false;
        v.first_violation = k;
        v.violation_time = t;
        v.increase = increase;
      }
    }
    prev = k;
  }
  return v;
}

double self_refinement_error(const SolutionRecord& coarse, const SolutionRecord& fine,
                             double t) {
  auto k = coarse.snapshot_index(t);
  if (!k) throw Error(ErrorCode::InsufficientSnapshots, "no coarse snapshot at the given time");
  const double x_limit = fine.x(fine.n_nodes - 1);
  double err = 0.0;
  for (std::size_t i = 0; i < coarse.n_nodes && coarse.x(i) <= x_limit; ++i) {
    err = std::max(err, std::abs(coarse.u_value(*k, i) - fine.u_interp(coarse.x(i), t)));
  }
  return err;
}

std::string Perturbation::label() const {
  if (kind == Kind::Grid) return "grid(dx/2,dt/4)";
  return to_string(relay);
}

namespace {

GridSpec refined(const GridSpec& g, double t_max) {
  return make_grid(0.5 * g.dx, 0.25 * g.dt, g.x_max, t_max, g.record_x_max);
}

}  // namespace

double measure_agreement_tol(const SweepBase& base, double t_unique) {
  const GridSpec coarse = make_grid(base.grid.dx, base.grid.dt, base.grid.x_max, t_unique,
                                    base.grid.record_x_max);
  const GridSpec fine = refined(coarse, coarse.t_max);
  auto fut = std::async(std::launch::async, [&] {
    return run(base.params, fine, base.relay, fine.n_t);
  });
  const SolutionRecord rc = run(base.params, coarse, base.relay, coarse.n_t);
  const SolutionRecord rf = fut.get();
  return 10.0 * self_refinement_error(rc, rf, rc.times.back());
}

SweepTable perturbation_sweep(const SweepBase& base, std::span<const Perturbation> perturbations,
                              std::optional<double> agreement_tol) {
  SweepTable table;
  const ModelConstants c = compute_constants(base.params);
  table.T_unique = c.T_unique;
  if (perturbations.empty()) {
    table.agreement_tol = agreement_tol.value_or(0.0);
    return table;
  }
  if (agreement_tol) {
    table.agreement_tol = *agreement_tol;
  } else {
    table.agreement_tol = measure_agreement_tol(base, c.T_unique);
    table.agreement_tol_measured = true;
  }

  auto base_future = std::async(std::launch::async, [&] {
    return run(base.params, base.grid, base.relay, base.snapshot_stride);
  });
  std::vector<std::future<SolutionRecord>> runs;
  for (const Perturbation& p : perturbations) {
    runs.push_back(std::async(std::launch::async, [&base, p] {
      if (p.kind == Perturbation::Kind::Grid) {
        return run(base.params, refined(base.grid, base.grid.t_max), base.relay,
                   4 * base.snapshot_stride);
      }
      return run(base.params, base.grid, p.relay, base.snapshot_stride);
    }));
  }
  const SolutionRecord reference = base_future.get();
  for (std::size_t k = 0; k < perturbations.size(); ++k) {
    const SolutionRecord other = runs[k].get();
    const ComparisonReport rep =
        perturbations[k].kind == Perturbation::Kind::Grid
            ? compare_interpolated(reference, other, table.agreement_tol)
            : compare(reference, other, table.agreement_tol);
    SweepRow row;
    row.label = perturbations[k].label();
    row.divergence_time = rep.divergence_time;
    row.max_sup_diff = rep.max_sup_diff(c.T_unique);
    row.energy_monotone = energy_monotonicity_check(rep, 0.0, c.T_unique).monotone;
    row.holds = !rep.divergence_time || *rep.divergence_time >= c.T_unique;
    table.rows.push_back(row);
  }
  return table;
}

}  // namespace hhmo
