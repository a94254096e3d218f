#include "hhmo/front.hpp"

#include <algorithm>
#include <cmath>

#include "hhmo/errors.hpp"

namespace hhmo {

std::size_t FrontFunction::count() const {
  return static_cast<std::size_t>(
      std::count_if(ell.begin(), ell.end(), [](double v) { return v == v; }));
}

std::vector<IndexRange> front_ranges(const FrontFunction& front) {
  std::vector<IndexRange> out;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (!front.contains(i)) continue;
    if (!out.empty() && out.back().last + 1 == i) {
      out.back().last = i;
    } else {
      out.push_back({i, i});
    }
  }
  return out;
}

double parabola_tolerance(double x, double dx, double dt, double alpha) {
  return std::max(2.0 * dt, 4.0 * dx * x / (alpha * alpha));
}

double crossing_time(const IgnitionData& ignition, double u_star, double dt) {
  const double now = ignition.u_lags[0];
  const double before = ignition.u_lags[1];
  if (!(before == before) || !(now > before)) return ignition.time;
  const double fraction = std::clamp((now - u_star) / (now - before), 0.0, 1.0);
  return ignition.time - fraction * dt;
}

FrontFunction extract_front(const SolutionRecord& record) {
  FrontFunction f;
  f.dx = record.grid.dx;
  f.dt = record.grid.dt;
  const std::size_t n = record.ignition.size();
  f.ell.assign(n, kUnset);
  f.crossing.assign(n, kUnset);
  f.u_residual.assign(n, kUnset);
  bool any = false;
  for (std::size_t i = 0; i < n; ++i) {
    const IgnitionData& d = record.ignition[i];
    if (!d.ignited()) continue;
    any = true;
    f.ell[i] = d.time;
    f.crossing[i] = crossing_time(d, record.params.u_star, f.dt);
    const double r = std::abs(d.u() - record.params.u_star);
    f.u_residual[i] = r;
    f.max_residual_all = std::max(f.max_residual_all, r);
    const double x = f.x(i);
    const double parabola = x * x / (record.params.alpha * record.params.alpha);
    const bool degenerate =
        std::abs(d.time - parabola) <= parabola_tolerance(x, f.dx, f.dt, record.params.alpha);
    if (!degenerate && r > f.max_residual) {
      f.max_residual = r;
      f.max_residual_node = i;
    }
  }
  if (!any) throw Error(ErrorCode::EmptyFront, "no node ignited in the record");
  return f;
}

RingSegmentation segment_pattern(std::span<const int> p_star, double dx, double measure_tol,
                                 bool open_end) {
  RingSegmentation seg;
  seg.analyzed_nodes = p_star.size();
  if (p_star.empty()) return seg;

  struct Run {
    int value;
    std::size_t first, last;
  };
  std::vector<Run> runs;
  for (std::size_t i = 0; i < p_star.size(); ++i) {
    const int v = p_star[i] != 0 ? 1 : 0;
    if (!runs.empty() && runs.back().value == v) {
      runs.back().last = i;
    } else {
      runs.push_back({v, i, i});
    }
  }

  // Absorb short interior runs: the definitions ignore sets of measure zero.
  const double min_len = measure_tol * static_cast<double>(p_star.size());
  if (min_len > 0.0) {
    bool changed = true;
    while (changed && runs.size() > 2) {
      changed = false;
      for (std::size_t k = 1; k + 1 < runs.size(); ++k) {
        const double len = static_cast<double>(runs[k].last - runs[k].first + 1);
        if (len < min_len) {
          runs[k - 1].last = runs[k + 1].last;
          runs.erase(runs.begin() + static_cast<std::ptrdiff_t>(k),
                     runs.begin() + static_cast<std::ptrdiff_t>(k + 2));
          changed = true;
          break;
        }
      }
    }
  }

  const double x_end = static_cast<double>(p_star.size() - 1) * dx;
  if (runs.front().value != 1) {
    // No ring at the origin: there is no ring domain.
    seg.X_star = 0.0;
    return seg;
  }
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const Run& r = runs[k];
    if (r.value == 1) {
      seg.rings.push_back({static_cast<double>(r.first) * dx, static_cast<double>(r.last) * dx,
                           r.first, r.last});
    } else {
      const double begin = static_cast<double>(r.first - 1) * dx;
      const bool trailing = k + 1 == runs.size();
      const double end = trailing ? (open_end ? std::numeric_limits<double>::infinity() : x_end)
                                  : static_cast<double>(r.last + 1) * dx;
      seg.interrings.push_back({begin, end, r.first, r.last});
    }
  }
  seg.X_star = x_end;
  seg.reached_data_end = true;
  return seg;
}

RingSegmentation segment_rings(const SolutionRecord& record, double measure_tol) {
  if (record.snapshots() == 0) {
    throw Error(ErrorCode::InsufficientSnapshots, "record has no snapshots");
  }
  const std::size_t k = record.snapshots() - 1;
  const double reach = record.params.alpha * std::sqrt(record.times[k]);
  std::vector<int> pattern;
  for (std::size_t i = 0; i < record.n_nodes && record.x(i) <= reach; ++i) {
    pattern.push_back(record.p_value(k, i) >= 0.5 ? 1 : 0);
  }
  // Beyond the analysed range the outcome is unknown, so a trailing ring is
  // closed at the data end and a trailing interring stays open.
  return segment_pattern(pattern, record.grid.dx, measure_tol, true);
}

std::string to_string(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Regular:
      return "regular";
    case BoundaryClass::Degenerate:
      return "degenerate";
    case BoundaryClass::Jump:
      return "jump";
  }
  return "unknown";
}

BoundaryClassification classify_boundary(const FrontFunction& front, const ModelParams& params,
                                         double jump_factor) {
  BoundaryClassification out;
  out.node_class.assign(front.size(), std::nullopt);
  const auto ranges = front_ranges(front);

  std::vector<double> increments;
  for (const auto& r : ranges) {
    for (std::size_t i = r.first; i < r.last; ++i) {
      increments.push_back(front.ell[i + 1] - front.ell[i]);
    }
  }
  if (!increments.empty()) {
    auto mid = increments.begin() + static_cast<std::ptrdiff_t>(increments.size() / 2);
    std::nth_element(increments.begin(), mid, increments.end());
    out.median_increment = *mid;
  }

  const double a2 = params.alpha * params.alpha;
  for (const auto& r : ranges) {
    for (std::size_t i = r.first; i <= r.last; ++i) {
      const double x = front.x(i);
      const double tol = parabola_tolerance(x, front.dx, front.dt, params.alpha);
      BoundaryClass c = BoundaryClass::Regular;
      if (std::abs(front.ell[i] - x * x / a2) <= tol) {
        c = BoundaryClass::Degenerate;
      } else if (i < r.last && out.median_increment > 0.0 &&
                 front.ell[i + 1] - front.ell[i] > jump_factor * out.median_increment) {
        c = BoundaryClass::Jump;
      }
      out.node_class[i] = c;
      switch (c) {
        case BoundaryClass::Regular:
          ++out.regular;
          break;
        case BoundaryClass::Degenerate:
          ++out.degenerate;
          break;
        case BoundaryClass::Jump:
          ++out.jump;
          break;
      }
    }
    const double x = front.x(r.first);
    RingStartCheck check;
    check.node = r.first;
    check.ell = front.ell[r.first];
    check.parabola = x * x / a2;
    check.on_parabola = std::abs(check.ell - check.parabola) <=
                        parabola_tolerance(x, front.dx, front.dt, params.alpha);
    out.ring_starts.push_back(check);
  }
  return out;
}

SlopeCheckReport front_slope_check(const FrontFunction& front, const ModelConstants& constants,
                                   double slack) {
  SlopeCheckReport rep;
  rep.slack = slack;
  const auto ranges = front_ranges(front);
  if (ranges.empty()) return rep;
  std::vector<std::size_t> nodes;
  for (std::size_t i = ranges.front().first; i <= ranges.front().last; ++i) {
    if (front.x(i) <= constants.L && front.ell[i] <= constants.T2) nodes.push_back(i);
  }
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const double y1 = front.x(nodes[a]);
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double y2 = front.x(nodes[b]);
      const double margin = (front.ell[nodes[b]] - front.ell[nodes[a]]) -
                            constants.C_ell * (y2 * y2 - y1 * y1);
      ++rep.pairs;
      if (margin < rep.worst_margin) {
        rep.worst_margin = margin;
        rep.worst_first = nodes[a];
        rep.worst_second = nodes[b];
      }
    }
  }
  rep.holds = rep.pairs == 0 || rep.worst_margin >= -slack;
  return rep;
}

MonotonicityReport front_monotonicity(const FrontFunction& front) {
  MonotonicityReport rep;
  for (const auto& r : front_ranges(front)) {
    for (std::size_t i = r.first; i < r.last; ++i) {
      ++rep.pairs;
      const double d = front.ell[i + 1] - front.ell[i];
      if (d == 0.0) {
        ++rep.ties;
        rep.flagged.push_back(i);
      } else if (d < 0.0) {
        ++rep.decreases;
        rep.flagged.push_back(i);
      }
    }
  }
  return rep;
}

EnvelopeReport front_envelope(const FrontFunction& front, const ModelParams& params,
                              double alpha_star, double tol) {
  EnvelopeReport rep;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (!front.contains(i)) continue;
    ++rep.nodes;
    const double y = front.x(i);
    const double lower = (y / alpha_star) * (y / alpha_star) - tol;
    const double upper = (y / params.alpha) * (y / params.alpha) + tol;
    const double lo_margin = front.ell[i] - lower;
    const double hi_margin = upper - front.ell[i];
    rep.worst_lower_margin = std::min(rep.worst_lower_margin, lo_margin);
    rep.worst_upper_margin = std::min(rep.worst_upper_margin, hi_margin);
    if (lo_margin < 0.0) ++rep.below;
    if (hi_margin < 0.0) ++rep.above;
  }
  return rep;
}

double canonical_p(const FrontFunction& front, std::size_t node, double t) {
  return front.contains(node) && t >= front.ell[node] ? 1.0 : 0.0;
}

CanonicalPReport canonical_p_check(const SolutionRecord& record, const FrontFunction& front) {
  CanonicalPReport rep;
  const std::size_t n = std::min(record.n_nodes, front.size());
  // Snapshot times are multiples of dt computed independently of the
  // ignition bookkeeping; compare on the step index to avoid rounding.
  for (std::size_t k = 0; k < record.snapshots(); ++k) {
    const double t = record.times[k];
    for (std::size_t i = 0; i < n; ++i) {
      ++rep.checked;
      double expected = 0.0;
      if (front.contains(i)) {
        const double lag = t - front.ell[i];
        expected = lag >= -1e-9 * record.grid.dt ? 1.0 : 0.0;
      }
      if (record.p_value(k, i) != expected) {
        ++rep.mismatches;
        if (!front.contains(i) || std::abs(t - front.ell[i]) > record.grid.dt * (1.0 + 1e-9)) {
          ++rep.mismatches_outside_window;
        }
      }
    }
  }
  return rep;
}

FrozenReport frozen_above_parabola(const SolutionRecord& record) {
  FrozenReport rep;
  const double a2 = record.params.alpha * record.params.alpha;
  for (std::size_t i = 0; i < record.n_nodes; ++i) {
    const double x = record.x(i);
    const double t_pass = x * x / a2;
    std::optional<double> reference;
    for (std::size_t k = 0; k < record.snapshots(); ++k) {
      if (!(record.times[k] > t_pass)) continue;
      const double p = record.p_value(k, i);
      if (!reference) {
        reference = p;
        continue;
      }
      ++rep.checked;
      if (p != *reference) {
        ++rep.violations;
        if (!rep.first_violation_node) rep.first_violation_node = i;
      }
    }
  }
  return rep;
}

}  // namespace hhmo
