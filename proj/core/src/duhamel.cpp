#include "hhmo/duhamel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hhmo/errors.hpp"

namespace hhmo {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double sign(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

template <class F>
double integrate(F&& f, double a, double b) {
  if (!(b > a)) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 21>::integrate(f, a, b, 20, 1e-11);
}

}  // namespace

double erfc_time_integral(double a, double tau) {
  if (!(tau > 0.0)) return 0.0;
  if (a == 0.0) return tau;
  const double z = a / (2.0 * std::sqrt(tau));
  return (tau + 0.5 * a * a) * std::erfc(z) -
         a * std::sqrt(tau / std::numbers::pi) * std::exp(-z * z);
}

double kernel_primitive(double z, double tau) {
  if (!(tau > 0.0) || z == 0.0) return 0.0;
  // int_0^z Phi(w, s) dw = erf(z / (2 sqrt s)) / 2; integrate that in s.
  return 0.5 * sign(z) * (tau - erfc_time_integral(std::abs(z), tau));
}

double kernel_cell_integral(double x, double t, double y_a, double y_b, double s_a,
                            double s_b) {
  const double tau_big = t - s_a;
  const double tau_small = t - s_b;
  auto d = [&](double z) { return kernel_primitive(z, tau_big) - kernel_primitive(z, tau_small); };
  return d(x - y_a) - d(x - y_b);
}

double eval_F1(const SolutionRecord& record, double x, double t) {
  const std::size_t m = record.snapshots();
  if (m < 2) throw Error(ErrorCode::InsufficientSnapshots, "F1 needs at least two snapshots");
  if (t < record.times.front() || t > record.times.back() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "t=" << t << " outside the record [" << record.times.front() << ", "
       << record.times.back() << "]";
    throw Error(ErrorCode::InsufficientSnapshots, os.str());
  }
  const std::size_t n_cells = std::min(record.n_relay, record.n_nodes);
  if (n_cells == 0) return 0.0;
  const double dx = record.grid.dx;
  const bool mollified = record.relay.variant == RelayVariant::Mollified;

  // Cell j is [b_j, b_{j+1}] with b_0 = 0 and b_j = (j - 1/2) dx.
  std::vector<double> bound(n_cells + 1);
  bound[0] = 0.0;
  for (std::size_t j = 1; j <= n_cells; ++j) bound[j] = (static_cast<double>(j) - 0.5) * dx;

  // prim[j] = P(x - b_j, tau) - P(x + b_j, tau): the primitive of a cell and
  // its mirror image share boundary terms between neighbours.
  auto primitive_row = [&](double tau, std::vector<double>& row) {
    for (std::size_t j = 0; j <= n_cells; ++j) {
      row[j] = kernel_primitive(x - bound[j], tau) - kernel_primitive(x + bound[j], tau);
    }
  };
  std::vector<double> row_big(n_cells + 1), row_small(n_cells + 1);

  double total = 0.0;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double s_a = record.times[k];
    if (s_a >= t) break;
    const double s_b = std::min(record.times[k + 1], t);
    const double span = record.times[k + 1] - record.times[k];
    if (k == 0) {
      primitive_row(t - s_a, row_big);
    } else {
      row_big.swap(row_small);
    }
    primitive_row(t - s_b, row_small);

    for (std::size_t i = 0; i < n_cells; ++i) {
      const double u_t = (record.u_value(k + 1, i) - record.u_value(k, i)) / span;
      double weight = 0.0;
      if (mollified) {
        const double p = 0.5 * (record.p_value(k, i) + record.p_value(k + 1, i));
        if (p == 0.0) continue;
        weight = p * ((row_big[i] - row_small[i]) - (row_big[i + 1] - row_small[i + 1]));
      } else {
        const IgnitionData& ign = record.ignition[i];
        if (!ign.ignited()) continue;
        // The switch happens when u crosses u*, so the post-switch rate is
        // measured from u* at the interpolated crossing time.
        const double start = crossing_time(ign, record.params.u_star, record.grid.dt);
        if (start >= s_b) continue;
        if (start <= s_a) {
          weight = (row_big[i] - row_small[i]) - (row_big[i + 1] - row_small[i + 1]);
        } else {
          const double rate =
              (record.u_value(k + 1, i) - record.params.u_star) / (record.times[k + 1] - start);
          total += rate * (kernel_cell_integral(x, t, bound[i], bound[i + 1], start, s_b) +
                           kernel_cell_integral(x, t, -bound[i + 1], -bound[i], start, s_b));
          continue;
        }
      }
      total += u_t * weight;
    }
  }
  return total;
}

namespace {

struct Piece {
  double y0, y1;  // y0 < y1
  double ell0, slope;
};

double slope_at(const std::vector<Piece>& pieces, std::size_t k) {
  return pieces[k].slope;
}

}  // namespace

double eval_F2(const FrontFunction& front, double x, double t, double slope_floor) {
  const double dx = front.dx;
  const double norm = 1.0 / std::sqrt(4.0 * std::numbers::pi);
  double total = 0.0;

  for (const auto& r : front_ranges(front)) {
    std::vector<Piece> pieces;
    const double x_first = front.x(r.first);
    const double x_last = front.x(r.last);
    auto ell = [&](std::size_t i) { return front.crossing_at(i); };
    if (r.first > 0) pieces.push_back({x_first - 0.5 * dx, x_first, ell(r.first), 0.0});
    for (std::size_t i = r.first; i < r.last; ++i) {
      pieces.push_back({front.x(i), front.x(i + 1), ell(i), (ell(i + 1) - ell(i)) / dx});
    }
    pieces.push_back({x_last, x_last + 0.5 * dx, ell(r.last), 0.0});

    for (std::size_t k = 0; k < pieces.size(); ++k) {
      const Piece& pc = pieces[k];
      const double m = pc.slope;
      const double tau0 = t - pc.ell0;
      auto tau_at = [&](double y) { return tau0 - m * (y - pc.y0); };
      auto direct = [&](double y) {
        const double tau = tau_at(y);
        return heat_kernel(x - y, tau) + heat_kernel(x + y, tau);
      };

      if (m == 0.0) {
        if (tau0 > 0.0) total += integrate(direct, pc.y0, pc.y1);
        continue;
      }
      const double y_c = pc.y0 + tau0 / m;
      const bool crosses = y_c >= pc.y0 && y_c <= pc.y1;
      if (!crosses) {
        if (tau_at(0.5 * (pc.y0 + pc.y1)) > 0.0) total += integrate(direct, pc.y0, pc.y1);
        continue;
      }

      if (std::abs(y_c - x) <= 2.0 * dx) {
        // Flat front at the crossing: the kernel integral behaves like
        // int dy / |y - x| and diverges.
        double curvature = 0.0;
        for (std::size_t n : {k - 1, k + 1}) {
          if (n < pieces.size() && pieces[n].slope != 0.0) {
            curvature = std::max(curvature, std::abs(slope_at(pieces, n) - m) / dx);
          }
        }
        if (std::abs(m) <= slope_floor + curvature * dx) return kInf;
      }

      // Positive part of tau is on one side of y_c. With tau = sigma^2 the
      // Jacobian cancels the 1/sqrt(tau) of the kernel.
      const double a = m > 0.0 ? pc.y0 : y_c;
      const double b = m > 0.0 ? y_c : pc.y1;
      const double sigma_max = std::sqrt(std::max(tau_at(m > 0.0 ? a : b), 0.0));
      const double scale = 2.0 * norm / std::abs(m);
      auto in_sigma = [&](double sigma) {
        if (sigma <= 0.0) return 0.0;
        const double y = y_c - sign(m) * sigma * sigma / std::abs(m);
        const double s2 = 4.0 * sigma * sigma;
        return scale * (std::exp(-(x - y) * (x - y) / s2) + std::exp(-(x + y) * (x + y) / s2));
      };
      if (b > a) total += integrate(in_sigma, 0.0, sigma_max);
    }
  }
  return total;
}

std::size_t nearest_node(double x, double dx) {
  return static_cast<std::size_t>(std::llround(std::max(x, 0.0) / dx));
}

IdentityTable check_ut_identity(const SolutionRecord& record, const FrontFunction& front,
                                std::span<const Probe> probes, double slope_floor) {
  IdentityTable table;
  const std::size_t m = record.snapshots();
  if (m < 3) {
    throw Error(ErrorCode::InsufficientSnapshots, "identity check needs three snapshots");
  }
  for (const Probe& pr : probes) {
    ProbeResult row;
    row.requested = pr;
    row.node = std::min(nearest_node(pr.x, record.grid.dx), record.n_nodes - 1);
    auto it = std::lower_bound(record.times.begin(), record.times.end(), pr.t);
    std::size_t k = static_cast<std::size_t>(it - record.times.begin());
    if (k >= m) k = m - 1;
    if (k > 0 && std::abs(record.times[k - 1] - pr.t) < std::abs(record.times[k] - pr.t)) --k;
    k = std::clamp<std::size_t>(k, 1, m - 2);
    row.snapshot = k;
    row.x = record.x(row.node);
    row.t = record.times[k];

    const double interval =
        std::max(record.grid.dt, std::max(record.times[k + 1] - record.times[k],
                                          record.times[k] - record.times[k - 1]));
    for (std::size_t j = 0; j < front.size(); ++j) {
      if (!front.contains(j)) continue;
      if (std::abs(front.x(j) - row.x) <= 2.0 * record.grid.dx * (1.0 + 1e-12) &&
          std::abs(front.ell[j] - row.t) <= 2.0 * interval) {
        std::ostringstream os;
        os << "probe (" << row.x << ", " << row.t << ") is on the front at node " << j;
        throw Error(ErrorCode::ProbeOnFront, os.str());
      }
    }

    row.u_t = (record.u_value(k + 1, row.node) - record.u_value(k - 1, row.node)) /
              (record.times[k + 1] - record.times[k - 1]);
    row.psi_t = psi_t(row.x, row.t, record.params);
    row.F1 = eval_F1(record, row.x, row.t);
    row.F2 = eval_F2(front, row.x, row.t, slope_floor);
    row.residual = row.u_t - row.psi_t + row.F1 + record.params.u_star * row.F2;
    table.max_abs_residual = std::max(table.max_abs_residual, std::abs(row.residual));
    table.rows.push_back(row);
  }
  return table;
}

namespace {

const IgnitionData& ignition_at(const SolutionRecord& record, const FrontFunction& front,
                                std::size_t node) {
  if (!front.contains(node) || node >= record.ignition.size() ||
      !record.ignition[node].ignited()) {
    std::ostringstream os;
    os << "node " << node << " is not on the front";
    throw Error(ErrorCode::EmptyFront, os.str());
  }
  return record.ignition[node];
}

}  // namespace

Transversality transversality_spatial(const SolutionRecord& record, const FrontFunction& front,
                                      std::size_t node, double slope_floor) {
  const IgnitionData& d = ignition_at(record, front, node);
  Transversality out;
  out.value = (-3.0 * d.u_right[0] + 4.0 * d.u_right[1] - d.u_right[2]) / (2.0 * record.grid.dx);
  out.flag = out.value < -slope_floor;
  return out;
}

Transversality transversality_temporal(const SolutionRecord& record, const FrontFunction& front,
                                       std::size_t node, double rate_floor) {
  const IgnitionData& d = ignition_at(record, front, node);
  Transversality out;
  out.value = kUnset;
  for (std::size_t k : {1u, 2u, 4u, 8u}) {
    const double lag = d.u_lags[k];
    if (lag != lag) continue;
    const double rate = (d.u_lags[0] - lag) / (static_cast<double>(k) * record.grid.dt);
    if (out.value != out.value || rate > out.value) out.value = rate;
  }
  out.flag = out.value == out.value && out.value > rate_floor;
  return out;
}

FrontDerivative front_derivative_estimate(const FrontFunction& front,
                                          const SolutionRecord& record, std::size_t node,
                                          double slope_floor, double rate_floor) {
  const auto temporal = transversality_temporal(record, front, node, rate_floor);
  if (!temporal.flag) {
    std::ostringstream os;
    os << "no positive ignition rate at node " << node;
    throw Error(ErrorCode::DegenerateRate, os.str());
  }
  const IgnitionData& d = record.ignition[node];
  FrontDerivative out;
  out.u_x_plus = transversality_spatial(record, front, node, slope_floor).value;
  const double dt = record.grid.dt;
  if (d.u_lags[2] == d.u_lags[2]) {
    out.u_t_minus = (3.0 * d.u_lags[0] - 4.0 * d.u_lags[1] + d.u_lags[2]) / (2.0 * dt);
  } else {
    out.u_t_minus = (d.u_lags[0] - d.u_lags[1]) / dt;
  }
  out.estimate = -out.u_x_plus / out.u_t_minus;

  const bool left = node > 0 && front.contains(node - 1);
  const bool right = front.contains(node + 1);
  if (left && right) {
    out.discrete_slope = (front.ell[node + 1] - front.ell[node - 1]) / (2.0 * front.dx);
  } else if (right) {
    out.discrete_slope = (front.ell[node + 1] - front.ell[node]) / front.dx;
  } else if (left) {
    out.discrete_slope = (front.ell[node] - front.ell[node - 1]) / front.dx;
  } else {
    out.discrete_slope = kUnset;
  }
  out.relative_gap = std::abs(out.estimate - out.discrete_slope) / std::abs(out.discrete_slope);
  return out;
}

double TransversalityScan::spatial_fraction() const {
  return rows.empty() ? 0.0
                      : static_cast<double>(spatial_true) / static_cast<double>(rows.size());
}

double TransversalityScan::temporal_fraction() const {
  return rows.empty() ? 0.0
                      : static_cast<double>(temporal_true) / static_cast<double>(rows.size());
}

TransversalityScan transversality_scan(const SolutionRecord& record, const FrontFunction& front,
                                       double t_limit, double slope_floor, double rate_floor) {
  TransversalityScan scan;
  for (std::size_t i = 0; i < front.size(); ++i) {
    if (!front.contains(i) || !(front.ell[i] < t_limit)) continue;
    TransversalityRow row;
    row.node = i;
    row.x = front.x(i);
    row.ell = front.ell[i];
    row.spatial = transversality_spatial(record, front, i, slope_floor);
    row.temporal = transversality_temporal(record, front, i, rate_floor);
    if (row.spatial.flag) ++scan.spatial_true;
    if (row.temporal.flag) {
      ++scan.temporal_true;
      row.derivative = front_derivative_estimate(front, record, i, slope_floor, rate_floor);
    }
    scan.rows.push_back(row);
  }
  return scan;
}

double F1_upper_bound(const ModelConstants& c) {
  return std::sqrt(std::numbers::pi) * c.alpha_star * c.C_psi;
}

double F2_upper_bound(const ModelConstants& c) {
  return 0.5 * std::sqrt(std::numbers::pi / c.C_ell);
}

double psi_t_lower_margin(const SolutionRecord& record, const ModelConstants& c) {
  double worst = kInf;
  const auto& prm = record.params;
  for (std::size_t k = 0; k < record.snapshots(); ++k) {
    const double t = record.times[k];
    if (!(t > 0.0) || t > c.T2) continue;
    const double st = std::sqrt(t);
    for (std::size_t i = 0; i < record.n_nodes; ++i) {
      const double x = record.x(i);
      if (x <= prm.alpha * st) continue;
      if (x >= c.alpha_star * st) break;
      worst = std::min(worst, psi_t(x, t, prm) - c.c_psi / t);
    }
  }
  return worst;
}

std::vector<Probe> default_probes() {
  return {{0.05, 0.1}, {0.1, 0.12}, {0.2, 0.15}, {0.3, 0.2}, {0.35, 0.06},
          {0.5, 0.12}, {0.6, 0.2},  {0.8, 0.2},  {1.0, 0.2}, {1.2, 0.25}};
}

}  // namespace hhmo
