#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "hhmo/front.hpp"
#include "hhmo/model.hpp"
#include "hhmo/solver.hpp"

namespace hhmo {

/// Antiderivative helper: int_0^tau erfc(a / (2 sqrt s)) ds for a >= 0.
double erfc_time_integral(double a, double tau);

/// int_0^tau int_0^z heat_kernel(w, s) dw ds. Odd in z, 0 for tau <= 0.
double kernel_primitive(double z, double tau);

/// int over y in [y_a, y_b], s in [s_a, s_b] of heat_kernel(x - y, t - s).
double kernel_cell_integral(double x, double t, double y_a, double y_b, double s_a, double s_b);

/// F1(x,t) = int_0^t int heat_kernel(x-y, t-s) p(y,s) u_t(y,s) dy ds.
///
/// u_t is the snapshot difference quotient, taken constant on each snapshot
/// interval and node cell; the kernel is integrated exactly over each cell
/// and its mirror image across x = 0. p is the canonical switch at the
/// recorded ignition time for sharp relays and the snapshot average for the
/// mollified one. Throws InsufficientSnapshots if t is outside the record or
/// fewer than two snapshots exist.
double eval_F1(const SolutionRecord& record, double x, double t);

/// F2(x,t) = int_I heat_kernel(x-y, t-ell(y)) dy with the kernel 0 for t <= ell.
///
/// ell is interpolated linearly between consecutive front nodes and held
/// constant over the half cells at the ends of each run. Pieces where
/// t - ell changes sign are integrated in sigma = sqrt(t - ell), which removes
/// the inverse square root. Returns +inf when the front is flat (slope below
/// slope_floor plus its own grid curvature) at a crossing within two cells
/// of x, where the integral diverges.
double eval_F2(const FrontFunction& front, double x, double t, double slope_floor = 1e-4);

struct Probe {
  double x = 0.0;
  double t = 0.0;

  bool operator==(const Probe&) const = default;
};

/// Ten interior probes for the default parameters, on both sides of the
/// first-ring front and in the first interring, away from ignition.
std::vector<Probe> default_probes();

struct ProbeResult {
  Probe requested;
  std::size_t node = 0;
  std::size_t snapshot = 0;
  double x = 0.0;
  double t = 0.0;
  double F1 = 0.0;
  double F2 = 0.0;
  double psi_t = 0.0;
  double u_t = 0.0;
  double residual = 0.0;  // u_t - psi_t + F1 + u* F2
};

struct IdentityTable {
  std::vector<ProbeResult> rows;
  double max_abs_residual = 0.0;
};

/// Probes are snapped to the nearest node and the nearest interior snapshot.
/// Throws ProbeOnFront when a front node within 2 dx of the probe ignited
/// within 2 max(dt, snapshot interval) of its time.
IdentityTable check_ut_identity(const SolutionRecord& record, const FrontFunction& front,
                                std::span<const Probe> probes, double slope_floor = 1e-4);

struct Transversality {
  double value = 0.0;
  bool flag = false;
};

/// Second-order one-sided u_x at (x_i, ell(x_i)) from the two cells to the
/// right; flag when value < -slope_floor.
Transversality transversality_spatial(const SolutionRecord& record, const FrontFunction& front,
                                      std::size_t node, double slope_floor = 1e-4);

/// max over k in {1,2,4,8} of (u(x, ell) - u(x, ell - k dt)) / (k dt); flag
/// when value > rate_floor. Lags before t = 0 are skipped; value is NaN if
/// none is available.
Transversality transversality_temporal(const SolutionRecord& record, const FrontFunction& front,
                                       std::size_t node, double rate_floor = 1e-4);

struct FrontDerivative {
  double u_x_plus = 0.0;
  double u_t_minus = 0.0;
  double estimate = 0.0;        // -u_x_plus / u_t_minus
  double discrete_slope = 0.0;  // difference quotient of ell, NaN if isolated
  double relative_gap = 0.0;
};

/// Throws DegenerateRate when the temporal flag is false.
FrontDerivative front_derivative_estimate(const FrontFunction& front,
                                          const SolutionRecord& record, std::size_t node,
                                          double slope_floor = 1e-4, double rate_floor = 1e-4);

struct TransversalityRow {
  std::size_t node = 0;
  double x = 0.0;
  double ell = 0.0;
  Transversality spatial;
  Transversality temporal;
  std::optional<FrontDerivative> derivative;
};

struct TransversalityScan {
  std::vector<TransversalityRow> rows;
  std::size_t spatial_true = 0;
  std::size_t temporal_true = 0;

  double spatial_fraction() const;
  double temporal_fraction() const;
};

/// All front nodes with ell < t_limit.
TransversalityScan transversality_scan(const SolutionRecord& record, const FrontFunction& front,
                                       double t_limit, double slope_floor = 1e-4,
                                       double rate_floor = 1e-4);

/// The node nearest to x.
std::size_t nearest_node(double x, double dx);

struct BoundMargins {
  double F1_max = 0.0;
  double F1_bound = 0.0;
  double F2_max = 0.0;  // over probes with t <= T2
  double F2_bound = 0.0;
  double psi_t_worst_margin = 0.0;  // min of psi_t - c_psi/t on the ES(T2) grid points
};

/// sqrt(pi) alpha_star C_psi.
double F1_upper_bound(const ModelConstants& c);
/// (1/2) sqrt(pi / C_ell).
double F2_upper_bound(const ModelConstants& c);

/// min over grid points with alpha sqrt t < x < alpha_star sqrt t, t in (0, T2]
/// of psi_t - c_psi / t, on the record's snapshot times and nodes.
double psi_t_lower_margin(const SolutionRecord& record, const ModelConstants& c);

}  // namespace hhmo
