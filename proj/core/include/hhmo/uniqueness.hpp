#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhmo/model.hpp"
#include "hhmo/relay.hpp"
#include "hhmo/solver.hpp"

namespace hhmo {

struct EntanglementWitness {
  std::size_t first_node = 0;
  std::size_t last_node = 0;
  double x_begin = 0.0;
  double x_end = 0.0;
};

/// Pairwise comparison of two runs on a common grid.
///
/// energy is int (u1 - u2)_+^2 dx and energy_reverse int (u2 - u1)_+^2 dx
/// (trapezoid rule over nodes). front_order[i] is +1 when ell1 > ell2 + dt,
/// -1 when ell1 < ell2 - dt and 0 otherwise; a node that never ignited
/// counts as ell = +inf.
struct ComparisonReport {
  std::vector<double> times;
  std::vector<double> sup_diff;
  std::vector<double> energy;
  std::vector<double> energy_reverse;
  std::vector<int> front_order;
  double dx = 0.0;
  bool entangled = false;
  std::optional<EntanglementWitness> witness;
  std::size_t window_nodes = 0;
  double agreement_tol = 0.0;
  std::optional<double> divergence_time;
  bool interpolated = false;

  /// Largest sup_diff over snapshots with t <= t_end.
  double max_sup_diff(double t_end) const;
};

inline constexpr std::size_t kDefaultEntanglementWindow = 16;

/// Records must share dx, dt, node count and snapshot times; otherwise
/// throws GridMismatch.
ComparisonReport compare(const SolutionRecord& first, const SolutionRecord& second,
                         double agreement_tol,
                         std::size_t window_nodes = kDefaultEntanglementWindow);

/// Compares runs on different grids by linear interpolation (space and
/// time) onto whichever grid is coarser in x. Sign conventions follow the
/// argument order.
ComparisonReport compare_interpolated(const SolutionRecord& first, const SolutionRecord& second,
                                      double agreement_tol,
                                      std::size_t window_nodes = kDefaultEntanglementWindow);

/// Entanglement from a front-order vector: some window of `window_nodes`
/// consecutive nodes contains both signs.
std::optional<EntanglementWitness> find_entanglement(std::span<const int> order, double dx,
                                                     std::size_t window_nodes);

struct MonotonicityVerdict {
  bool monotone = true;
  std::size_t checked = 0;
  std::optional<std::size_t> first_violation;  // snapshot index where energy went up
  double violation_time = 0.0;
  double increase = 0.0;
};

/// energy non-increasing on snapshots within [t_begin, t_end], allowing
/// 1e-10 + 1e-6 * energy per step.
MonotonicityVerdict energy_monotonicity_check(const ComparisonReport& report, double t_begin,
                                              double t_end);

/// sup over the coarse record's nodes of |u_coarse - u_fine| at time t, with
/// the fine record interpolated linearly.
double self_refinement_error(const SolutionRecord& coarse, const SolutionRecord& fine, double t);

struct Perturbation {
  enum class Kind { Relay, Grid };
  Kind kind = Kind::Relay;
  RelayKind relay;  // used when kind == Relay

  static Perturbation relay_kind(RelayKind r) { return {Kind::Relay, r}; }
  static Perturbation refine_grid() { return {Kind::Grid, RelayKind::sharp()}; }

  std::string label() const;
  bool operator==(const Perturbation&) const = default;
};

struct SweepBase {
  ModelParams params;
  GridSpec grid;
  RelayKind relay = RelayKind::sharp();
  std::size_t snapshot_stride = 1;
};

struct SweepRow {
  std::string label;
  std::optional<double> divergence_time;
  double max_sup_diff = 0.0;  // over [0, T_unique]
  bool energy_monotone = true;
  bool holds = false;          // no divergence before T_unique
};

struct SweepTable {
  double T_unique = 0.0;
  double agreement_tol = 0.0;
  bool agreement_tol_measured = false;
  std::vector<SweepRow> rows;
};

/// 10 x self_refinement_error at T_unique between the base grid and
/// (dx/2, dt/4), both run to T_unique.
double measure_agreement_tol(const SweepBase& base, double t_unique);

/// Runs the base configuration and every perturbation concurrently and
/// compares each against the base. Grid perturbations use (dx/2, dt/4)
/// and the interpolated comparison.
SweepTable perturbation_sweep(const SweepBase& base, std::span<const Perturbation> perturbations,
                              std::optional<double> agreement_tol = std::nullopt);

}  // namespace hhmo
