#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhmo/model.hpp"
#include "hhmo/relay.hpp"
#include "hhmo/tridiagonal.hpp"

namespace hhmo {

/// Uniform space-time grid on [0, x_max] x [0, t_max].
///
/// x_max and t_max are snapped up to whole multiples of dx and dt, so that
/// n_x * dx == x_max and n_t * dt == t_max hold exactly in the stored values.
/// Only nodes with x <= record_x_max are kept in snapshots.
struct GridSpec {
  double dx = 0.0;
  double dt = 0.0;
  double x_max = 0.0;
  double t_max = 0.0;
  std::size_t n_x = 0;  // number of cells; nodes are 0..n_x
  std::size_t n_t = 0;  // number of steps from t = 0
  double record_x_max = 0.0;

  std::size_t nodes() const { return n_x + 1; }
  std::size_t record_nodes() const;
  double x(std::size_t i) const { return static_cast<double>(i) * dx; }
  double t(std::size_t n) const { return static_cast<double>(n) * dt; }
  /// dt / dx^2; the Crank-Nicolson step is monotone for ratio <= 1.
  double mesh_ratio() const { return dt / (dx * dx); }

  bool operator==(const GridSpec&) const = default;
};

GridSpec make_grid(double dx, double dt, double x_max, double t_max,
                   std::optional<double> record_x_max = std::nullopt);

/// Checks positivity and that the truncated domain contains every point the
/// source or the precipitation region can reach by t_max.
void validate(const GridSpec& grid, const ModelParams& params);

/// x_max >= reach*sqrt(t_max) + 6 sqrt(t_max), with reach = max(alpha, alpha_star).
double recommended_x_max(const ModelParams& params, double t_max);

enum class Scheme {
  /// Solves for w = u - psi; the moving source is absorbed by psi.
  Deficit,
  /// Integrates u directly, depositing the source mass onto the two nodes
  /// bracketing it. Starts at t = dt. Cross-check only.
  SourceDeposition,
};

std::string to_string(Scheme scheme);

struct RunOptions {
  /// Forces p = 0 for all time (relay never consulted).
  bool disable_precipitation = false;
};

inline constexpr std::size_t kLagCount = 9;      // u at t_ign - k dt, k = 0..8
inline constexpr std::size_t kStencilCount = 5;  // u at nodes i..i+4 at t_ign

/// Local history captured when a node's relay first switches.
struct IgnitionData {
  double time = kUnset;
  std::array<double, kLagCount> u_lags{};
  std::array<double, kStencilCount> u_right{};

  bool ignited() const { return time == time; }
  double u() const { return u_lags[0]; }
};

/// Snapshots of a run plus the per-node ignition history.
///
/// `u` and `p` are row-major [snapshot][node] over the first `n_nodes` grid
/// nodes; `accumulator` is [snapshot][relay node]. The deficit w = u - psi is
/// reconstructed on demand.
struct SolutionRecord {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  ModelParams params;
  std::optional<ModelConstants> constants;
  GridSpec grid;
  RelayKind relay;
  Scheme scheme = Scheme::Deficit;
  bool precipitation_disabled = false;
  std::size_t snapshot_stride = 1;
  std::size_t n_nodes = 0;
  std::size_t n_relay = 0;

  std::vector<double> times;
  std::vector<std::size_t> steps;
  std::vector<double> u;
  std::vector<double> p;
  std::vector<double> accumulator;
  std::vector<IgnitionData> ignition;  // one per relay node

  std::size_t snapshots() const { return times.size(); }
  double x(std::size_t i) const { return grid.x(i); }
  std::span<const double> u_at(std::size_t k) const {
    return {u.data() + k * n_nodes, n_nodes};
  }
  std::span<const double> p_at(std::size_t k) const {
    return {p.data() + k * n_nodes, n_nodes};
  }
  std::span<const double> accumulator_at(std::size_t k) const {
    return {accumulator.data() + k * n_relay, n_relay};
  }
  double u_value(std::size_t k, std::size_t i) const { return u[k * n_nodes + i]; }
  double p_value(std::size_t k, std::size_t i) const { return p[k * n_nodes + i]; }
  double w_value(std::size_t k, std::size_t i) const {
    return u_value(k, i) - psi(x(i), times[k], params);
  }
  /// Index of the snapshot at time t (within 1e-9 relative), if any.
  std::optional<std::size_t> snapshot_index(double t) const;
  /// Linear interpolation of u in x and t; t within [times.front(), times.back()].
  double u_interp(double x, double t) const;
};

/// Time stepper for one run. Not copyable state is kept internally; a Solver
/// is used by a single thread.
class Solver {
 public:
  Solver(const ModelParams& params, const GridSpec& grid, const RelayKind& relay,
         Scheme scheme = Scheme::Deficit, RunOptions options = {});

  /// Advances one dt. Throws Error{NonFiniteField} on NaN/Inf.
  void step();

  double time() const { return grid_.t(step_index_); }
  std::size_t step_index() const { return step_index_; }
  /// Last step index to run so that time() reaches t_max.
  std::size_t final_step() const { return grid_.n_t; }

  /// u at the first `count` nodes at the current time.
  std::vector<double> u_field(std::size_t count) const;
  /// p at the first `count` nodes (zero beyond the relay range).
  std::vector<double> p_field(std::size_t count) const;

  const RelayState& relay_state() const { return relay_state_; }
  const std::vector<IgnitionData>& ignition() const { return ignition_; }
  std::size_t relay_nodes() const { return relay_.size(); }
  const GridSpec& grid() const { return grid_; }

 private:
  void step_deficit();
  void step_deposition();
  void update_relay(double t_new);
  void deposit(std::vector<double>& field, double mass, double position) const;
  void curvature_correction(std::vector<double>& field, double position, double t_mid) const;
  void check_finite() const;
  void refresh_sink();

  ModelParams params_;
  GridSpec grid_;
  Scheme scheme_;
  RunOptions options_;
  Relay relay_;
  RelayState relay_state_;
  std::size_t step_index_ = 0;
  std::size_t n_active_ = 0;

  std::vector<double> field_;  // w (Deficit) or u (SourceDeposition)
  TridiagonalFactorization system_;
  std::vector<double> applied_p_, leading_diag_;
  std::vector<double> rhs_;
  std::vector<double> u_active_, psi_active_;
  std::vector<std::vector<double>> lag_buffer_;
  std::size_t lag_head_ = 0;
  std::size_t lag_filled_ = 0;
  std::vector<IgnitionData> ignition_;
};

/// Runs to t_max, storing a snapshot every `snapshot_stride` steps plus the
/// initial and final state. Deterministic for fixed inputs.
SolutionRecord run(const ModelParams& params, const GridSpec& grid, const RelayKind& relay,
                   std::size_t snapshot_stride, const RunOptions& options = {});

/// Same contract as run() using the source-deposition scheme.
SolutionRecord source_deposition_run(const ModelParams& params, const GridSpec& grid,
                                     const RelayKind& relay, std::size_t snapshot_stride,
                                     const RunOptions& options = {});

/// First snapshot time at which the gradient bound
/// u_x <= -(alpha beta / 4 sqrt t) e^{(alpha^2 - alpha_star^2)/4}
/// fails at a node strictly between the two parabolas, using a one-sided
/// forward difference. nullopt if it never fails within the record.
std::optional<double> measure_t1(const SolutionRecord& record, double alpha_star);

}  // namespace hhmo
