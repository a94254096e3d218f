#include "hhmo/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hhmo/errors.hpp"
#include "hhmo/tridiagonal.hpp"

namespace hhmo {

namespace {

std::size_t snap_count(double extent, double step) {
  const double ratio = extent / step;
  auto n = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
  return std::max<std::size_t>(n, 1);
}

std::size_t nodes_below(double x, const GridSpec& grid) {
  if (!(x > 0.0)) return 0;
  const double n = std::floor(x / grid.dx) + 1.0;
  return std::min(grid.nodes(), static_cast<std::size_t>(n));
}

// Below this source position the kink and its mirror image across x = 0 are
// too close for the one-sided jump expansion; the correction is skipped there.
constexpr double kCurvatureStart = 0.2;

}  // namespace

std::size_t GridSpec::record_nodes() const {
  const auto n = static_cast<std::size_t>(std::floor(record_x_max / dx + 1e-9)) + 1;
  return std::min(n, nodes());
}

GridSpec make_grid(double dx, double dt, double x_max, double t_max,
                   std::optional<double> record_x_max) {
  if (!(dx > 0.0) || !(dt > 0.0) || !(x_max > 0.0) || !(t_max > 0.0)) {
    throw Error(ErrorCode::Validation, "grid needs dx, dt, x_max, t_max > 0");
  }
  GridSpec g;
  g.dx = dx;
  g.dt = dt;
  g.n_x = snap_count(x_max, dx);
  g.n_t = snap_count(t_max, dt);
  g.x_max = static_cast<double>(g.n_x) * dx;
  g.t_max = static_cast<double>(g.n_t) * dt;
  g.record_x_max = std::min(record_x_max.value_or(g.x_max), g.x_max);
  return g;
}

double recommended_x_max(const ModelParams& params, double t_max) {
  double reach = params.alpha;
  if (is_supercritical(params)) reach = std::max(reach, find_alpha_star(params));
  return (reach + 6.0) * std::sqrt(t_max);
}

void validate(const GridSpec& grid, const ModelParams& params) {
  validate(params);
  std::ostringstream os;
  bool bad = false;
  if (!(grid.dx > 0.0) || !(grid.dt > 0.0) || grid.n_x < 2 || grid.n_t < 1) {
    os << " dx, dt must be > 0 with at least 2 cells and 1 step;";
    bad = true;
  }
  double reach = params.alpha;
  if (is_supercritical(params)) reach = std::max(reach, find_alpha_star(params));
  if (!(grid.x_max > reach * std::sqrt(grid.t_max) + 2.0 * grid.dx)) {
    os << " x_max=" << grid.x_max << " does not contain the source/precipitation reach "
       << reach * std::sqrt(grid.t_max) << ";";
    bad = true;
  }
  if (!(grid.record_x_max > 0.0)) {
    os << " record_x_max must be > 0;";
    bad = true;
  }
  if (bad) throw Error(ErrorCode::Validation, "invalid grid:" + os.str());
}

std::string to_string(Scheme scheme) {
  return scheme == Scheme::Deficit ? "deficit" : "source_deposition";
}

std::optional<std::size_t> SolutionRecord::snapshot_index(double t) const {
  auto it = std::lower_bound(times.begin(), times.end(), t * (1.0 - 1e-9) - 1e-300);
  if (it == times.end()) return std::nullopt;
  if (std::abs(*it - t) > 1e-9 * std::max(1.0, std::abs(t))) return std::nullopt;
  return static_cast<std::size_t>(it - times.begin());
}

double SolutionRecord::u_interp(double xq, double tq) const {
  if (times.empty() || n_nodes < 2) {
    throw Error(ErrorCode::InsufficientSnapshots, "record has no snapshots");
  }
  tq = std::clamp(tq, times.front(), times.back());
  auto it = std::upper_bound(times.begin(), times.end(), tq);
  std::size_t k1 = std::min<std::size_t>(static_cast<std::size_t>(it - times.begin()),
                                         times.size() - 1);
  std::size_t k0 = k1 == 0 ? 0 : k1 - 1;
  const double span_t = times[k1] - times[k0];
  const double ft = span_t > 0.0 ? (tq - times[k0]) / span_t : 0.0;

  const double pos = std::clamp(xq / grid.dx, 0.0, static_cast<double>(n_nodes - 1));
  auto i0 = std::min(static_cast<std::size_t>(pos), n_nodes - 2);
  const double fx = pos - static_cast<double>(i0);
  auto at = [&](std::size_t k) {
    return (1.0 - fx) * u_value(k, i0) + fx * u_value(k, i0 + 1);
  };
  return (1.0 - ft) * at(k0) + ft * at(k1);
}

Solver::Solver(const ModelParams& params, const GridSpec& grid, const RelayKind& relay,
               Scheme scheme, RunOptions options)
    : params_(params),
      grid_(grid),
      scheme_(scheme),
      options_(options),
      relay_(relay, params.u_star, {}) {
  validate(grid_, params_);
  validate(relay);

  std::size_t n_relay = 0;
  if (!options_.disable_precipitation && std::isfinite(params_.u_star)) {
    double reach = 0.0;
    if (is_supercritical(params_)) reach = find_alpha_star(params_);
    if (scheme_ == Scheme::SourceDeposition) {
      reach = std::max(reach, params_.alpha) + 1.0;
    }
    if (reach > 0.0) {
      n_relay = nodes_below(reach * std::sqrt(grid_.t_max) + 4.0 * grid_.dx, grid_);
    }
  }
  std::vector<double> freeze(n_relay);
  for (std::size_t i = 0; i < n_relay; ++i) {
    const double xi = grid_.x(i) / params_.alpha;
    freeze[i] = xi * xi;
  }
  relay_ = Relay(relay, params_.u_star, std::move(freeze));
  relay_state_ = relay_.initial_state();
  ignition_.assign(n_relay, IgnitionData{});
  n_active_ = std::min(grid_.nodes(), n_relay + kStencilCount);

  const std::size_t n = grid_.nodes();
  const double r = grid_.mesh_ratio();
  std::vector<double> lower(n, -0.5 * r), upper(n, -0.5 * r);
  upper[0] = -r;
  lower[n - 1] = -r;
  system_ = TridiagonalFactorization(std::move(lower), std::vector<double>(n, 1.0 + r),
                                     std::move(upper));
  applied_p_.assign(n_relay, 0.0);
  leading_diag_.assign(n_relay, 1.0 + r);
  rhs_.assign(n, 0.0);
  field_.assign(n, 0.0);
  u_active_.assign(n_active_, 0.0);
  psi_active_.assign(n_active_, 0.0);
  lag_buffer_.assign(kLagCount, std::vector<double>(n_relay, 0.0));

  if (scheme_ == Scheme::Deficit) {
    step_index_ = 0;
    for (std::size_t i = 0; i < n_relay; ++i) lag_buffer_[0][i] = psi(grid_.x(i), 0.0, params_);
    lag_head_ = 0;
    lag_filled_ = n_relay > 0 ? 1 : 0;
  } else {
    // The source is singular at t = 0: lump the mass emitted over [0, dt]
    // at its centroid and start the clock at t = dt.
    step_index_ = 1;
    const double t0 = grid_.t(1);
    deposit(field_, params_.alpha * params_.beta * std::sqrt(t0),
            0.5 * params_.alpha * std::sqrt(t0));
    std::copy_n(field_.begin(), n_active_, u_active_.begin());
    update_relay(t0);
  }
}

void Solver::deposit(std::vector<double>& field, double mass, double position) const {
  const double s = position / grid_.dx;
  auto j = static_cast<std::size_t>(std::floor(s));
  double theta = s - static_cast<double>(j);
  if (j >= grid_.n_x) {
    j = grid_.n_x - 1;
    theta = 1.0;
  }
  auto weight = [&](std::size_t i) {
    return (i == 0 || i == grid_.n_x) ? 0.5 * grid_.dx : grid_.dx;
  };
  field[j] += (1.0 - theta) * mass / weight(j);
  field[j + 1] += theta * mass / weight(j + 1);
}

// The source makes u_xx jump by alpha^2 beta / (4t) across x = alpha sqrt t.
// The three-point Laplacian of the two nodes bracketing the source misses the
// quadratic part of that jump; add it back so the scheme stays second order.
void Solver::curvature_correction(std::vector<double>& field, double position,
                                  double t_mid) const {
  const double s = position / grid_.dx;
  const auto j = static_cast<std::size_t>(std::floor(s));
  if (j == 0 || j + 1 >= grid_.n_x || position < kCurvatureStart) return;
  const double theta = s - static_cast<double>(j);
  const double jump = params_.alpha * params_.alpha * params_.beta / (4.0 * t_mid);
  field[j] -= grid_.dt * 0.5 * jump * (1.0 - theta) * (1.0 - theta);
  field[j + 1] += grid_.dt * 0.5 * jump * theta * theta;
}

void Solver::refresh_sink() {
  const std::size_t n_relay = relay_.size();
  const auto& p = relay_state_.p_value;
  std::size_t end = 0;
  for (std::size_t i = 0; i < n_relay; ++i) {
    if (p[i] != applied_p_[i]) end = i + 1;
  }
  if (end == 0) return;
  const double base = 1.0 + grid_.mesh_ratio();
  for (std::size_t i = 0; i < end; ++i) {
    applied_p_[i] = p[i];
    leading_diag_[i] = base + grid_.dt * p[i];
  }
  system_.set_leading_diagonal(std::span<const double>(leading_diag_.data(), end));
}

void Solver::check_finite() const {
  for (double v : rhs_) {
    if (!std::isfinite(v)) {
      std::ostringstream os;
      os << "non-finite field value at t=" << grid_.t(step_index_ + 1);
      throw Error(ErrorCode::NonFiniteField, os.str());
    }
  }
}

void Solver::step() {
  if (scheme_ == Scheme::Deficit) {
    step_deficit();
  } else {
    step_deposition();
  }
}

namespace {

// rhs = (I + dt/2 L) f with homogeneous Neumann ends.
void explicit_half(std::span<const double> f, std::span<double> rhs, double r) {
  const std::size_t n = f.size();
  rhs[0] = (1.0 - r) * f[0] + r * f[1];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    rhs[i] = (1.0 - r) * f[i] + 0.5 * r * (f[i - 1] + f[i + 1]);
  }
  rhs[n - 1] = (1.0 - r) * f[n - 1] + r * f[n - 2];
}

}  // namespace

void Solver::step_deficit() {
  const double t_new = grid_.t(step_index_ + 1);
  const double dt = grid_.dt;
  const double r = grid_.mesh_ratio();
  const std::size_t n_relay = relay_.size();

  for (std::size_t i = 0; i < n_active_; ++i) psi_active_[i] = psi(grid_.x(i), t_new, params_);

  explicit_half(field_, rhs_, r);
  for (std::size_t i = 0; i < n_relay; ++i) {
    const double p = relay_state_.p_value[i];
    if (p != 0.0) rhs_[i] -= dt * p * psi_active_[i];
  }
  refresh_sink();
  system_.solve(rhs_);
  check_finite();
  field_.swap(rhs_);
  ++step_index_;

  for (std::size_t i = 0; i < n_active_; ++i) u_active_[i] = field_[i] + psi_active_[i];
  update_relay(t_new);
}

void Solver::step_deposition() {
  const double t_old = grid_.t(step_index_);
  const double t_new = grid_.t(step_index_ + 1);

  explicit_half(field_, rhs_, grid_.mesh_ratio());
  const double st0 = std::sqrt(t_old);
  const double st1 = std::sqrt(t_new);
  const double position = 0.5 * params_.alpha * (st0 + st1);
  deposit(rhs_, params_.alpha * params_.beta * (st1 - st0), position);
  curvature_correction(rhs_, position, 0.25 * (st0 + st1) * (st0 + st1));
  refresh_sink();
  system_.solve(rhs_);
  check_finite();
  field_.swap(rhs_);
  ++step_index_;

  std::copy_n(field_.begin(), n_active_, u_active_.begin());
  update_relay(t_new);
}

void Solver::update_relay(double t_new) {
  const std::size_t n_relay = relay_.size();
  if (n_relay == 0) return;
  lag_head_ = lag_filled_ == 0 ? 0 : (lag_head_ + 1) % kLagCount;
  std::copy_n(u_active_.begin(), n_relay, lag_buffer_[lag_head_].begin());
  lag_filled_ = std::min(lag_filled_ + 1, kLagCount);

  const auto ignited = relay_.accumulate(
      relay_state_, std::span<const double>(u_active_.data(), n_relay), grid_.dt, t_new);
  for (std::size_t i : ignited) {
    IgnitionData& d = ignition_[i];
    d.time = t_new;
    for (std::size_t k = 0; k < kLagCount; ++k) {
      d.u_lags[k] = k < lag_filled_
                        ? lag_buffer_[(lag_head_ + kLagCount - k) % kLagCount][i]
                        : kUnset;
    }
    for (std::size_t j = 0; j < kStencilCount; ++j) {
      d.u_right[j] = i + j < n_active_ ? u_active_[i + j] : kUnset;
    }
  }
  relay_.evaluate(relay_state_);
}

std::vector<double> Solver::u_field(std::size_t count) const {
  count = std::min(count, grid_.nodes());
  std::vector<double> u(count);
  const double t = time();
  if (scheme_ == Scheme::Deficit) {
    for (std::size_t i = 0; i < count; ++i) u[i] = field_[i] + psi(grid_.x(i), t, params_);
  } else {
    std::copy_n(field_.begin(), count, u.begin());
  }
  return u;
}

std::vector<double> Solver::p_field(std::size_t count) const {
  count = std::min(count, grid_.nodes());
  std::vector<double> p(count, 0.0);
  const std::size_t m = std::min(count, relay_.size());
  std::copy_n(relay_state_.p_value.begin(), m, p.begin());
  return p;
}

namespace {

SolutionRecord run_scheme(const ModelParams& params, const GridSpec& grid,
                          const RelayKind& relay, std::size_t stride, const RunOptions& options,
                          Scheme scheme) {
  if (stride == 0) throw Error(ErrorCode::Validation, "snapshot stride must be >= 1");
  Solver solver(params, grid, relay, scheme, options);

  SolutionRecord rec;
  rec.params = params;
  if (is_supercritical(params)) rec.constants = compute_constants(params);
  rec.grid = grid;
  rec.relay = relay;
  rec.scheme = scheme;
  rec.precipitation_disabled = options.disable_precipitation;
  rec.snapshot_stride = stride;
  rec.n_nodes = grid.record_nodes();
  rec.n_relay = solver.relay_nodes();

  const std::size_t first = solver.step_index();
  const std::size_t expected = (grid.n_t - first) / stride + 2;
  rec.times.reserve(expected);
  rec.u.reserve(expected * rec.n_nodes);
  rec.p.reserve(expected * rec.n_nodes);
  auto snapshot = [&] {
    rec.times.push_back(solver.time());
    rec.steps.push_back(solver.step_index());
    auto u = solver.u_field(rec.n_nodes);
    rec.u.insert(rec.u.end(), u.begin(), u.end());
    auto p = solver.p_field(rec.n_nodes);
    rec.p.insert(rec.p.end(), p.begin(), p.end());
    const auto& a = solver.relay_state().accumulator;
    rec.accumulator.insert(rec.accumulator.end(), a.begin(), a.end());
  };
  snapshot();
  while (solver.step_index() < solver.final_step()) {
    solver.step();
    const std::size_t n = solver.step_index();
    if ((n - first) % stride == 0 || n == solver.final_step()) snapshot();
  }
  rec.ignition = solver.ignition();
  return rec;
}

}  // namespace

SolutionRecord run(const ModelParams& params, const GridSpec& grid, const RelayKind& relay,
                   std::size_t snapshot_stride, const RunOptions& options) {
  return run_scheme(params, grid, relay, snapshot_stride, options, Scheme::Deficit);
}

SolutionRecord source_deposition_run(const ModelParams& params, const GridSpec& grid,
                                     const RelayKind& relay, std::size_t snapshot_stride,
                                     const RunOptions& options) {
  return run_scheme(params, grid, relay, snapshot_stride, options, Scheme::SourceDeposition);
}

std::optional<double> measure_t1(const SolutionRecord& record, double alpha_star) {
  const auto& prm = record.params;
  for (std::size_t k = 0; k < record.snapshots(); ++k) {
    const double t = record.times[k];
    if (!(t > 0.0)) continue;
    const double st = std::sqrt(t);
    const double bound = t1_gradient_bound(t, prm, alpha_star);
    for (std::size_t i = 0; i + 1 < record.n_nodes; ++i) {
      const double x = record.x(i);
      if (x <= prm.alpha * st) continue;
      if (x >= alpha_star * st) break;
      const double ux = (record.u_value(k, i + 1) - record.u_value(k, i)) / record.grid.dx;
      if (ux > bound) return t;
    }
  }
  return std::nullopt;
}

}  // namespace hhmo
