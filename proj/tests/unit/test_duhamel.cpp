#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include "fixtures.hpp"
#include "hhmo/duhamel.hpp"
#include "hhmo/errors.hpp"
#include "oracles.hpp"

using namespace hhmo;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double kernel(double x, double t) {
  return t > 0.0 ? std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t) : 0.0;
}

FrontFunction linear_front(double dx, std::size_t nodes, double slope, double offset) {
  FrontFunction f;
  f.dx = dx;
  f.dt = 1e-6;
  for (std::size_t i = 0; i < nodes; ++i) f.ell.push_back(offset + slope * i * dx);
  return f;
}

/// Record with the given ignition history on a small grid; fields unused.
SolutionRecord synthetic_record(double dx, double dt, std::size_t nodes) {
  SolutionRecord r;
  r.params = ModelParams{1.0, 1.0, 0.5};
  r.grid = make_grid(dx, dt, dx * static_cast<double>(nodes + 10), 1.0);
  r.n_relay = nodes;
  r.ignition.assign(nodes, IgnitionData{});
  return r;
}

}  // namespace

TEST_CASE("time integral of erfc against quadrature") {
  for (double a : {0.0, 0.05, 0.3, 1.0}) {
    for (double tau : {1e-3, 0.1, 0.7}) {
      const double ref = oracle::integrate(
          [&](double s) { return s > 0.0 ? oracle::erfc_series(a / (2.0 * std::sqrt(s))) : (a > 0.0 ? 0.0 : 1.0); },
          0.0, tau, 1e-14);
      CHECK(erfc_time_integral(a, tau) == doctest::Approx(ref).epsilon(1e-9));
    }
  }
}

TEST_CASE("kernel cell integral against a nested quadrature") {
  const double x = 0.3, t = 0.2;
  for (auto [ya, yb, sa, sb] : {std::array{0.25, 0.26, 0.1, 0.15}, std::array{0.0, 0.4, 0.0, 0.19},
                                std::array{-0.5, -0.2, 0.05, 0.1}}) {
    const double ref = oracle::integrate(
        [&](double s) {
          return oracle::integrate([&](double y) { return kernel(x - y, t - s); }, ya, yb, 1e-13);
        },
        sa, sb, 1e-12);
    CHECK(kernel_cell_integral(x, t, ya, yb, sa, sb) == doctest::Approx(ref).epsilon(1e-7));
  }
  CHECK(kernel_primitive(0.3, 0.0) == 0.0);
  CHECK(kernel_primitive(-0.3, 0.2) == doctest::Approx(-kernel_primitive(0.3, 0.2)));
}

TEST_CASE("F1 vanishes without precipitation") {
  const ModelParams p = fixture::default_params();
  RunOptions opts;
  opts.disable_precipitation = true;
  const auto r = run(p, make_grid(1e-2, 4e-5, 4.0, 0.2), RelayKind::sharp(), 50, opts);
  CHECK(eval_F1(r, 0.1, 0.15) == 0.0);
  CHECK(eval_F1(r, 0.8, 0.2) == 0.0);
  CHECK_THROWS_AS(eval_F1(r, 0.1, 0.5), Error);
}

TEST_CASE("F2 of an empty front is zero") {
  FrontFunction f;
  f.dx = 0.01;
  f.dt = 1e-5;
  f.ell.assign(20, kNaN);
  CHECK(eval_F2(f, 0.1, 0.5) == 0.0);
}

TEST_CASE("F2 behind a linear front against quadrature") {
  const auto f = linear_front(0.01, 101, 0.5, 0.0);
  const double x = 0.3;
  {
    const double t = 0.8;  // behind every front point
    auto integrand = [&](double y) {
      const double ell = y <= 1.0 ? 0.5 * y : 0.5;
      return kernel(x - y, t - ell) + kernel(x + y, t - ell);
    };
    const double ref = oracle::integrate_panels(integrand, 0.0, 1.005, 20);
    CHECK(eval_F2(f, x, t) == doctest::Approx(ref).epsilon(1e-8));
  }
  {
    const double t = 0.25;  // front crosses at y = 0.5
    auto integrand = [&](double v) {
      const double y = 0.5 - v * v;
      const double tau = 0.5 * v * v;
      return 2.0 * v * (kernel(x - y, tau) + kernel(x + y, tau));
    };
    const double ref = oracle::integrate_panels(integrand, 0.0, std::sqrt(0.5), 20);
    CHECK(eval_F2(f, x, t) == doctest::Approx(ref).epsilon(1e-8));
  }
}

TEST_CASE("F2 diverges at a flat crossing") {
  // ell(y) = t0 - (y - x0)|y - x0| on a window around x0, increasing elsewhere.
  const double dx = 1e-3, x0 = 0.3, t0 = 0.2;
  FrontFunction f;
  f.dx = dx;
  f.dt = 1e-7;
  for (int i = 0; i <= 600; ++i) {
    const double y = i * dx;
    f.ell.push_back(t0 + (y - x0) * std::fabs(y - x0));
  }
  CHECK(std::isinf(eval_F2(f, x0, t0)));
  CHECK(std::isfinite(eval_F2(f, x0 + 0.1, t0)));
}

TEST_CASE("F bounds hold at the default probes") {
  const auto& r = fixture::default_record();
  const auto& f = fixture::default_front();
  const auto& c = fixture::default_constants();
  const auto probes = default_probes();
  const auto table = check_ut_identity(r, f, probes);
  for (const auto& row : table.rows) {
    CHECK(row.F1 >= 0.0);
    CHECK(row.F1 <= F1_upper_bound(c) + 1e-6);
    if (row.t <= c.T2) CHECK(row.F2 <= F2_upper_bound(c) + 1e-6);
  }
}

TEST_CASE("F1 settles under snapshot refinement") {
  const ModelParams p = fixture::default_params();
  const GridSpec g = make_grid(2.5e-3, 2.5e-6, 6.0, 0.13, 1.5);
  std::vector<double> values;
  for (std::size_t stride : {400, 200, 100}) {
    const auto r = run(p, g, RelayKind::sharp(), stride);
    values.push_back(eval_F1(r, 0.1, 0.12));
  }
  const double d1 = std::fabs(values[1] - values[0]);
  const double d2 = std::fabs(values[2] - values[1]);
  CHECK(d2 < 2.0 * d1);
}

TEST_CASE("identity far ahead of the front is the precipitation-free one") {
  const auto& r = fixture::default_record();
  const Probe probe[1] = {{2.8, 0.08}};
  const auto table = check_ut_identity(r, fixture::default_front(), probe);
  REQUIRE(table.rows.size() == 1);
  const auto& row = table.rows[0];
  CHECK(row.F1 < 1e-8);
  CHECK(row.F2 < 1e-8);
  CHECK(std::fabs(row.residual) < 1e-5);
}

TEST_CASE("identity residual without precipitation is the scheme error") {
  const ModelParams p = fixture::default_params();
  RunOptions opts;
  opts.disable_precipitation = true;
  const auto r = run(p, make_grid(2.5e-3, 2.5e-6, 4.0, 0.2), RelayKind::sharp(), 400, opts);
  FrontFunction empty;
  empty.dx = r.grid.dx;
  empty.dt = r.grid.dt;
  empty.ell.assign(r.n_relay, kNaN);
  const Probe probes[3] = {{0.5, 0.1}, {0.2, 0.15}, {1.0, 0.12}};
  const auto table = check_ut_identity(r, empty, probes);
  CHECK(table.max_abs_residual < 1e-4);
}

TEST_CASE("probes on the front are rejected") {
  const auto& f = fixture::default_front();
  const std::size_t node = 100;
  REQUIRE(f.contains(node));
  const Probe probe[1] = {{f.x(node), f.ell[node]}};
  try {
    check_ut_identity(fixture::default_record(), f, probe);
    FAIL("expected ProbeOnFront");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ProbeOnFront);
  }
}

TEST_CASE("spatial transversality on constructed stencils") {
  const double dx = 0.01, c = 0.7, u_star = 0.5;
  auto r = synthetic_record(dx, 1e-4, 4);
  FrontFunction f = linear_front(dx, 4, 1.0, 0.1);
  for (std::size_t i = 0; i < 4; ++i) {
    r.ignition[i].time = f.ell[i];
    for (std::size_t k = 0; k < kStencilCount; ++k) {
      r.ignition[i].u_right[k] = i == 0 ? u_star - c * k * dx : u_star;
    }
  }
  const auto sloped = transversality_spatial(r, f, 0);
  CHECK(sloped.value == doctest::Approx(-c).epsilon(1e-12));
  CHECK(sloped.flag);
  const auto flat = transversality_spatial(r, f, 1);
  CHECK(flat.value == 0.0);
  CHECK_FALSE(flat.flag);
}

TEST_CASE("temporal transversality on constructed histories") {
  const double dt = 1e-4, u_star = 0.5;
  auto r = synthetic_record(0.01, dt, 2);
  FrontFunction f = linear_front(0.01, 2, 1.0, 0.1);
  for (std::size_t i = 0; i < 2; ++i) {
    r.ignition[i].time = f.ell[i];
    for (std::size_t k = 0; k < kLagCount; ++k) {
      // node 0: u = u* - (ell - t); node 1: constant.
      r.ignition[i].u_lags[k] = i == 0 ? u_star - k * dt : u_star;
    }
  }
  const auto rising = transversality_temporal(r, f, 0);
  CHECK(rising.value == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rising.flag);
  const auto flat = transversality_temporal(r, f, 1);
  CHECK(flat.value == 0.0);
  CHECK_FALSE(flat.flag);
  try {
    front_derivative_estimate(f, r, 1);
    FAIL("expected DegenerateRate");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateRate);
  }
}

TEST_CASE("front derivative on a consistent parabolic fixture") {
  const double dx = 0.01, dt = 1e-5, alpha = 1.0, u_star = 0.5, c = 0.4;
  const std::size_t n = 60;
  auto r = synthetic_record(dx, dt, n);
  FrontFunction f;
  f.dx = dx;
  f.dt = dt;
  for (std::size_t i = 0; i < n; ++i) f.ell.push_back(std::pow(i * dx / alpha, 2));
  for (std::size_t i = 1; i < n; ++i) {
    const double x = i * dx;
    const double rate = c * alpha * alpha / (2.0 * x);
    auto& ig = r.ignition[i];
    ig.time = f.ell[i];
    for (std::size_t k = 0; k < kLagCount; ++k) ig.u_lags[k] = u_star - rate * k * dt;
    for (std::size_t k = 0; k < kStencilCount; ++k) ig.u_right[k] = u_star - c * k * dx;
  }
  r.ignition[0].time = 0.0;
  for (std::size_t i : {10u, 30u, 50u}) {
    const auto d = front_derivative_estimate(f, r, i);
    CHECK(d.estimate == doctest::Approx(2.0 * i * dx / (alpha * alpha)).epsilon(0.1));
    CHECK(d.relative_gap <= 0.1);
  }
}

TEST_CASE("transversality holds on most of the uniqueness window") {
  const auto& c = fixture::default_constants();
  const auto scan =
      transversality_scan(fixture::default_record(), fixture::default_front(), c.T_unique);
  REQUIRE_FALSE(scan.rows.empty());
  CHECK(scan.temporal_fraction() >= 0.95);
  CHECK(scan.spatial_fraction() >= 0.95);
}

TEST_CASE("front derivative matches the discrete slope on a fine grid") {
  const ModelParams p = fixture::default_params();
  const auto r = run(p, make_grid(1.25e-3, 1.25e-6, recommended_x_max(p, 0.15), 0.15, 1.0),
                     RelayKind::sharp(), 1000);
  const auto f = extract_front(r);
  const auto cls = classify_boundary(f, p);
  const auto ranges = front_ranges(f);
  REQUIRE_FALSE(ranges.empty());
  std::size_t checked = 0, close = 0;
  for (std::size_t i = ranges[0].first + 1; i < ranges[0].last; ++i) {
    if (f.ell[i] > 0.14 || !cls.node_class[i] || *cls.node_class[i] != BoundaryClass::Regular) continue;
    const auto d = front_derivative_estimate(f, r, i);
    ++checked;
    if (d.relative_gap <= 0.2) ++close;
  }
  REQUIRE(checked > 0);
  MESSAGE(close, " of ", checked, " interior nodes within 20%");
  CHECK(close == checked);
}
