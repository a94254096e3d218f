#include <doctest.h>

#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "hhmo/errors.hpp"
#include "hhmo/uniqueness.hpp"

using namespace hhmo;

namespace {

/// Two-snapshot record on n nodes with the given fields and ignition times.
SolutionRecord hand_built(double dx, double dt, const std::vector<std::vector<double>>& u,
                          const std::vector<double>& ell) {
  SolutionRecord r;
  r.params = fixture::default_params();
  const std::size_t n = u.front().size();
  r.grid = make_grid(dx, dt, dx * static_cast<double>(n - 1), dt * static_cast<double>(u.size() - 1));
  r.n_nodes = n;
  r.n_relay = ell.size();
  for (std::size_t k = 0; k < u.size(); ++k) {
    r.times.push_back(static_cast<double>(k) * dt);
    r.steps.push_back(k);
    r.u.insert(r.u.end(), u[k].begin(), u[k].end());
    r.p.insert(r.p.end(), n, 0.0);
    r.accumulator.insert(r.accumulator.end(), ell.size(), 0.0);
  }
  r.ignition.assign(ell.size(), IgnitionData{});
  for (std::size_t i = 0; i < ell.size(); ++i) r.ignition[i].time = ell[i];
  return r;
}

}  // namespace

TEST_CASE("a record compared with itself") {
  const auto& r = fixture::default_record();
  const auto rep = compare(r, r, 1e-6);
  for (std::size_t k = 0; k < rep.times.size(); ++k) {
    CHECK(rep.sup_diff[k] == 0.0);
    CHECK(rep.energy[k] == 0.0);
  }
  CHECK_FALSE(rep.entangled);
  CHECK_FALSE(rep.divergence_time);
  const auto verdict = energy_monotonicity_check(rep, 0.0, rep.times.back());
  CHECK(verdict.monotone);
}

TEST_CASE("fronts crossing once are entangled at the crossing") {
  const double dx = 0.01, dt = 1e-4;
  const std::size_t n = 40;
  std::vector<double> ell1, ell2;
  for (std::size_t i = 0; i < n; ++i) {
    const double base = 0.01 * static_cast<double>(i);
    const double shift = i < 20 ? 10.0 * dt : -10.0 * dt;
    ell1.push_back(base + shift);
    ell2.push_back(base);
  }
  const std::vector<std::vector<double>> u(2, std::vector<double>(n, 0.1));
  const auto rep = compare(hand_built(dx, dt, u, ell1), hand_built(dx, dt, u, ell2), 1.0, 8);
  CHECK(rep.entangled);
  REQUIRE(rep.witness);
  CHECK(rep.witness->first_node <= 19);
  CHECK(rep.witness->last_node >= 20);
  CHECK(rep.witness->x_begin <= 0.195);
  CHECK(rep.witness->x_end >= 0.2);
}

TEST_CASE("fronts that stay ordered are not entangled") {
  const std::vector<int> order{0, 1, 1, 0, 1, 1, 1, 0, 0};
  CHECK_FALSE(find_entanglement(order, 0.01, 4));
  const std::vector<int> mixed{0, 1, 0, 0, 0, 0, 0, -1, 0};
  CHECK_FALSE(find_entanglement(mixed, 0.01, 4));
  CHECK(find_entanglement(mixed, 0.01, 8));
}

TEST_CASE("an energy increase is reported at its snapshot") {
  const double dx = 0.1, dt = 0.01;
  const std::vector<std::vector<double>> u1{{0.3, 0.3}, {0.2, 0.2}, {0.25, 0.25}, {0.1, 0.1}};
  const std::vector<std::vector<double>> u2(4, std::vector<double>{0.0, 0.0});
  const auto rep = compare(hand_built(dx, dt, u1, {}), hand_built(dx, dt, u2, {}), 1.0);
  const auto verdict = energy_monotonicity_check(rep, 0.0, 1.0);
  CHECK_FALSE(verdict.monotone);
  REQUIRE(verdict.first_violation);
  CHECK(*verdict.first_violation == 2);
  CHECK(verdict.violation_time == doctest::Approx(0.02));
}

TEST_CASE("records on different grids need the interpolated comparison") {
  const ModelParams p = fixture::default_params();
  const auto a = run(p, make_grid(1e-2, 4e-5, 4.0, 0.05), RelayKind::sharp(), 250);
  const auto b = run(p, make_grid(5e-3, 1e-5, 4.0, 0.05), RelayKind::sharp(), 1000);
  try {
    compare(a, b, 1e-3);
    FAIL("expected GridMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridMismatch);
  }
  const auto rep = compare_interpolated(a, b, 1e-3);
  CHECK(rep.interpolated);
  CHECK(rep.dx == 1e-2);
  CHECK(rep.max_sup_diff(0.05) < 1e-2);
}

TEST_CASE("mollified runs approach the sharp run as epsilon shrinks") {
  const ModelParams p = fixture::default_params();
  const double T = fixture::default_constants().T_unique;
  const GridSpec g = make_grid(5e-3, 1e-5, recommended_x_max(p, T), T, 2.0);
  const auto sharp = run(p, g, RelayKind::sharp(), 100);
  std::vector<double> sup;
  for (double eps : {1e-3, 2.5e-4}) {
    const auto moll = run(p, g, RelayKind::mollified(eps), 100);
    const auto rep = compare(sharp, moll, 1.0);
    sup.push_back(rep.max_sup_diff(T));
    CHECK_FALSE(rep.entangled);
    CHECK(energy_monotonicity_check(rep, 0.0, T).monotone);
  }
  CHECK(sup[1] < sup[0]);
  MESSAGE("max sup_diff: eps=1e-3 ", sup[0], ", eps=2.5e-4 ", sup[1]);
}

TEST_CASE("empty perturbation list gives an empty table") {
  SweepBase base;
  base.params = fixture::default_params();
  base.grid = make_grid(1e-2, 4e-5, 4.0, 0.05);
  base.snapshot_stride = 50;
  const auto table = perturbation_sweep(base, {}, 1e-3);
  CHECK(table.rows.empty());
  CHECK(table.agreement_tol == 1e-3);
  CHECK_FALSE(table.agreement_tol_measured);
}

TEST_CASE("grid perturbation stays within four refinement errors") {
  const ModelParams p = fixture::default_params();
  const double T = fixture::default_constants().T_unique;
  SweepBase base;
  base.params = p;
  base.grid = make_grid(5e-3, 1e-5, recommended_x_max(p, T), T, 2.0);
  base.snapshot_stride = 100;
  const double refinement = measure_agreement_tol(base, T) / 10.0;
  const Perturbation grid_only[1] = {Perturbation::refine_grid()};
  const auto table = perturbation_sweep(base, grid_only, 10.0 * refinement);
  REQUIRE(table.rows.size() == 1);
  CHECK(table.rows[0].max_sup_diff <= 4.0 * refinement);
  CHECK(table.rows[0].holds);
  MESSAGE("refinement error ", refinement, ", grid perturbation ", table.rows[0].max_sup_diff);
}
