// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "hhmo/duhamel.hpp"
#include "hhmo/front.hpp"
#include "hhmo/model.hpp"
#include "hhmo/ode_toy.hpp"
#include "hhmo/solver.hpp"
#include "hhmo/uniqueness.hpp"

using namespace hhmo;

namespace {

using Clock = std::chrono::steady_clock;

toy::ToyConfig toy_config(toy::Forcing forcing) {
  toy::ToyConfig c;
  c.forcing = forcing;
  return c;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string details;
};

class Details {
 public:
  template <class T>
  Details& operator()(const std::string& key, const T& value) {
    if (!first_) out_ << ", ";
    first_ = false;
    out_ << key << "=" << value;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
  bool first_ = true;
};

// 1. ODE dichotomy.
Outcome toy_dichotomy() {
  using namespace toy;
  const auto start = Clock::now();
  const auto constant = enumerate(toy_config(Forcing::Constant));
  const auto linear = enumerate(toy_config(Forcing::Linear));
  const double elapsed = seconds_since(start);

  auto feasible_in = [](const FeasibilityTable& t, bool pu, bool pv) {
    for (const auto& row : t.rows)
      if (row.policy == SwitchPolicy{pu, pv}) return row.result.feasible;
    return false;
  };
  const bool policies = constant.feasible_count == 1 && feasible_in(constant, true, true) &&
                  feasible_in(linear, true, false) && feasible_in(linear, false, true) &&
                  !feasible_in(linear, false, false);

  struct Case {
    Forcing forcing;
    SwitchPolicy policy;
    std::function<double(double)> u, v;
  };
  const std::vector<Case> cases{
      {Forcing::Constant, {false, false}, [](double t) { return (std::exp(2 * t) - 1) / 4; },
       [](double t) { return (std::exp(2 * t) - 1) / 4; }},
      {Forcing::Constant, {true, false}, [](double t) { return -t / 2; },
       [](double t) { return t / 2; }},
      {Forcing::Constant, {true, true}, [](double t) { return (1 - std::exp(2 * t)) / 4; },
       [](double t) { return (1 - std::exp(2 * t)) / 4; }},
      {Forcing::Linear, {true, false}, [](double t) { return -t; }, [](double) { return 0.0; }},
      {Forcing::Linear, {false, true}, [](double) { return 0.0; }, [](double t) { return -t; }},
      {Forcing::Linear, {false, false},
       [](double t) { return (std::exp(2 * t) - 1 - 2 * t) / 4; },
       [](double t) { return (std::exp(2 * t) - 1 - 2 * t) / 4; }},
  };
  double worst = 0.0;
  for (const auto& c : cases) {
    const auto tr = integrate(toy_config(c.forcing), c.policy);
    const double T = tr.t.back();
    worst = std::max({worst, std::fabs(tr.u.back() - c.u(T)), std::fabs(tr.v.back() - c.v(T))});
  }
  Outcome o;
  o.pass = policies && worst <= 1e-8 && elapsed < 1.0;
  o.details = Details()("constant_feasible", constant.feasible_count)(
                  "linear_feasible", linear.feasible_count)("closed_form_err", worst)(
                  "runtime_s", elapsed)
                  .str();
  return o;
}

// 2. Solver fidelity without precipitation, using the source-deposition
// scheme (the deficit scheme reproduces psi to rounding when p = 0).
double deposition_error(const ModelParams& p, double dx, double dt) {
  const GridSpec g = make_grid(dx, dt, recommended_x_max(p, 1.0), 1.0);
  RunOptions options;
  options.disable_precipitation = true;
  Solver solver(p, g, RelayKind::sharp(), Scheme::SourceDeposition, options);
  double worst = 0.0;
  for (int k = 0; k <= 15; ++k) {
    const double t = 0.25 + 0.05 * k;
    while (solver.time() < t - 0.5 * dt) solver.step();
    const auto u = solver.u_field(g.nodes());
    for (std::size_t i = 0; i < u.size(); ++i)
      worst = std::max(worst, std::fabs(u[i] - psi(g.x(i), solver.time(), p)));
  }
  return worst;
}

Outcome solver_fidelity() {
  const auto start = Clock::now();
  const ModelParams p = fixture::default_params();
  const GridSpec g = fixture::default_grid();
  const double coarse = deposition_error(p, g.dx, g.dt);
  const double fine = deposition_error(p, g.dx / 2, g.dt / 4);
  const double elapsed = seconds_since(start);
  Outcome o;
  o.pass = coarse <= 1e-3 && coarse / fine >= 3.0 && elapsed < 120.0;
  o.details = Details()("sup_err", coarse)("sup_err_refined", fine)("ratio", coarse / fine)(
                  "runtime_s", elapsed)
                  .str();
  return o;
}

// 3. Invariant suite on the default run.
Outcome invariants() {
  const auto& r = fixture::default_record();
  const auto& c = fixture::default_constants();
  const double u_t_tol = 1e-6;
  double above_psi = -INFINITY, w_increase = -INFINITY, p_outside = 0.0, u_t_margin = INFINITY;
  std::size_t w_violations = 0, u_t_checked = 0;
  for (std::size_t k = 0; k < r.snapshots(); ++k) {
    const double t = r.times[k];
    for (std::size_t i = 0; i < r.n_nodes; ++i) {
      above_psi = std::max(above_psi, r.w_value(k, i));
      if (r.x(i) > c.alpha_star * std::sqrt(t) + r.grid.dx)
        p_outside = std::max(p_outside, std::fabs(r.p_value(k, i)));
      if (k + 1 < r.snapshots()) {
        const double w0 = r.w_value(k, i), w1 = r.w_value(k + 1, i);
        const double inc = w1 - w0;
        w_increase = std::max(w_increase, inc);
        if (inc > 1e-8 * (1.0 + std::fabs(w0))) ++w_violations;
        if (t >= 10.0 * r.grid.dt) {
          const double u_t = (r.u_value(k + 1, i) - r.u_value(k, i)) / (r.times[k + 1] - t);
          u_t_margin = std::min(u_t_margin, c.C_psi / t - u_t);
          ++u_t_checked;
        }
      }
    }
  }
  Outcome o;
  o.pass = above_psi <= 1e-8 && w_violations == 0 && p_outside == 0.0 && u_t_checked > 0 &&
           u_t_margin >= -u_t_tol;
  o.details = Details()("max(u-psi)", above_psi)("max_w_increase", w_increase)(
                  "w_violations", w_violations)("max_p_beyond_alpha_star", p_outside)(
                  "min(C_psi/t-u_t)", u_t_margin)("u_t_tol", u_t_tol)
                  .str();
  return o;
}

// 4. First ring width.
Outcome first_ring() {
  const auto& r = fixture::default_record();
  const auto& c = fixture::default_constants();
  const auto seg = segment_rings(r);
  Outcome o;
  if (seg.rings.empty()) {
    o.details = "no ring found";
    return o;
  }
  const double bound = c.L - 2.0 * r.grid.dx;
  o.pass = seg.rings[0].width() >= bound;
  o.details = Details()("ring", "[" + std::to_string(seg.rings[0].begin) + ", " +
                                    std::to_string(seg.rings[0].end) + "]")(
                  "width", seg.rings[0].width())("bound", bound)(
                  "truncated_at_data_end", seg.reached_data_end && seg.rings.size() == 1)
                  .str();
  return o;
}

// 5. Front monotonicity and envelope.
Outcome front_shape() {
  const auto& f = fixture::default_front();
  const auto& c = fixture::default_constants();
  const auto mono = front_monotonicity(f);
  const auto env = front_envelope(f, fixture::default_params(), c.alpha_star, f.dt);
  const double tie_fraction = static_cast<double>(mono.ties) / static_cast<double>(f.count());
  Outcome o;
  o.pass = mono.decreases == 0 && tie_fraction <= 0.01 && env.below == 0 && env.above == 0 &&
           env.nodes == f.count();
  o.details = Details()("front_nodes", f.count())("ties", mono.ties)("decreases", mono.decreases)(
                  "below_lower", env.below)("above_upper", env.above)(
                  "lower_margin", env.worst_lower_margin)("upper_margin", env.worst_upper_margin)
                  .str();
  return o;
}

// 6. Duhamel identity convergence and the F bounds. The refined run halves
// dx and dt with the same stride in steps, so the snapshot interval halves too.
Outcome duhamel() {
  const auto& coarse = fixture::default_record();
  const auto& c = fixture::default_constants();
  const ModelParams p = fixture::default_params();
  const GridSpec g = fixture::default_grid();
  const auto fine = run(p, make_grid(g.dx / 2, g.dt / 2, g.x_max, g.t_max, g.record_x_max),
                        RelayKind::sharp(), fixture::kDefaultStride);
  const auto probes = default_probes();
  const auto a = check_ut_identity(coarse, fixture::default_front(), probes);
  const auto b = check_ut_identity(fine, extract_front(fine), probes);
  const double ratio = a.max_abs_residual / b.max_abs_residual;

  const double tol = 1e-6;
  double F1_max = 0.0, F2_max = 0.0;
  std::size_t points = 0, skipped = 0;
  const auto& front = fixture::default_front();
  for (double x = 0.025; x <= 2.0; x += 0.1) {
    for (std::size_t k = 1; k < coarse.snapshots(); k += 12) {
      const double t = coarse.times[k];
      F1_max = std::max(F1_max, eval_F1(coarse, x, t));
      if (t <= c.T2) {
        const double F2 = eval_F2(front, x, t);
        if (std::isinf(F2)) {
          ++skipped;
        } else {
          F2_max = std::max(F2_max, F2);
        }
      }
      ++points;
    }
  }
  Outcome o;
  o.pass = ratio >= 2.0 && F1_max <= F1_upper_bound(c) + tol && F2_max <= F2_upper_bound(c) + tol;
  o.details = Details()("residual", a.max_abs_residual)("residual_refined", b.max_abs_residual)(
                  "ratio", ratio)("F1_max", F1_max)("F1_bound", F1_upper_bound(c))(
                  "F2_max", F2_max)("F2_bound", F2_upper_bound(c))("points", points)(
                  "F2_divergent_skipped", skipped)
                  .str();
  return o;
}

// 7. Transversality on the uniqueness window.
Outcome transversality() {
  const auto& c = fixture::default_constants();
  const auto scan =
      transversality_scan(fixture::default_record(), fixture::default_front(), c.T_unique);
  Outcome o;
  o.pass = !scan.rows.empty() && scan.spatial_fraction() >= 0.95 &&
           scan.temporal_fraction() >= 0.95;
  o.details = Details()("nodes", scan.rows.size())("spatial", scan.spatial_fraction())(
                  "temporal", scan.temporal_fraction())
                  .str();
  return o;
}

// 8. Sharp against mollified relays on [0, T_unique].
Outcome uniqueness() {
  const auto& c = fixture::default_constants();
  SweepBase base;
  base.params = fixture::default_params();
  const GridSpec g = fixture::default_grid();
  base.grid = make_grid(g.dx, g.dt, g.x_max, c.T_unique, g.record_x_max);
  base.snapshot_stride = fixture::kDefaultStride;
  const std::vector<Perturbation> perturbations{
      Perturbation::relay_kind(RelayKind::mollified(1e-3)),
      Perturbation::relay_kind(RelayKind::mollified(5e-4))};
  const auto table = perturbation_sweep(base, perturbations);
  Outcome o;
  o.pass = true;
  Details d;
  d("agreement_tol", table.agreement_tol);
  for (const auto& row : table.rows) {
    o.pass = o.pass && row.max_sup_diff <= table.agreement_tol && row.energy_monotone;
    d(row.label + ".sup_diff", row.max_sup_diff)(row.label + ".energy_monotone",
                                                 row.energy_monotone ? "yes" : "no");
  }
  o.details = d.str();
  return o;
}

// 9. Property (P): p frozen above the parabola.
Outcome property_p() {
  const auto r = run(fixture::default_params(), fixture::default_grid(), RelayKind::property_p(),
                     fixture::kDefaultStride);
  const auto rep = frozen_above_parabola(r);
  Outcome o;
  o.pass = rep.checked > 0 && rep.violations == 0;
  o.details = Details()("checked", rep.checked)("violations", rep.violations).str();
  return o;
}

// 10. p rebuilt from the front.
Outcome canonical() {
  const auto rep = canonical_p_check(fixture::default_record(), fixture::default_front());
  Outcome o;
  o.pass = rep.checked > 0 && rep.mismatches_outside_window == 0;
  o.details = Details()("checked", rep.checked)("mismatches", rep.mismatches)(
                  "outside_one_step", rep.mismatches_outside_window)
                  .str();
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ode dichotomy", toy_dichotomy},
      {"solver fidelity", solver_fidelity},
      {"invariant suite", invariants},
      {"first ring width", first_ring},
      {"front envelope and monotonicity", front_shape},
      {"duhamel identity", duhamel},
      {"transversality", transversality},
      {"sharp vs mollified agreement", uniqueness},
      {"property P frozen", property_p},
      {"canonical p reconstruction", canonical},
  };
  int failed = 0;
  for (std::size_t n = 0; n < criteria.size(); ++n) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = criteria[n].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.details = std::string("error: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s (%s; %.1fs)\n", o.pass ? "PASS" : "FAIL", n + 1,
                criteria[n].first.c_str(), o.details.c_str(), seconds_since(start));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria failed\n", failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
