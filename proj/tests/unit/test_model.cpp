#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixtures.hpp"
#include "hhmo/errors.hpp"
#include "hhmo/model.hpp"
#include "oracles.hpp"

using namespace hhmo;

TEST_CASE("profile value at the plateau edge and one-sided limits") {
  for (double alpha : {0.5, 1.0, 2.0}) {
    for (double beta : {0.3, 1.0}) {
      ModelParams p{alpha, beta, 0.1};
      const double expected =
          alpha * beta * std::sqrt(std::numbers::pi) / 2.0 * std::exp(alpha * alpha / 4.0) *
          std::erfc(alpha / 2.0);
      CHECK(capital_psi(alpha, p) == doctest::Approx(expected).epsilon(1e-14));
      CHECK(capital_psi(alpha - 1e-9, p) == doctest::Approx(capital_psi(alpha + 1e-9, p)).epsilon(1e-8));
      CHECK(capital_psi(0.0, p) == capital_psi(alpha, p));
    }
  }
}

TEST_CASE("profile against quadrature erfc oracle") {
  ModelParams p{1.0, 1.0, 0.1};
  CHECK(capital_psi(0.0, p) == doctest::Approx(oracle::profile(0.0, 1.0, 1.0)).epsilon(1e-13));
  for (double eta : {1.0, 1.5, 2.7, 4.0, 7.5}) {
    CHECK(capital_psi(eta, p) == doctest::Approx(oracle::profile(eta, 1.0, 1.0)).epsilon(1e-11));
  }
}

TEST_CASE("profile decays to zero and is non-increasing on random pairs") {
  ModelParams p{1.3, 0.7, 0.1};
  CHECK(capital_psi(40.0, p) < 1e-150);
  CHECK(capital_psi(100.0, p) == 0.0);
  CHECK(capital_psi(10.0, p) < capital_psi(5.0, p));
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> eta(0.0, 12.0);
  for (int i = 0; i < 2000; ++i) {
    double a = eta(rng), b = eta(rng);
    if (a > b) std::swap(a, b);
    CHECK(capital_psi(a, p) >= capital_psi(b, p));
  }
}

TEST_CASE("psi is constant behind the parabola and zero at t = 0") {
  ModelParams p{1.0, 1.0, 0.1};
  CHECK(psi(0.3, 0.25, p) == psi_alpha(p));
  CHECK(psi(0.5, 0.25, p) == psi_alpha(p));
  CHECK(psi(0.7, 0.0, p) == 0.0);
  CHECK(psi_x(0.3, 0.25, p) == 0.0);
  CHECK(psi_t(0.3, 0.25, p) == 0.0);
  CHECK(psi_t(0.3, -1.0, p) == 0.0);
}

TEST_CASE("psi derivatives against finite differences") {
  ModelParams p{1.0, 1.0, 0.1};
  const double fd_x = oracle::derivative([&](double x) { return psi(x, 1.0, p); }, 2.0);
  CHECK(std::fabs(psi_x(2.0, 1.0, p) - fd_x) < 1e-6);
  for (double x : {1.5, 2.0, 3.0}) {
    const double fd_t = oracle::derivative([&](double t) { return psi(x, t, p); }, 1.0, 1e-4);
    CHECK(psi_t(x, 1.0, p) == doctest::Approx(fd_t).epsilon(1e-8));
    // Heat equation away from the source.
    const double fd_xx =
        oracle::derivative([&](double y) { return psi_x(y, 1.0, p); }, x, 1e-4);
    CHECK(psi_t(x, 1.0, p) == doctest::Approx(fd_xx).epsilon(1e-7));
  }
}

TEST_CASE("heat kernel values and mass") {
  CHECK(heat_kernel(0.4, -1.0) == 0.0);
  CHECK(heat_kernel(0.4, 0.0) == 0.0);
  CHECK(heat_kernel(0.0, 1.0) == doctest::Approx(1.0 / std::sqrt(4.0 * std::numbers::pi)).epsilon(1e-15));
  const double mass = oracle::integrate([](double x) { return heat_kernel(x, 1.0); }, -20.0, 20.0);
  CHECK(std::fabs(mass - 1.0) < 1e-10);
  for (double t : {1e-3, 0.1, 5.0}) {
    const double w = 40.0 * std::sqrt(t);
    const double m = oracle::integrate([&](double x) { return heat_kernel(x, t); }, -w, w);
    CHECK(std::fabs(m - 1.0) < 1e-8);
  }
}

TEST_CASE("sup of z exp(-z^2/4) on a fine grid") {
  const auto [best, arg] =
      oracle::grid_max([](double z) { return z * std::exp(-z * z / 4.0); }, 0.0, 10.0, 1000000);
  CHECK(max_z_exp() == doctest::Approx(best).epsilon(1e-11));
  CHECK(arg == doctest::Approx(std::sqrt(2.0)).epsilon(1e-5));
}

TEST_CASE("alpha_star solves Psi(alpha_star) = u_star; independent root finders agree") {
  const ModelParams p = fixture::default_params();
  const double a_star = find_alpha_star(p);
  CHECK(std::fabs(capital_psi(a_star, p) - p.u_star) < 1e-12);
  auto g = [&](double eta) { return oracle::profile(eta, 1.0, 1.0) - p.u_star; };
  const double bis = oracle::bisect(g, 1.0, 3.0, 1e-13);
  const double sec = oracle::secant(g, 1.1, 1.4);
  CHECK(bis == doctest::Approx(sec).epsilon(1e-11));
  CHECK(a_star == doctest::Approx(bis).epsilon(1e-11));
}

TEST_CASE("default constants against closed forms and brute-force extrema") {
  const ModelParams p = fixture::default_params();
  const ModelConstants c = compute_constants(p);
  CHECK(c.t_star == doctest::Approx(0.2).epsilon(1e-13));
  CHECK(c.L == doctest::Approx(std::sqrt(0.2)).epsilon(1e-13));
  CHECK(c.alpha_star > p.alpha);
  // t psi_t(x, t) as a function of eta = x / sqrt(t), sampled at t = 1.
  auto t_psi_t = [&](double x) { return psi_t(x, 1.0, p); };
  const auto [sup, at] = oracle::grid_max(t_psi_t, 0.0, 10.0, 200000);
  CHECK(c.C_psi == doctest::Approx(sup).epsilon(1e-9));
  const auto [inf, at_min] = oracle::grid_min(t_psi_t, p.alpha + 1e-12, c.alpha_star, 200000);
  CHECK(c.c_psi == doctest::Approx(inf).epsilon(1e-9));
  CHECK(c.T2 <= (c.L / c.alpha_star) * (c.L / c.alpha_star) + 1e-15);
  CHECK(c.T_unique > 0.0);
  CHECK(c.T_unique <= c.T2);
  const double mixed = c.c_psi / (c.alpha_star * c.C_psi * std::sqrt(std::numbers::pi) +
                                  0.5 * p.u_star * std::sqrt(std::numbers::pi / c.C_ell));
  CHECK(c.T_unique == doctest::Approx(std::min(c.T2, mixed)).epsilon(1e-14));
}

TEST_CASE("lemma and proof forms of L differ by alpha") {
  ModelParams p{2.0, 1.0, 0.0};
  p.u_star = 0.7 * psi_alpha(p);
  const ModelConstants c = compute_constants(p);
  CHECK(c.L == doctest::Approx(2.0 * c.L_lemma).epsilon(1e-14));
  CHECK(c.L_lemma == doctest::Approx(std::sqrt(0.3)).epsilon(1e-13));
}

TEST_CASE("constants are bit-identical on repeated calls") {
  const ModelParams p = fixture::default_params();
  CHECK(compute_constants(p) == compute_constants(p));
}

TEST_CASE("threshold at Psi(alpha) is not supercritical") {
  ModelParams p{1.0, 1.0, 0.0};
  p.u_star = psi_alpha(p);
  CHECK_FALSE(is_supercritical(p));
  try {
    compute_constants(p);
    FAIL("expected NotSupercritical");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotSupercritical);
  }
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(validate(ModelParams{-1.0, 1.0, 0.1}), Error);
  CHECK_THROWS_AS(validate(ModelParams{1.0, 0.0, 0.1}), Error);
}

TEST_CASE("measured T1 is capped by the ceiling") {
  const ModelParams p = fixture::default_params();
  const auto c0 = compute_constants(p);
  const auto big = compute_constants(p, {1.0, std::nullopt});
  CHECK(big.T1 == c0.T1_ceiling);
  CHECK(big.T1_measured);
  const auto small = compute_constants(p, {0.05, std::nullopt});
  CHECK(small.T1 == 0.05);
  CHECK(small.T2 == 0.05);
}

TEST_CASE("erfc oracles agree with each other and with the library") {
  for (double x : {0.0, 0.3, 1.0, 2.0, 2.49, 2.51, 4.0, 6.0}) {
    CHECK(oracle::erfc_series(x) == doctest::Approx(oracle::erfc_quadrature(x)).epsilon(1e-12));
    CHECK(std::erfc(x) == doctest::Approx(oracle::erfc_series(x)).epsilon(1e-13));
  }
}
