#include "hhmo/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hhmo/errors.hpp"

namespace hhmo {

namespace {

constexpr double kRootTol = 1e-12;
constexpr int kRootMaxIter = 200;
constexpr double kBracketWidth = 50.0;

}  // namespace

void validate(const ModelParams& params) {
  std::vector<std::string> problems;
  if (!(params.alpha > 0.0) || !std::isfinite(params.alpha)) {
    problems.push_back("alpha must be finite and > 0");
  }
  if (!(params.beta > 0.0) || !std::isfinite(params.beta)) {
    problems.push_back("beta must be finite and > 0");
  }
  if (!(params.u_star > 0.0)) problems.push_back("u_star must be > 0");
  if (problems.empty()) return;
  std::ostringstream os;
  os << "invalid model parameters:";
  for (const auto& p : problems) os << " " << p << ";";
  throw Error(ErrorCode::Validation, os.str());
}

double profile_amplitude(const ModelParams& params) {
  return 0.5 * params.alpha * params.beta * std::sqrt(std::numbers::pi) *
         std::exp(0.25 * params.alpha * params.alpha);
}

double capital_psi(double eta, const ModelParams& params) {
  const double a = std::abs(eta) <= params.alpha ? params.alpha : std::abs(eta);
  return profile_amplitude(params) * std::erfc(0.5 * a);
}

double psi_alpha(const ModelParams& params) {
  return capital_psi(params.alpha, params);
}

double psi(double x, double t, const ModelParams& params) {
  if (t <= 0.0) return x == 0.0 ? psi_alpha(params) : 0.0;
  return capital_psi(x / std::sqrt(t), params);
}

double psi_x(double x, double t, const ModelParams& params) {
  if (t <= 0.0) return 0.0;
  const double st = std::sqrt(t);
  const double eta = std::abs(x) / st;
  if (eta < params.alpha) return 0.0;
  // d/dx A erfc(x/(2 sqrt t)) = -A/(sqrt(pi t)) e^{-eta^2/4}
  const double v = -profile_amplitude(params) / (std::sqrt(std::numbers::pi) * st) *
                   std::exp(-0.25 * eta * eta);
  return x < 0.0 ? -v : v;
}

double psi_t(double x, double t, const ModelParams& params) {
  if (t <= 0.0) return 0.0;
  const double eta = std::abs(x) / std::sqrt(t);
  if (eta <= params.alpha) return 0.0;
  return 0.25 * params.alpha * params.beta * std::exp(0.25 * params.alpha * params.alpha) *
         eta * std::exp(-0.25 * eta * eta) / t;
}

double heat_kernel(double x, double t) {
  if (t <= 0.0) return 0.0;
  return std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
}

bool is_supercritical(const ModelParams& params) {
  return params.u_star < psi_alpha(params);
}

double find_alpha_star(const ModelParams& params) {
  validate(params);
  if (!is_supercritical(params)) {
    throw Error(ErrorCode::NotSupercritical,
                "u_star >= Psi(alpha): threshold is not supercritical");
  }
  double lo = params.alpha;
  double hi = params.alpha + kBracketWidth;
  auto f = [&](double eta) { return capital_psi(eta, params) - params.u_star; };
  if (!(f(lo) > 0.0) || !(f(hi) < 0.0)) {
    throw Error(ErrorCode::RootNotBracketed,
                "Psi(eta) - u_star does not change sign on (alpha, alpha + 50)");
  }
  for (int it = 0; it < kRootMaxIter && hi - lo > kRootTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (f(mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double max_z_exp() { return std::numbers::sqrt2 * std::exp(-0.5); }

double min_y_exp(double lo, double hi) {
  auto g = [](double y) { return y * std::exp(-0.25 * y * y); };
  return std::min(g(lo), g(hi));
}

double t1_gradient_bound(double t, const ModelParams& params, double alpha_star) {
  const double a = params.alpha;
  return -(a * params.beta / (4.0 * std::sqrt(t))) *
         std::exp(0.25 * (a * a - alpha_star * alpha_star));
}

ModelConstants compute_constants(const ModelParams& params,
                                 const ConstantsOptions& options) {
  validate(params);
  ModelConstants c;
  c.psi_alpha = psi_alpha(params);
  if (!is_supercritical(params)) {
    throw Error(ErrorCode::NotSupercritical,
                "u_star >= Psi(alpha): ring constants are undefined");
  }
  const double a = params.alpha;
  const double b = params.beta;
  c.alpha_star = find_alpha_star(params);
  c.t_star = (c.psi_alpha - params.u_star) / c.psi_alpha;
  c.L = a * std::sqrt(c.t_star);
  c.L_lemma = std::sqrt(c.t_star);

  const double pref = 0.25 * a * b * std::exp(0.25 * a * a);
  c.C_psi = pref * max_z_exp();
  c.c_psi = pref * min_y_exp(a, c.alpha_star);
  c.C_ell = (a * b / (8.0 * c.alpha_star * c.C_psi)) *
            std::exp(0.25 * (a * a - c.alpha_star * c.alpha_star));

  const double ring_time = (c.L / c.alpha_star) * (c.L / c.alpha_star);
  c.T1_ceiling = options.t1_ceiling.value_or(ring_time);
  c.T1_measured = options.measured_t1.has_value();
  c.T1 = c.T1_measured ? std::min(*options.measured_t1, c.T1_ceiling) : c.T1_ceiling;
  c.T2 = std::min(ring_time, c.T1);
  const double denom = c.alpha_star * c.C_psi * std::sqrt(std::numbers::pi) +
                       0.5 * params.u_star * std::sqrt(std::numbers::pi / c.C_ell);
  c.T_unique = std::min(c.T2, c.c_psi / denom);
  return c;
}

}  // namespace hhmo
