#pragma once

#include <optional>

namespace hhmo {

/// Physical parameters of the fast-reaction precipitation model.
///
/// `alpha` is the source speed (the source sits at x = alpha*sqrt(t)),
/// `beta` its strength and `u_star` the supersaturation threshold. An
/// infinite `u_star` is accepted and means "precipitation never starts".
struct ModelParams {
  double alpha = 1.0;
  double beta = 1.0;
  double u_star = 0.0;

  bool operator==(const ModelParams&) const = default;
};

/// Throws Error{Validation} unless alpha, beta, u_star are all positive.
void validate(const ModelParams& params);

/// Prefactor (alpha*beta*sqrt(pi)/2) * exp(alpha^2/4) shared by the profiles.
double profile_amplitude(const ModelParams& params);

/// Precipitation-free self-similar profile Psi(eta). Constant for
/// eta <= alpha, erfc-shaped decay beyond. Even in eta.
double capital_psi(double eta, const ModelParams& params);

/// Psi(alpha), the plateau value behind the source.
double psi_alpha(const ModelParams& params);

/// Precipitation-free solution psi(x,t) = Psi(x/sqrt(t)).
///
/// At t = 0 returns 0 for x != 0 and the plateau Psi(alpha) at the origin
/// (the limit along the parabola x = alpha*sqrt(t)).
double psi(double x, double t, const ModelParams& params);

/// Spatial derivative of psi; 0 inside the plateau. At the parabola the
/// right-sided value is returned.
double psi_x(double x, double t, const ModelParams& params);

/// Time derivative of psi, (alpha*beta/4) e^{alpha^2/4} eta e^{-eta^2/4} / t
/// beyond the parabola, 0 inside the plateau. Returns 0 for t <= 0.
double psi_t(double x, double t, const ModelParams& params);

/// Standard 1-D heat kernel; exactly 0 for t <= 0.
double heat_kernel(double x, double t);

/// u_star < Psi(alpha).
bool is_supercritical(const ModelParams& params);

/// Root of Psi(alpha_star) = u_star by bisection on (alpha, alpha + 50).
/// Throws NotSupercritical or RootNotBracketed.
double find_alpha_star(const ModelParams& params);

/// Derived constants of the model. All are functions of the parameters
/// except T1, which is a measured quantity (see measure_t1 in solver.hpp)
/// capped by a fallback ceiling.
struct ModelConstants {
  double psi_alpha = 0.0;
  double alpha_star = 0.0;
  double t_star = 0.0;
  double L = 0.0;          // alpha * sqrt(t_star), first-ring width bound
  double L_lemma = 0.0;    // sqrt((Psi(alpha) - u*)/Psi(alpha)); differs from L by 1/alpha
  double C_psi = 0.0;      // sup_x psi_t <= C_psi / t
  double c_psi = 0.0;      // psi_t >= c_psi / t between the two parabolas
  double C_ell = 0.0;      // front growth l(y2) - l(y1) >= C_ell (y2^2 - y1^2)
  double T1 = 0.0;
  double T1_ceiling = 0.0;
  bool T1_measured = false;
  double T2 = 0.0;
  double T_unique = 0.0;

  bool operator==(const ModelConstants&) const = default;
};

struct ConstantsOptions {
  /// Value of T1 measured on a reference solution; nullopt uses the ceiling.
  std::optional<double> measured_t1;
  /// Fallback ceiling for T1; nullopt means (L/alpha_star)^2, which makes
  /// the ceiling inactive in T2.
  std::optional<double> t1_ceiling;
};

/// Throws NotSupercritical when u_star >= Psi(alpha).
ModelConstants compute_constants(const ModelParams& params,
                                 const ConstantsOptions& options = {});

/// sup_z z e^{-z^2/4} = sqrt(2) e^{-1/2}, attained at z = sqrt(2).
double max_z_exp();

/// min over [lo, hi] of y e^{-y^2/4} (unimodal, so the minimum sits at an end).
double min_y_exp(double lo, double hi);

/// Upper bound on u_x on the essential domain used to measure T1:
/// -(alpha*beta/(4 sqrt(t))) e^{(alpha^2 - alpha_star^2)/4}.
double t1_gradient_bound(double t, const ModelParams& params, double alpha_star);

}  // namespace hhmo
