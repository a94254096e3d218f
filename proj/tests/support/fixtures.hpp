#pragma once

#include "hhmo/front.hpp"
#include "hhmo/model.hpp"
#include "hhmo/solver.hpp"

namespace fixture {

inline hhmo::ModelParams default_params() {
  hhmo::ModelParams p;
  p.u_star = 0.8 * hhmo::psi_alpha(p);
  return p;
}

inline const hhmo::ModelConstants& default_constants() {
  static const hhmo::ModelConstants c = hhmo::compute_constants(default_params());
  return c;
}

/// dx = 2.5e-3, dt = 2.5e-6 on [0, 6] up to 2 T2, nodes stored up to x = 3.
inline hhmo::GridSpec default_grid() {
  return hhmo::make_grid(2.5e-3, 2.5e-6, 6.0, 2.0 * default_constants().T2, 3.0);
}

inline constexpr std::size_t kDefaultStride = 400;

/// The reference supercritical run, computed once per process.
inline const hhmo::SolutionRecord& default_record() {
  static const hhmo::SolutionRecord r =
      hhmo::run(default_params(), default_grid(), hhmo::RelayKind::sharp(), kDefaultStride);
  return r;
}

inline const hhmo::FrontFunction& default_front() {
  static const hhmo::FrontFunction f = hhmo::extract_front(default_record());
  return f;
}

}  // namespace fixture
