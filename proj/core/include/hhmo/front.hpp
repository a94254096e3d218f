#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hhmo/model.hpp"
#include "hhmo/solver.hpp"

namespace hhmo {

/// Discrete precipitation front: the ignition time of every relay node, or
/// NaN where the node never switched.
struct FrontFunction {
  double dx = 0.0;
  double dt = 0.0;
  std::vector<double> ell;
  /// Time within the ignition step at which u reached u*, by linear
  /// interpolation between the last two steps. Empty means "same as ell".
  std::vector<double> crossing;
  /// |u(x, ell(x)) - u*| per node, NaN where unset.
  std::vector<double> u_residual;
  /// Largest residual over non-degenerate nodes (those not on the parabola).
  double max_residual = 0.0;
  std::size_t max_residual_node = 0;
  /// Largest residual over all front nodes, including the parabola.
  double max_residual_all = 0.0;

  std::size_t size() const { return ell.size(); }
  bool contains(std::size_t i) const { return i < ell.size() && ell[i] == ell[i]; }
  double x(std::size_t i) const { return static_cast<double>(i) * dx; }
  std::size_t count() const;
  double crossing_at(std::size_t i) const { return crossing.empty() ? ell[i] : crossing[i]; }
};

/// Sub-step time at which u crossed u_star during the ignition step, clamped
/// to [time - dt, time]. Falls back to the ignition time when the previous
/// step is unavailable.
double crossing_time(const IgnitionData& ignition, double u_star, double dt);

struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;  // inclusive
};

/// Maximal runs of consecutive front nodes.
std::vector<IndexRange> front_ranges(const FrontFunction& front);

/// max(2 dt, 4 dx x / alpha^2): grid uncertainty of x^2/alpha^2.
double parabola_tolerance(double x, double dx, double dt, double alpha);

/// Reads ignition times from the record. Throws EmptyFront if none ignited.
FrontFunction extract_front(const SolutionRecord& record);

struct Interval {
  double begin = 0.0;
  double end = 0.0;  // +inf for an unbounded trailing interring
  std::size_t first_node = 0;
  std::size_t last_node = 0;

  double width() const { return end - begin; }
};

struct RingSegmentation {
  std::vector<Interval> rings;
  std::vector<Interval> interrings;
  double X_star = 0.0;
  /// True when the alternation held up to the end of the analysed range.
  bool reached_data_end = false;
  std::size_t analyzed_nodes = 0;
};

/// Segments a node pattern of final precipitation values (1 = precipitated).
///
/// Runs shorter than measure_tol * (pattern length) nodes are absorbed into
/// their neighbours. If `open_end` the trailing 0-run becomes [X, +inf).
RingSegmentation segment_pattern(std::span<const int> p_star, double dx, double measure_tol,
                                 bool open_end = true);

/// p*(x) is the final p at nodes behind the source (x <= alpha sqrt(t_end));
/// nodes further out have not been decided yet and are not analysed.
RingSegmentation segment_rings(const SolutionRecord& record, double measure_tol = 0.0);

enum class BoundaryClass { Regular, Degenerate, Jump };

std::string to_string(BoundaryClass c);

struct RingStartCheck {
  std::size_t node = 0;
  double ell = 0.0;
  double parabola = 0.0;
  bool on_parabola = false;
};

struct BoundaryClassification {
  std::vector<std::optional<BoundaryClass>> node_class;  // empty for non-front nodes
  std::size_t regular = 0;
  std::size_t degenerate = 0;
  std::size_t jump = 0;
  double median_increment = 0.0;
  std::vector<RingStartCheck> ring_starts;
};

BoundaryClassification classify_boundary(const FrontFunction& front, const ModelParams& params,
                                         double jump_factor = 50.0);

struct SlopeCheckReport {
  std::size_t pairs = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  std::size_t worst_first = 0;
  std::size_t worst_second = 0;
  double slack = 0.0;
  bool holds = true;
};

/// Checks ell(y2) - ell(y1) >= C_ell (y2^2 - y1^2) - slack on all pairs of
/// consecutive-run front nodes in the first run with y <= L and ell <= T2.
/// The slack absorbs the one-step quantisation of ignition times.
SlopeCheckReport front_slope_check(const FrontFunction& front, const ModelConstants& constants,
                                   double slack);

struct MonotonicityReport {
  std::size_t pairs = 0;
  std::size_t ties = 0;
  std::size_t decreases = 0;
  std::vector<std::size_t> flagged;  // left node of each tie or decrease
};

/// Strict increase of ell across consecutive nodes of each run.
MonotonicityReport front_monotonicity(const FrontFunction& front);

struct EnvelopeReport {
  std::size_t nodes = 0;
  std::size_t below = 0;  // ell < (y/alpha_star)^2 - tol
  std::size_t above = 0;  // ell > y^2/alpha^2 + tol
  double worst_lower_margin = std::numeric_limits<double>::infinity();
  double worst_upper_margin = std::numeric_limits<double>::infinity();
};

EnvelopeReport front_envelope(const FrontFunction& front, const ModelParams& params,
                              double alpha_star, double tol);

struct CanonicalPReport {
  std::size_t checked = 0;
  std::size_t mismatches = 0;
  /// Mismatches farther than one time step from the node's ignition time.
  std::size_t mismatches_outside_window = 0;
};

/// p(x,t) = 1 if x in I and t >= ell(x), else 0.
double canonical_p(const FrontFunction& front, std::size_t node, double t);

/// Compares every stored (node, snapshot) value of p with canonical_p.
CanonicalPReport canonical_p_check(const SolutionRecord& record, const FrontFunction& front);

struct FrozenReport {
  std::size_t checked = 0;
  std::size_t violations = 0;
  std::optional<std::size_t> first_violation_node;
};

/// Bitwise constancy of p at each node over snapshots with t > x^2/alpha^2.
FrozenReport frozen_above_parabola(const SolutionRecord& record);

}  // namespace hhmo
