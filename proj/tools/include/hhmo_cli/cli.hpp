#pragma once

#include <ostream>

#include "hhmo/io.hpp"
#include "hhmo/solver.hpp"

namespace hhmo::cli {

/// Entry point of the hhmo tool. Returns 0 on success, 1 for bad input
/// (flags, config, files) and 2 for numerical failures.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

FrontAnalysis analyze_front(const SolutionRecord& record, const RunConfig& config);

/// Evaluates the probes one at a time; probes that sit on the front are
/// reported as skipped.
Diagnostics run_diagnostics(const SolutionRecord& record, const FrontFunction& front,
                            const RunConfig& config);

}  // namespace hhmo::cli
