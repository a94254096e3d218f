#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hhmo/config.hpp"
#include "hhmo/duhamel.hpp"
#include "hhmo/front.hpp"
#include "hhmo/model.hpp"
#include "hhmo/ode_toy.hpp"
#include "hhmo/solver.hpp"
#include "hhmo/uniqueness.hpp"

namespace hhmo {

/// Writes `doc` as indented JSON with a trailing newline. Throws Error{Io}.
void write_json(const std::filesystem::path& path, const Json& doc);
Json read_json(const std::filesystem::path& path);

/// Shortest representation that parses back to the same double; "nan" and
/// "inf" for non-finite values. Independent of the C locale.
std::string format_double(double v);
double parse_double(std::string_view text);

/// One CSV table: header row plus numeric rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(const std::filesystem::path& path, const CsvTable& table);
CsvTable read_csv(const std::filesystem::path& path);

/// A record is a directory holding record.json (metadata, snapshot times,
/// ignition history) plus u.csv, p.csv and accumulator.csv, each with a
/// header "t,<x_0>,<x_1>,..." and one row per snapshot.
void write_record(const std::filesystem::path& dir, const SolutionRecord& record,
                  const Json& config);
SolutionRecord read_record(const std::filesystem::path& dir);

Json to_json(const ModelParams& params);
Json to_json(const GridSpec& grid);
Json to_json(const RelayKind& relay);

/// Flat object with psi_alpha, alpha_star, t_star, L, C_psi, c_psi, C_ell,
/// T1, T2, T_unique.
Json constants_json(const ModelConstants& c);
ModelConstants constants_from_json(const Json& j);

/// Constants plus the quantities that qualify them (L_lemma, the T1
/// ceiling, whether T1 was measured).
Json constants_report(const ModelConstants& c, const Json& config);

struct FrontAnalysis {
  FrontFunction front;
  RingSegmentation rings;
  BoundaryClassification boundary;
  MonotonicityReport monotonicity;
  EnvelopeReport envelope;
  SlopeCheckReport slope;
  CanonicalPReport canonical;
  FrozenReport frozen;
};

Json front_report(const FrontAnalysis& analysis, const Json& config);
/// x, ell, crossing, u_residual, class per front node.
CsvTable front_table(const FrontAnalysis& analysis);

struct SkippedProbe {
  Probe probe;
  std::string reason;
};

struct Diagnostics {
  IdentityTable identity;
  std::vector<SkippedProbe> skipped;
  TransversalityScan transversality;
  BoundMargins bounds;
  double t_limit = 0.0;
};

Json diagnostics_report(const Diagnostics& d, const Json& config);

Json comparison_report(const ComparisonReport& r, const Json& config);
/// t, sup_diff, energy, energy_reverse.
CsvTable comparison_table(const ComparisonReport& r);

Json toy_report(const toy::FeasibilityTable& table);

Json sweep_report(const SweepTable& table, const Json& config);

}  // namespace hhmo
