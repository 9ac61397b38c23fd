#pragma once

#include "hhlab/exponents.hpp"
#include "hhlab/nonexistence.hpp"
#include "hhlab/selfsim.hpp"
#include "hhlab/semigroup.hpp"
#include "hhlab/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

// vendored single-header nlohmann/json
#include "json.hpp"

namespace hhlab {

using Json = nlohmann::json;

// region mask: CSV with the 1/q samples as the header row and the s samples
// as the first column; cells are 0/1
void write_region_csv(const RegionMask& mask, std::ostream& os);
// JSON form: axes plus a run-length encoding of the row-major mask
Json region_to_json(const RegionMask& mask);
RegionMask region_from_json(const Json& j);

Json condition_report_to_json(const ConditionReport& rep);

// field: JSON header (kind, dimension, coordinate spec) + CSV value payload
Json field_header_json(const Field& f);
void write_field_csv(const Field& f, std::ostream& os);
void write_field(const Field& f, const std::filesystem::path& dir, const std::string& stem);

// trajectory: directory with one value file per slice plus an index JSON
void write_trajectory(const Trajectory& u, const std::filesystem::path& dir);

void write_solve_outcome(const SolveOutcome& out, const std::filesystem::path& dir);

void write_smoothing_csv(const SmoothingRate& rate, std::ostream& os);
Json divergence_report_to_json(const DivergenceReport& rep);
Json moment_probe_to_json(const MomentProbe& probe);
Json deviation_report_to_json(const DeviationReport& rep);
void write_profile_csv(const Field& profile, std::ostream& os);
void write_scan_csv(const ContradictionScan& scan, std::ostream& os);
Json scan_verdict_json(const ContradictionScan& scan);

// JSON <-> core configuration blocks
Params params_from_json(const Json& j);
SampleSpec sample_spec_from_json(const Json& j);
SolveSpec solve_spec_from_json(const Json& j, const Params& p);
AngularProfile angular_profile_from_json(const Json& j);
TestFunctionSpec test_function_from_json(const Json& j);

}  // namespace hhlab
