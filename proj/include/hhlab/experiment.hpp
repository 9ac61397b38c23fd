#pragma once

#include "hhlab/io.hpp"

#include <optional>

namespace hhlab {

// exit codes: 0 success (any numerical verdict), 2 config error, 3 numerical
// failure (quadrature overflow outside the expected probes)
struct ExperimentResult {
  int exit_code = 0;
  std::string message;
};

// Dispatches one experiment described by a JSON config into out_dir and writes
// a manifest plus the owning module's outputs.  Deterministic for fixed
// (config, seed): everything except manifest.json is byte-reproducible.
ExperimentResult run_experiment(const Json& config, const std::filesystem::path& out_dir,
                                int threads = 1,
                                std::optional<unsigned long long> seed_override = std::nullopt);

// human-readable description of a condition set or CLI command
std::string describe(const std::string& name);

}  // namespace hhlab
