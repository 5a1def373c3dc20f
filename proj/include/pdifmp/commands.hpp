#pragma once

// Subcommands of the command-line driver. Each validates its configuration
// before touching the output directory.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>

#include "pdifmp/abc.hpp"
#include "pdifmp/config.hpp"
#include "pdifmp/ergodicity.hpp"

namespace pdifmp {

inline constexpr const char* kVersion = "1.0.0";

/// Observed dataset of a run: read from cfg.observed, or simulated from
/// cfg.true_params with stream (seed, observed).
ObservedDataset observed_dataset(const RunConfig& cfg);

/// path.csv, jumps.csv, manifest.json
HybridPath cmd_simulate(const RunConfig& cfg);

struct InferOutcome {
  Calibration calibration;
  SmcResult smc;
};

/// weights.json, posterior.csv, populations.csv, ci_trace.csv, manifest.json.
/// A run whose prior generation cannot be filled writes weights.json and a
/// manifest with status "no_population".
InferOutcome cmd_infer(const RunConfig& cfg, std::size_t threads);

/// densities.csv, report.json
ErgodicReport cmd_ergodic(const RunConfig& cfg, std::size_t threads);

/// Reads a path.csv (and optional jumps.csv) and writes summary.json to `out`.
SummaryVector cmd_summarize(const std::filesystem::path& path_csv,
                            const std::optional<std::filesystem::path>& jumps_csv, ObservationMode mode,
                            double h, const std::filesystem::path& out);

}  // namespace pdifmp
