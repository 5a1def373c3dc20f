#pragma once

// Flat-file serialisation: CSV tables with 17 significant digits and JSON documents.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdifmp/abc.hpp"
#include "pdifmp/model.hpp"
#include "pdifmp/summaries.hpp"

namespace pdifmp {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of a named column; throws ParseError when absent.
  [[nodiscard]] std::size_t column(const std::string& name) const;
};

/// Numeric CSV with one header line. Errors name the file and line number.
CsvTable read_csv(const std::filesystem::path& file);
void write_csv(const std::filesystem::path& file, const CsvTable& table);

/// %.17g formatting.
std::string format_number(double v);

void write_json(const std::filesystem::path& file, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& file);

/// t, x1[, x2], regime
CsvTable path_table(const HybridPath& path);
/// t, regime (regime entered at the jump)
CsvTable jumps_table(const HybridPath& path);

/// Observed dataset from a path.csv and an optional jumps.csv. n_jumps is the
/// number of rows of jumps.csv, or the number of regime changes without it.
/// Jump times are attached only in JumpTimes mode.
ObservedDataset read_observed(const std::filesystem::path& path_csv,
                              const std::optional<std::filesystem::path>& jumps_csv, ObservationMode mode);

nlohmann::json summary_json(const SummaryVector& s);
nlohmann::json weights_json(const Weights& w, WeightRule rule, std::size_t n_pilot_used);

/// theta columns, weight, distance
CsvTable posterior_table(const Population& pop);
/// generation, particle, theta columns, weight, distance for every generation
CsvTable populations_table(const std::vector<Population>& history);
/// generation, budget, threshold, then p05/p50/p95 per parameter
CsvTable ci_trace_table(const CITrace& trace, std::size_t dim);

}  // namespace pdifmp
