#pragma once

// Run configuration for the command-line driver, its JSON form and the
// built-in experiment presets.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdifmp/distance.hpp"
#include "pdifmp/model.hpp"
#include "pdifmp/prior.hpp"

namespace pdifmp {

struct PriorSettings {
  Interval sigma{0.0, 10.0};
  Interval b{0.0, 10.0};
  Interval lambda{0.0, 1.0};
  std::optional<Interval> eta;
};

struct AbcSettings {
  std::size_t n_pop = 500;
  double alpha = 0.5;
  std::size_t max_budget = 10000;
  double min_acceptance = 0.015;
  std::size_t n_pilot = 100;
  std::optional<int> max_generations;
  WeightRule weight_rule = WeightRule::MedianRatio;
};

struct ErgodicSettings {
  double t_long = 5000.0;
  double t_star = 100.0;
  std::size_t n_rep = 1000;
};

/// Observed data read from disk instead of being simulated from true_params.
struct ObservedFiles {
  std::string path;
  std::optional<std::string> jumps;
};

struct RunConfig {
  ModelSpec model = ModelSpec::defaults(ModelId::TP1_OU, 500.0);
  ObservationMode observation = ObservationMode::Default;
  std::optional<ParamVector> true_params;
  PriorSettings prior;
  AbcSettings abc;
  ErgodicSettings ergodic;
  std::optional<ObservedFiles> observed;
  std::uint64_t seed = 1;
  std::string output = "out";

  [[nodiscard]] Prior make_prior() const;
  /// Checks every module precondition; throws std::invalid_argument naming the field.
  void validate() const;
};

nlohmann::json to_json(const RunConfig& cfg);

/// Parses a configuration object. Missing keys keep their defaults (model
/// keys default per test problem); unknown keys are rejected.
RunConfig config_from_json(const nlohmann::json& j);

/// Preset as base (if given), overlaid with the file's keys (if given).
RunConfig load_config(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset);

std::vector<std::string> preset_names();
nlohmann::json preset_json(const std::string& name);

}  // namespace pdifmp
