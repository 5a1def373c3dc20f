#pragma once

// Empirical ergodicity diagnostic: density of one long path against the
// density of X_{t*} across independent replicates.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pdifmp/model.hpp"
#include "pdifmp/random.hpp"
#include "pdifmp/summaries.hpp"

namespace pdifmp {

inline constexpr double kBurnInFraction = 0.05;

struct ErgodicReport {
  DensityEstimate time_avg_density;
  DensityEstimate ensemble_density;
  double l1_gap = 0.0;
  double t_star = 0.0;
  std::size_t n_replicates = 0;
};

/// First-coordinate series of one path over [0, T_long] with the first 5%
/// of the horizon dropped.
std::vector<double> time_average_series(const ModelSpec& model, const ParamVector& params, double t_long,
                                        Rng& rng);

/// First coordinate of X_{t*} for n_rep paths; replicate i uses stream
/// (seed, ensemble, i).
std::vector<double> ensemble_endpoints(const ModelSpec& model, const ParamVector& params, double t_star,
                                       std::size_t n_rep, std::uint64_t seed, std::size_t threads = 1);

DensityEstimate time_average_density(const ModelSpec& model, const ParamVector& params, double t_long, Rng& rng,
                                     std::optional<std::span<const double>> grid = std::nullopt);

DensityEstimate ensemble_density(const ModelSpec& model, const ParamVector& params, double t_star,
                                 std::size_t n_rep, std::uint64_t seed, std::size_t threads = 1,
                                 std::optional<std::span<const double>> grid = std::nullopt);

/// 512 points spanning [min - 3bw, max + 3bw] of every series.
std::vector<double> shared_grid(std::span<const std::vector<double>> series);

/// sum |a_i - b_i| * dx on a shared uniform grid.
double l1_gap(const DensityEstimate& a, const DensityEstimate& b);

/// Trapezoidal integral of a density over its grid.
double integrate(const DensityEstimate& d);

ErgodicReport ergodic_check(const ModelSpec& model, const ParamVector& params, double t_long, double t_star,
                            std::size_t n_rep, std::uint64_t seed, std::size_t threads = 1);

}  // namespace pdifmp
