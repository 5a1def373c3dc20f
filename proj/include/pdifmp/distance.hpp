#pragma once

// Distances between summary vectors and the pilot-run weight calibration.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "pdifmp/model.hpp"
#include "pdifmp/prior.hpp"
#include "pdifmp/random.hpp"
#include "pdifmp/summaries.hpp"

namespace pdifmp {

struct Weights {
  double w1 = 1.0;  // density
  double w2 = 1.0;  // spectrum
  double w3 = 1.0;  // quadratic variation
  double w4 = 1.0;  // jump count
  std::optional<double> w5;  // slope, jump-time observation mode only
};

/// How pilot medians become weights. MedianRatio: w_k = m_1 / m_k, which puts
/// every weighted median at m_1. Reciprocal: w_k = 1 / m_k for k >= 2.
enum class WeightRule { MedianRatio, Reciprocal };

struct DistanceComponents {
  double density = 0.0;
  double spectrum = 0.0;
  double quad_var = 0.0;
  double jumps = 0.0;
  std::optional<double> slope;  // empty when either side has no usable slope
};

/// Sum of absolute pointwise differences; throws on length mismatch.
double d_fun(std::span<const double> a, std::span<const double> b);

DistanceComponents distance_components(const SummaryVector& observed, const SummaryVector& synthetic);
double weighted_sum(const DistanceComponents& c, const Weights& w);
double composite_distance(const SummaryVector& observed, const SummaryVector& synthetic, const Weights& w);

/// Everything needed to turn a parameter vector into a synthetic summary
/// comparable with the observed one.
struct Problem {
  ModelSpec model;
  ObservationMode mode = ObservationMode::Default;
  SummaryVector observed;
  ReferenceGrids ref;

  Problem(ModelSpec m, ObservationMode obs_mode, SummaryVector obs)
      : model(std::move(m)), mode(obs_mode), observed(std::move(obs)), ref(reference_grids(observed)) {}
};

SummaryVector synthetic_summary(const Problem& problem, const ParamVector& theta, Rng& rng);

/// Simulates and summarises one candidate; returns empty when the synthetic
/// dataset is numerically unusable (treated as an infinitely distant candidate).
std::optional<DistanceComponents> candidate_components(const Problem& problem, const ParamVector& theta,
                                                       Rng& rng);

/// Weights from per-component medians of pilot distances. Components with a
/// zero median get weight 1.
Weights weights_from_pilot(std::span<const DistanceComponents> pilot, WeightRule rule, bool with_slope);

struct Calibration {
  Weights weights;
  std::vector<std::vector<double>> pilot_theta;
  std::vector<DistanceComponents> pilot;  // usable pilot datasets only
};

/// Draws n_pilot parameters from the prior, simulates and summarises each
/// with stream (seed, pilot, i), and derives the weights.
Calibration calibrate_weights(const Problem& problem, const Prior& prior, std::size_t n_pilot,
                              std::uint64_t seed, std::size_t threads,
                              WeightRule rule = WeightRule::MedianRatio);

double median(std::vector<double> values);

}  // namespace pdifmp
