#pragma once

// Summary statistics of an observed (or synthetic) dataset: invariant density
// estimate, periodogram, mean quadratic variation, jump count and, when jump
// times are observed, the median absolute inter-jump slope.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "pdifmp/model.hpp"

namespace pdifmp {

inline constexpr std::size_t kDensityGridSize = 512;

class DegenerateData : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct DensityEstimate {
  std::vector<double> grid;
  std::vector<double> values;
  double bandwidth = 0.0;
};

struct SpectralEstimate {
  std::vector<double> frequencies;  // k / (M h), k = 1..floor(M/2)
  std::vector<double> values;
};

/// Present only when jump times are observed. `value` is empty when no
/// usable inter-jump interval exists; the distance then drops the term.
struct SlopeStatistic {
  std::optional<double> value;
};

struct SummaryVector {
  DensityEstimate density;
  SpectralEstimate spectrum;
  double quad_var = 0.0;
  std::size_t n_jumps = 0;
  std::optional<SlopeStatistic> slope;
};

/// Grids taken from the observed summaries so synthetic summaries are
/// comparable pointwise.
struct ReferenceGrids {
  std::vector<double> density_grid;
};

/// 0.9 min(sd, IQR/1.34) n^{-1/5}, falling back to sd when the IQR is zero.
double silverman_bandwidth(std::span<const double> series);

/// Gaussian kernel density estimate (linear binning on 512 points over
/// [from - 4bw, to + 4bw], discrete convolution, linear interpolation). The
/// default grid is 512 points over [min - 3bw, max + 3bw]; with `eval_grid`
/// the estimate is evaluated there instead, bandwidth still from `series`.
DensityEstimate kde(std::span<const double> series,
                    std::optional<std::span<const double>> eval_grid = std::nullopt);

/// Split-cosine-bell taper weights covering `proportion` of each end.
std::vector<double> cosine_taper(std::size_t n, double proportion);

/// Raw periodogram of the series resampled onto the uniform grid of step h
/// over [times.front(), times.back()]: linear detrend, 10% taper, ordinates
/// |X_k|^2 h / (M u2) at the Fourier frequencies k / (M h), where
/// u2 = 0.875 is the power retained by the taper.
SpectralEstimate periodogram(std::span<const double> times, std::span<const double> series, double h);

/// Uniform-grid periodogram (series already equally spaced with step h).
SpectralEstimate periodogram_uniform(std::span<const double> series, double h);

/// (1/N) sum_{i=1}^{N-1} (x_i - x_{i-1})^2.
double quad_variation(std::span<const double> series);

/// Median of |dx/dt| between consecutive jump times (anchored at the first
/// observation time), keeping only intervals whose displacement sign differs
/// from the previous interval's. Empty when no interval is usable.
std::optional<double> slope_summary(std::span<const double> times, std::span<const double> x,
                                    std::span<const double> jump_times);
std::optional<double> slope_summary(const ObservedDataset& dataset);

/// Linear interpolation of (times, values) at t; t is clamped to the range.
double interpolate(std::span<const double> times, std::span<const double> values, double t);

SummaryVector summarize(const ObservedDataset& dataset, double h,
                        const ReferenceGrids* ref = nullptr);

ReferenceGrids reference_grids(const SummaryVector& observed);

}  // namespace pdifmp
