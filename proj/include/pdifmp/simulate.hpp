#pragma once

// Path construction for PDifMPs: the SDE flow over an inter-jump interval on
// its adaptive sub-grid, the constant-rate jump algorithm, and thinning for
// state-dependent bounded jump rates.

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <vector>

#include "pdifmp/flows.hpp"
#include "pdifmp/model.hpp"
#include "pdifmp/random.hpp"

namespace pdifmp {

/// Grid t_n = j_k + n h, n = 0..n_full_steps, followed by a final step of
/// size last_step that lands exactly on j_{k+1}.
struct SegmentGrid {
  std::size_t n_full_steps = 0;
  double last_step = 0.0;
};

SegmentGrid make_segment_grid(double j_k, double j_k1, double h);

struct RateFunction {
  RateKind kind = RateKind::Constant;
  double lambda = 0.1;

  /// Upper bound used for thinning: 2 lambda for Cos, lambda otherwise.
  [[nodiscard]] double bound() const { return kind == RateKind::Cos ? 2.0 * lambda : lambda; }
};

double eval_rate(const RateFunction& rf, double x);

/// Thrown when a rate evaluation exceeds the thinning bound.
class ThinningViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PathPoint {
  double time = 0.0;
  Vec2 state{0.0, 0.0};
};

/// Exact flow of the model's SDE in regime z over a fixed step.
LinearFlow make_flow(const ModelSpec& model, const ParamVector& params, double z, double dt);

/// Simulates the SDE in regime z_k from (j_k, x_start) to j_k1. Returns the
/// grid points after the start, ending with the state at j_k1 (a zero-length
/// final step is executed and returned, so the last two points may share a time).
std::vector<PathPoint> simulate_segment(const ModelSpec& model, const ParamVector& params,
                                        double j_k, double j_k1, double h, const Vec2& x_start,
                                        double z_k, Rng& rng);

/// Constant jump rate lambda: exponential waiting times.
HybridPath simulate_constant_rate(const ModelSpec& model, const ParamVector& params, Rng& rng);

/// State-dependent rate from model.rate_kind via thinning with bound RateFunction::bound().
HybridPath simulate_thinning(const ModelSpec& model, const ParamVector& params, Rng& rng);

/// Thinning with an arbitrary rate of the first coordinate, bounded by `bound`.
HybridPath simulate_thinning(const ModelSpec& model, const ParamVector& params,
                             const std::function<double(double)>& rate, double bound, Rng& rng);

/// Dispatch on model.rate_kind. Jump times are rounded to
/// model.jump_time_rounding when it is set.
HybridPath simulate(const ModelSpec& model, const ParamVector& params, Rng& rng);

/// Rounds a candidate jump time to the rounding quantum; a candidate that
/// lands at or before `previous` is moved to previous + quantum.
double round_jump_time(double candidate, double previous, double quantum);

}  // namespace pdifmp
