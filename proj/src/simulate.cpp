#include "pdifmp/simulate.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <utility>

namespace pdifmp {

namespace {

void check_simulation_params(const ModelSpec& model, const ParamVector& params) {
  const auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(params.sigma) || !finite(params.b) || !finite(params.lambda) ||
      (params.eta && !finite(*params.eta))) {
    throw std::invalid_argument("simulation parameters must be finite");
  }
  if (params.sigma < 0.0) throw std::invalid_argument("sigma must be non-negative");
  if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  if (!satisfies_model_constraints(model, params)) {
    throw std::invalid_argument("parameters violate the constraints of " +
                                std::string(model_name(model.model)));
  }
  validate(model);
}

// Caches the full-step flow per regime; z alternates between two values.
class FlowCache {
 public:
  FlowCache(const ModelSpec& model, const ParamVector& params)
      : model_(model), params_(params) {}

  const LinearFlow& full_step(double z) {
    for (auto& [key, flow] : entries_) {
      if (key == z) return flow;
    }
    if (entries_.size() >= 4) entries_.erase(entries_.begin());
    entries_.emplace_back(z, make_flow(model_, params_, z, model_.step));
    return entries_.back().second;
  }

 private:
  const ModelSpec& model_;
  const ParamVector& params_;
  std::vector<std::pair<double, LinearFlow>> entries_;
};

// Runs the flow from j_k to j_k1 in regime z, handing every grid point after
// the start to `sink`. `state` ends at the value at j_k1.
template <typename Sink>
void run_segment(const ModelSpec& model, const ParamVector& params, const LinearFlow& full,
                 double z, double j_k, double j_k1, double h, Vec2& state, Rng& rng, Sink&& sink) {
  const SegmentGrid grid = make_segment_grid(j_k, j_k1, h);
  for (std::size_t n = 1; n <= grid.n_full_steps; ++n) {
    full.advance(state, rng);
    sink(j_k + static_cast<double>(n) * h, state);
  }
  const LinearFlow last = make_flow(model, params, z, grid.last_step);
  last.advance(state, rng);
  sink(j_k1, state);
}

class PathBuilder {
 public:
  PathBuilder(const ModelSpec& model, double z0) {
    path_.dim = model.dim();
    const auto expected = static_cast<std::size_t>(model.horizon / model.step) + 16;
    path_.times.reserve(expected);
    path_.x.reserve(expected * path_.dim);
    path_.z_values.push_back(z0);
    Vec2 x0{model.x0[0], model.dim() == 2 ? model.x0[1] : 0.0};
    push(0.0, x0);
  }

  // Zero-length steps reproduce the previous grid time; keep one point per time.
  void push(double t, const Vec2& s) {
    if (!path_.times.empty() && t <= path_.times.back()) {
      for (std::size_t c = 0; c < path_.dim; ++c) path_.x[path_.x.size() - path_.dim + c] = s[c];
      return;
    }
    path_.times.push_back(t);
    for (std::size_t c = 0; c < path_.dim; ++c) path_.x.push_back(s[c]);
  }

  void record_jump(double t, double z_next) {
    path_.jump_times.push_back(t);
    path_.z_values.push_back(z_next);
  }

  HybridPath finish(double post_horizon) {
    path_.post_horizon_regime = post_horizon;
    path_.n_jumps = path_.jump_times.size();
    return std::move(path_);
  }

 private:
  HybridPath path_;
};

std::optional<double> rounding_of(const ModelSpec& model) { return model.jump_time_rounding; }

double next_candidate(double previous, double rate, const ModelSpec& model, Rng& rng) {
  const double candidate = previous + rng.exponential(rate);
  if (const auto q = rounding_of(model)) return round_jump_time(candidate, previous, *q);
  return candidate;
}

}  // namespace

SegmentGrid make_segment_grid(double j_k, double j_k1, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("step size h must be positive");
  if (!(j_k1 > j_k)) throw std::invalid_argument("segment end must be after its start");
  const double tau = j_k1 - j_k;
  auto n = static_cast<std::size_t>(std::floor(tau / h));
  // Align with the time coordinates actually produced (j_k + n h).
  while (j_k + static_cast<double>(n + 1) * h <= j_k1) ++n;
  while (n > 0 && j_k + static_cast<double>(n) * h > j_k1) --n;
  SegmentGrid grid;
  grid.n_full_steps = n;
  grid.last_step = std::max(0.0, j_k1 - (j_k + static_cast<double>(n) * h));
  return grid;
}

double eval_rate(const RateFunction& rf, double x) {
  switch (rf.kind) {
    case RateKind::Constant:
      return rf.lambda;
    case RateKind::Sigmoid:
      return rf.lambda / (1.0 + std::exp(-x));
    case RateKind::ReducedCenter:
      return std::abs(x) <= 2.0 ? rf.lambda / 2.0 : rf.lambda;
    case RateKind::Cos:
      return rf.lambda * std::cos(x) + rf.lambda;
  }
  return rf.lambda;
}

LinearFlow make_flow(const ModelSpec& model, const ParamVector& params, double z, double dt) {
  const double eta = params.effective_eta(model);
  switch (model.model) {
    case ModelId::TP1_OU:
      return LinearFlow::ou(z, eta, params.sigma, dt);
    case ModelId::TP2_WDSHO:
      return LinearFlow::oscillator(OscillatorParams{z, eta, params.sigma}, dt);
    case ModelId::TP3_WPWD:
      return LinearFlow::wpwd(z, params.sigma, dt);
    case ModelId::TP4_SwitchedSHO:
      return LinearFlow::oscillator(OscillatorParams{eta, z, params.sigma}, dt);
  }
  throw std::invalid_argument("unknown model");
}

std::vector<PathPoint> simulate_segment(const ModelSpec& model, const ParamVector& params,
                                        double j_k, double j_k1, double h, const Vec2& x_start,
                                        double z_k, Rng& rng) {
  std::vector<PathPoint> out;
  const LinearFlow full = make_flow(model, params, z_k, h);
  Vec2 state = x_start;
  run_segment(model, params, full, z_k, j_k, j_k1, h, state, rng,
              [&out](double t, const Vec2& s) { out.push_back({t, s}); });
  return out;
}

HybridPath simulate_constant_rate(const ModelSpec& model, const ParamVector& params, Rng& rng) {
  check_simulation_params(model, params);
  const double T = model.horizon;
  const double h = model.step;
  FlowCache flows(model, params);

  double z = initial_regime(model, params);
  PathBuilder builder(model, z);
  Vec2 state{model.x0[0], model.dim() == 2 ? model.x0[1] : 0.0};
  auto sink = [&builder](double t, const Vec2& s) { builder.push(t, s); };

  double j = 0.0;
  double j_next = next_candidate(j, params.lambda, model, rng);
  while (j_next < T) {
    run_segment(model, params, flows.full_step(z), z, j, j_next, h, state, rng, sink);
    z = next_regime(model, params, state[0], z);
    builder.record_jump(j_next, z);
    j = j_next;
    j_next = next_candidate(j, params.lambda, model, rng);
  }
  run_segment(model, params, flows.full_step(z), z, j, T, h, state, rng, sink);
  return builder.finish(next_regime(model, params, state[0], z));
}

HybridPath simulate_thinning(const ModelSpec& model, const ParamVector& params,
                             const std::function<double(double)>& rate, double bound, Rng& rng) {
  check_simulation_params(model, params);
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw std::invalid_argument("thinning bound must be positive and finite");
  }
  const double T = model.horizon;
  const double h = model.step;
  FlowCache flows(model, params);

  double z = initial_regime(model, params);
  PathBuilder builder(model, z);
  Vec2 state{model.x0[0], model.dim() == 2 ? model.x0[1] : 0.0};
  auto sink = [&builder](double t, const Vec2& s) { builder.push(t, s); };

  double j_old = 0.0;
  double j_new = next_candidate(j_old, bound, model, rng);
  while (j_new < T) {
    run_segment(model, params, flows.full_step(z), z, j_old, j_new, h, state, rng, sink);
    const double r = rate(state[0]);
    if (!(r >= 0.0) || r > bound) {
      throw ThinningViolation("jump rate " + std::to_string(r) + " at x=" + std::to_string(state[0]) +
                              " outside [0, " + std::to_string(bound) + "]");
    }
    if (rng.uniform() < r / bound) {
      z = next_regime(model, params, state[0], z);
      builder.record_jump(j_new, z);
    }
    j_old = j_new;
    j_new = next_candidate(j_old, bound, model, rng);
  }
  run_segment(model, params, flows.full_step(z), z, j_old, T, h, state, rng, sink);
  return builder.finish(next_regime(model, params, state[0], z));
}

HybridPath simulate_thinning(const ModelSpec& model, const ParamVector& params, Rng& rng) {
  const RateFunction rf{model.rate_kind, params.lambda};
  return simulate_thinning(
      model, params, [&rf](double x) { return eval_rate(rf, x); }, rf.bound(), rng);
}

HybridPath simulate(const ModelSpec& model, const ParamVector& params, Rng& rng) {
  if (model.rate_kind == RateKind::Constant) return simulate_constant_rate(model, params, rng);
  return simulate_thinning(model, params, rng);
}

double round_jump_time(double candidate, double previous, double quantum) {
  const double rounded = std::round(candidate / quantum) * quantum;
  if (rounded <= previous) return previous + quantum;
  return rounded;
}

}  // namespace pdifmp
