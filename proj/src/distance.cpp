#include "pdifmp/distance.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pdifmp/flows.hpp"
#include "pdifmp/parallel.hpp"
#include "pdifmp/simulate.hpp"

namespace pdifmp {

namespace {

void check_same_grid(std::span<const double> a, std::span<const double> b, const char* what) {
  if (a.size() != b.size()) {
    throw std::invalid_argument(std::string(what) + " grids differ in length (" + std::to_string(a.size()) +
                                " vs " + std::to_string(b.size()) + ")");
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double tol = 1e-12 * std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    if (std::abs(a[i] - b[i]) > tol) {
      throw std::invalid_argument(std::string(what) + " grids differ at index " + std::to_string(i));
    }
  }
}

double weight_for(double m1, double mk, WeightRule rule) {
  if (!(mk > 0.0)) return 1.0;
  return rule == WeightRule::MedianRatio ? m1 / mk : 1.0 / mk;
}

}  // namespace

double median(std::vector<double> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty set");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  if (values.size() % 2 == 1) return values[mid];
  const double upper = values[mid];
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

double d_fun(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("d_fun: function values on grids of different length (" +
                                std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::abs(a[i] - b[i]);
  return acc;
}

DistanceComponents distance_components(const SummaryVector& observed, const SummaryVector& synthetic) {
  if (observed.slope.has_value() != synthetic.slope.has_value()) {
    throw std::invalid_argument("slope statistic present on exactly one side");
  }
  check_same_grid(observed.density.grid, synthetic.density.grid, "density");
  check_same_grid(observed.spectrum.frequencies, synthetic.spectrum.frequencies, "spectrum");
  DistanceComponents c;
  c.density = d_fun(observed.density.values, synthetic.density.values);
  c.spectrum = d_fun(observed.spectrum.values, synthetic.spectrum.values);
  c.quad_var = std::abs(observed.quad_var - synthetic.quad_var);
  c.jumps = std::abs(static_cast<double>(observed.n_jumps) - static_cast<double>(synthetic.n_jumps));
  if (observed.slope && observed.slope->value && synthetic.slope->value) {
    c.slope = std::abs(*observed.slope->value - *synthetic.slope->value);
  }
  return c;
}

double weighted_sum(const DistanceComponents& c, const Weights& w) {
  double d = w.w1 * c.density + w.w2 * c.spectrum + w.w3 * c.quad_var + w.w4 * c.jumps;
  if (c.slope) {
    if (!w.w5) throw std::invalid_argument("slope distance present but no slope weight configured");
    d += *w.w5 * *c.slope;
  }
  return d;
}

double composite_distance(const SummaryVector& observed, const SummaryVector& synthetic, const Weights& w) {
  return weighted_sum(distance_components(observed, synthetic), w);
}

SummaryVector synthetic_summary(const Problem& problem, const ParamVector& theta, Rng& rng) {
  const HybridPath path = simulate(problem.model, theta, rng);
  const ObservedDataset data = project_observation(path, problem.mode);
  return summarize(data, problem.model.step, &problem.ref);
}

std::optional<DistanceComponents> candidate_components(const Problem& problem, const ParamVector& theta,
                                                       Rng& rng) {
  try {
    return distance_components(problem.observed, synthetic_summary(problem, theta, rng));
  } catch (const DegenerateData&) {
    return std::nullopt;
  } catch (const NumericalError&) {
    return std::nullopt;
  }
}

Weights weights_from_pilot(std::span<const DistanceComponents> pilot, WeightRule rule, bool with_slope) {
  if (pilot.empty()) throw std::invalid_argument("weight calibration needs at least one pilot dataset");
  std::vector<double> dens, spec, qv, jumps, slope;
  for (const auto& c : pilot) {
    dens.push_back(c.density);
    spec.push_back(c.spectrum);
    qv.push_back(c.quad_var);
    jumps.push_back(c.jumps);
    if (c.slope) slope.push_back(*c.slope);
  }
  const double m1 = median(dens);
  Weights w;
  w.w1 = 1.0;
  w.w2 = weight_for(m1, median(spec), rule);
  w.w3 = weight_for(m1, median(qv), rule);
  w.w4 = weight_for(m1, median(jumps), rule);
  if (with_slope) w.w5 = slope.empty() ? 1.0 : weight_for(m1, median(slope), rule);
  return w;
}

Calibration calibrate_weights(const Problem& problem, const Prior& prior, std::size_t n_pilot,
                              std::uint64_t seed, std::size_t threads, WeightRule rule) {
  if (n_pilot < 20) throw std::invalid_argument("weight calibration needs n_pilot >= 20");
  std::vector<std::vector<double>> thetas(n_pilot);
  std::vector<std::optional<DistanceComponents>> comps(n_pilot);
  parallel_for(n_pilot, threads, [&](std::size_t i) {
    Rng rng(seed, {kStreamPilot, i});
    thetas[i] = prior.sample(problem.model, rng);
    comps[i] = candidate_components(problem, ParamVector::from_vector(thetas[i]), rng);
  });
  Calibration cal;
  for (std::size_t i = 0; i < n_pilot; ++i) {
    if (!comps[i]) continue;
    cal.pilot_theta.push_back(thetas[i]);
    cal.pilot.push_back(*comps[i]);
  }
  cal.weights = weights_from_pilot(cal.pilot, rule, problem.mode == ObservationMode::JumpTimes);
  return cal;
}

}  // namespace pdifmp
