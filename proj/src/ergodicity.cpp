#include "pdifmp/ergodicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pdifmp/distance.hpp"
#include "pdifmp/parallel.hpp"
#include "pdifmp/simulate.hpp"

namespace pdifmp {

namespace {

ModelSpec with_horizon(ModelSpec model, double horizon) {
  model.horizon = horizon;
  return model;
}

}  // namespace

std::vector<double> time_average_series(const ModelSpec& model, const ParamVector& params, double t_long,
                                        Rng& rng) {
  if (!(t_long > 0.0)) throw std::invalid_argument("T_long must be positive");
  const HybridPath path = simulate(with_horizon(model, t_long), params, rng);
  const double cut = kBurnInFraction * t_long;
  std::vector<double> out;
  out.reserve(path.size());
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (path.times[i] >= cut) out.push_back(path.state(i, 0));
  }
  return out;
}

std::vector<double> ensemble_endpoints(const ModelSpec& model, const ParamVector& params, double t_star,
                                       std::size_t n_rep, std::uint64_t seed, std::size_t threads) {
  if (n_rep < 100) throw std::invalid_argument("ensemble needs n_rep >= 100");
  if (!(t_star > 0.0)) throw std::invalid_argument("t_star must be positive");
  const ModelSpec spec = with_horizon(model, t_star);
  std::vector<double> ends(n_rep);
  parallel_for(n_rep, threads, [&](std::size_t i) {
    Rng rng(seed, {kStreamEnsemble, i});
    const HybridPath path = simulate(spec, params, rng);
    ends[i] = path.state(path.size() - 1, 0);
  });
  return ends;
}

DensityEstimate time_average_density(const ModelSpec& model, const ParamVector& params, double t_long, Rng& rng,
                                     std::optional<std::span<const double>> grid) {
  return kde(time_average_series(model, params, t_long, rng), grid);
}

DensityEstimate ensemble_density(const ModelSpec& model, const ParamVector& params, double t_star,
                                 std::size_t n_rep, std::uint64_t seed, std::size_t threads,
                                 std::optional<std::span<const double>> grid) {
  return kde(ensemble_endpoints(model, params, t_star, n_rep, seed, threads), grid);
}

std::vector<double> shared_grid(std::span<const std::vector<double>> series) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& s : series) {
    const double bw = silverman_bandwidth(s);
    const auto [mn, mx] = std::minmax_element(s.begin(), s.end());
    lo = std::min(lo, *mn - 3.0 * bw);
    hi = std::max(hi, *mx + 3.0 * bw);
  }
  std::vector<double> grid(kDensityGridSize);
  const double dx = (hi - lo) / static_cast<double>(kDensityGridSize - 1);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = lo + static_cast<double>(i) * dx;
  grid.back() = hi;
  return grid;
}

double l1_gap(const DensityEstimate& a, const DensityEstimate& b) {
  if (a.grid.size() < 2 || a.grid.size() != b.grid.size() || a.grid.front() != b.grid.front() ||
      a.grid.back() != b.grid.back()) {
    throw std::invalid_argument("l1_gap needs both densities on the same grid");
  }
  const double dx = (a.grid.back() - a.grid.front()) / static_cast<double>(a.grid.size() - 1);
  return d_fun(a.values, b.values) * dx;
}

double integrate(const DensityEstimate& d) {
  double acc = 0.0;
  for (std::size_t i = 1; i < d.grid.size(); ++i) {
    acc += 0.5 * (d.values[i] + d.values[i - 1]) * (d.grid[i] - d.grid[i - 1]);
  }
  return acc;
}

ErgodicReport ergodic_check(const ModelSpec& model, const ParamVector& params, double t_long, double t_star,
                            std::size_t n_rep, std::uint64_t seed, std::size_t threads) {
  Rng rng(seed, {kStreamTimeAverage});
  std::vector<std::vector<double>> series;
  series.push_back(time_average_series(model, params, t_long, rng));
  series.push_back(ensemble_endpoints(model, params, t_star, n_rep, seed, threads));
  const auto grid = shared_grid(series);
  ErgodicReport report;
  report.time_avg_density = kde(series[0], std::span<const double>(grid));
  report.ensemble_density = kde(series[1], std::span<const double>(grid));
  report.l1_gap = l1_gap(report.time_avg_density, report.ensemble_density);
  report.t_star = t_star;
  report.n_replicates = n_rep;
  return report;
}

}  // namespace pdifmp
