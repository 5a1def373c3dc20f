#include "pdifmp/summaries.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <numeric>
#include <string>

namespace pdifmp {

namespace {

constexpr double kTaperProportion = 0.1;

// Type-7 sample quantile (linear interpolation between order statistics).
double quantile7(std::vector<double>& v, double p) {
  const double pos = p * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (frac == 0.0 || lo + 1 >= v.size()) return a;
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + frac * (b - a);
}

std::vector<double> linspace(double from, double to, std::size_t n) {
  std::vector<double> out(n);
  const double step = (to - from) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) out[i] = from + static_cast<double>(i) * step;
  out.back() = to;
  return out;
}

// FFTW planning is not thread-safe; executing a cached plan on new arrays is.
class RealFftPlans {
 public:
  static RealFftPlans& instance() {
    static RealFftPlans plans;
    return plans;
  }

  fftw_plan get(int n) {
    std::lock_guard lock(mutex_);
    if (auto it = plans_.find(n); it != plans_.end()) return it->second;
    double* in = fftw_alloc_real(static_cast<std::size_t>(n));
    fftw_complex* out = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
    fftw_plan plan = fftw_plan_dft_r2c_1d(n, in, out, FFTW_ESTIMATE);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(n, plan);
    return plan;
  }

  RealFftPlans(const RealFftPlans&) = delete;
  RealFftPlans& operator=(const RealFftPlans&) = delete;

 private:
  RealFftPlans() = default;
  ~RealFftPlans() {
    for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
  }

  std::mutex mutex_;
  std::map<int, fftw_plan> plans_;
};

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

void require_finite(std::span<const double> v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + " contains non-finite values");
  }
}

}  // namespace

double silverman_bandwidth(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw DegenerateData("bandwidth needs at least two observations");
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
  double ss = 0.0;
  for (double v : series) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw DegenerateData("all observations are equal; density estimate is degenerate");
  std::vector<double> copy(series.begin(), series.end());
  const double iqr = quantile7(copy, 0.75) - quantile7(copy, 0.25);
  double lo = std::min(sd, iqr / 1.34);
  if (!(lo > 0.0)) lo = sd;
  return 0.9 * lo * std::pow(static_cast<double>(n), -0.2);
}

DensityEstimate kde(std::span<const double> series, std::optional<std::span<const double>> eval_grid) {
  require_finite(series, "density input");
  const double bw = silverman_bandwidth(series);
  const auto [mn, mx] = std::minmax_element(series.begin(), series.end());

  DensityEstimate est;
  est.bandwidth = bw;
  if (eval_grid) {
    if (eval_grid->size() < 2) throw std::invalid_argument("evaluation grid needs at least two points");
    est.grid.assign(eval_grid->begin(), eval_grid->end());
  } else {
    est.grid = linspace(*mn - 3.0 * bw, *mx + 3.0 * bw, kDensityGridSize);
  }
  const double from = est.grid.front();
  const double to = est.grid.back();

  // Linear binning of unit total mass onto n bins over [lo, up].
  constexpr std::size_t n = kDensityGridSize;
  const double lo = from - 4.0 * bw;
  const double up = to + 4.0 * bw;
  const double delta = (up - lo) / static_cast<double>(n - 1);
  std::vector<double> bins(n, 0.0);
  const double w = 1.0 / static_cast<double>(series.size());
  for (double v : series) {
    const double pos = (v - lo) / delta;
    const double fl = std::floor(pos);
    const double frac = pos - fl;
    if (fl >= 0.0 && fl <= static_cast<double>(n - 2)) {
      const auto ix = static_cast<std::size_t>(fl);
      bins[ix] += w * (1.0 - frac);
      bins[ix + 1] += w * frac;
    } else if (fl == -1.0) {
      bins[0] += w * frac;
    } else if (fl == static_cast<double>(n - 1)) {
      bins[n - 1] += w * (1.0 - frac);
    }
  }

  // Gaussian kernel at every bin offset, then discrete convolution.
  std::vector<double> kernel(n);
  const double norm = 1.0 / (bw * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t m = 0; m < n; ++m) {
    const double u = static_cast<double>(m) * delta / bw;
    kernel[m] = norm * std::exp(-0.5 * u * u);
  }
  std::vector<double> dens(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const double bj = bins[j];
    if (bj == 0.0) continue;
    for (std::size_t i = 0; i < n; ++i) dens[i] += bj * kernel[i > j ? i - j : j - i];
  }

  // Interpolate from the bin centres onto the output grid.
  est.values.resize(est.grid.size());
  for (std::size_t k = 0; k < est.grid.size(); ++k) {
    const double pos = (est.grid[k] - lo) / delta;
    const double fl = std::clamp(std::floor(pos), 0.0, static_cast<double>(n - 2));
    const auto ix = static_cast<std::size_t>(fl);
    const double frac = std::clamp(pos - fl, 0.0, 1.0);
    est.values[k] = std::max(0.0, dens[ix] + frac * (dens[ix + 1] - dens[ix]));
  }
  return est;
}

std::vector<double> cosine_taper(std::size_t n, double proportion) {
  std::vector<double> w(n, 1.0);
  const auto m = static_cast<std::size_t>(std::floor(static_cast<double>(n) * proportion));
  for (std::size_t i = 0; i < m; ++i) {
    const double v = 0.5 * (1.0 - std::cos(std::numbers::pi * static_cast<double>(2 * i + 1) /
                                           static_cast<double>(2 * m)));
    w[i] = v;
    w[n - 1 - i] = v;
  }
  return w;
}

SpectralEstimate periodogram_uniform(std::span<const double> series, double h) {
  const std::size_t n = series.size();
  if (n < 8) throw std::invalid_argument("periodogram needs at least 8 points, got " + std::to_string(n));
  if (!(h > 0.0)) throw std::invalid_argument("periodogram step must be positive");
  require_finite(series, "periodogram input");

  const double nd = static_cast<double>(n);
  std::unique_ptr<double, FftwDeleter> buf(fftw_alloc_real(n));
  double* x = buf.get();

  // Least-squares linear detrend.
  const double mean = std::accumulate(series.begin(), series.end(), 0.0) / nd;
  const double centre = (nd - 1.0) / 2.0;
  const double sumt2 = nd * (nd * nd - 1.0) / 12.0;
  double sxt = 0.0;
  for (std::size_t i = 0; i < n; ++i) sxt += series[i] * (static_cast<double>(i) - centre);
  const double slope = sxt / sumt2;
  const auto taper = cosine_taper(n, kTaperProportion);
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (series[i] - mean - slope * (static_cast<double>(i) - centre)) * taper[i];
  }

  std::unique_ptr<fftw_complex, FftwDeleter> out(fftw_alloc_complex(n / 2 + 1));
  fftw_plan plan = RealFftPlans::instance().get(static_cast<int>(n));
  fftw_execute_dft_r2c(plan, x, out.get());

  // Power lost to the taper (split cosine bell over both ends).
  const double u2 = 1.0 - (5.0 / 8.0) * kTaperProportion * 2.0;
  const std::size_t n_spec = n / 2;
  SpectralEstimate s;
  s.frequencies.resize(n_spec);
  s.values.resize(n_spec);
  for (std::size_t k = 1; k <= n_spec; ++k) {
    const double re = out.get()[k][0];
    const double im = out.get()[k][1];
    s.frequencies[k - 1] = static_cast<double>(k) / (nd * h);
    s.values[k - 1] = (re * re + im * im) * h / (nd * u2);
  }
  return s;
}

SpectralEstimate periodogram(std::span<const double> times, std::span<const double> series, double h) {
  if (times.size() != series.size()) throw std::invalid_argument("times and series differ in length");
  if (series.size() < 8) {
    throw std::invalid_argument("periodogram needs at least 8 points, got " + std::to_string(series.size()));
  }
  if (!(h > 0.0)) throw std::invalid_argument("periodogram step must be positive");
  const double t0 = times.front();
  const double span_t = times.back() - t0;
  const auto m = static_cast<std::size_t>(std::floor(span_t / h + 1e-9)) + 1;
  std::vector<double> uniform(m);
  std::size_t j = 0;
  for (std::size_t i = 0; i < m; ++i) {
    const double t = t0 + static_cast<double>(i) * h;
    while (j + 2 < times.size() && times[j + 1] < t) ++j;
    const double ta = times[j], tb = times[j + 1];
    const double frac = tb > ta ? std::clamp((t - ta) / (tb - ta), 0.0, 1.0) : 0.0;
    uniform[i] = series[j] + frac * (series[j + 1] - series[j]);
  }
  return periodogram_uniform(uniform, h);
}

double quad_variation(std::span<const double> series) {
  if (series.size() < 2) throw std::invalid_argument("quadratic variation needs at least two points");
  double acc = 0.0;
  for (std::size_t i = 1; i < series.size(); ++i) {
    const double d = series[i - 1] - series[i];
    acc += d * d;
  }
  return acc / static_cast<double>(series.size());
}

double interpolate(std::span<const double> times, std::span<const double> values, double t) {
  if (times.empty()) throw std::invalid_argument("cannot interpolate an empty series");
  if (t <= times.front()) return values.front();
  if (t >= times.back()) return values.back();
  const auto it = std::lower_bound(times.begin(), times.end(), t);
  const auto i = static_cast<std::size_t>(it - times.begin());
  if (times[i] == t) return values[i];
  const double frac = (t - times[i - 1]) / (times[i] - times[i - 1]);
  return values[i - 1] + frac * (values[i] - values[i - 1]);
}

std::optional<double> slope_summary(std::span<const double> times, std::span<const double> x,
                                    std::span<const double> jump_times) {
  if (times.size() != x.size() || times.empty()) {
    throw std::invalid_argument("slope summary needs a non-empty series with matching times");
  }
  std::vector<double> anchors{times.front()};
  for (double j : jump_times) {
    if (j > anchors.back() && j <= times.back()) anchors.push_back(j);
  }
  std::vector<double> slopes;
  int previous_sign = 0;
  double x_prev = interpolate(times, x, anchors.front());
  for (std::size_t k = 0; k + 1 < anchors.size(); ++k) {
    const double x_next = interpolate(times, x, anchors[k + 1]);
    const double dx = x_next - x_prev;
    const int sgn = sign_of(dx);
    if (k == 0 || sgn != previous_sign) slopes.push_back(std::abs(dx / (anchors[k + 1] - anchors[k])));
    previous_sign = sgn;
    x_prev = x_next;
  }
  if (slopes.empty()) return std::nullopt;
  const std::size_t mid = slopes.size() / 2;
  std::nth_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid), slopes.end());
  if (slopes.size() % 2 == 1) return slopes[mid];
  const double upper = slopes[mid];
  const double lower = *std::max_element(slopes.begin(), slopes.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

std::optional<double> slope_summary(const ObservedDataset& dataset) {
  if (!dataset.jump_times) throw std::invalid_argument("slope summary requires observed jump times");
  return slope_summary(dataset.times, dataset.x, *dataset.jump_times);
}

SummaryVector summarize(const ObservedDataset& dataset, double h, const ReferenceGrids* ref) {
  SummaryVector s;
  if (ref) {
    s.density = kde(dataset.x, std::span<const double>(ref->density_grid));
  } else {
    s.density = kde(dataset.x);
  }
  s.spectrum = periodogram(dataset.times, dataset.x, h);
  s.quad_var = quad_variation(dataset.x);
  s.n_jumps = dataset.n_jumps;
  if (dataset.jump_times) s.slope = SlopeStatistic{slope_summary(dataset)};
  return s;
}

ReferenceGrids reference_grids(const SummaryVector& observed) {
  return ReferenceGrids{observed.density.grid};
}

}  // namespace pdifmp
