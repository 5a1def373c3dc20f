#include "pdifmp/abc.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdifmp/parallel.hpp"

namespace pdifmp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kRidge = 1e-10;
constexpr int kMaxRedraws = 1000000;

using Eigen::MatrixXd;
using Eigen::VectorXd;

double evaluate(const Problem& problem, const Weights& weights, const std::vector<double>& theta, Rng& rng) {
  const auto comps = candidate_components(problem, ParamVector::from_vector(theta), rng);
  return comps ? weighted_sum(*comps, weights) : kInf;
}

void normalize(std::vector<Particle>& particles) {
  double total = 0.0;
  for (const auto& p : particles) total += p.weight;
  for (auto& p : particles) p.weight /= total;
}

CICheckpoint checkpoint(const Population& pop) {
  CICheckpoint cp;
  cp.generation = pop.generation;
  cp.budget_used = pop.budget_used;
  cp.threshold = pop.threshold;
  for (const auto& r : posterior_report(pop).params) cp.params.push_back(r.ci);
  return cp;
}

// Gaussian perturbation kernel N(0, 2 * weighted covariance).
struct Kernel {
  MatrixXd lower;  // Cholesky factor of the covariance

  explicit Kernel(const Population& pop) {
    const std::vector<double> l = perturbation_cholesky(pop);
    const auto d = static_cast<Eigen::Index>(pop.dim());
    lower = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(l.data(), d, d);
  }

  // -0.5 * Mahalanobis^2; the normalising constant cancels in the weights.
  [[nodiscard]] double log_density(const std::vector<double>& a, const std::vector<double>& b) const {
    VectorXd diff(lower.rows());
    for (Eigen::Index i = 0; i < diff.size(); ++i) diff(i) = a[i] - b[i];
    const VectorXd y = lower.triangularView<Eigen::Lower>().solve(diff);
    return -0.5 * y.squaredNorm();
  }
};

std::size_t resample_index(const std::vector<double>& cumulative, Rng& rng) {
  const double u = rng.uniform() * cumulative.back();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), cumulative.size() - 1);
}

std::vector<double> propose(const Population& prev, const std::vector<double>& cumulative, const Kernel& kernel,
                            const Prior& prior, const ModelSpec& model, Rng& rng) {
  const std::size_t d = prev.dim();
  std::vector<double> theta(d);
  VectorXd z(static_cast<Eigen::Index>(d));
  for (int redraw = 0; redraw < kMaxRedraws; ++redraw) {
    const auto& base = prev.particles[resample_index(cumulative, rng)].theta;
    for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
    const VectorXd step = kernel.lower.triangularView<Eigen::Lower>() * z;
    for (std::size_t i = 0; i < d; ++i) theta[i] = base[i] + step(static_cast<Eigen::Index>(i));
    if (prior.contains(model, theta)) return theta;
  }
  throw std::runtime_error("perturbation kernel keeps proposing outside the prior support");
}

struct SlotOutcome {
  std::vector<double> theta;
  double distance = kInf;
};

// Fills n_pop slots, one attempt per unfinished slot per round. Attempt a of
// slot s draws from stream (seed, smc, gen, s, a) so the outcome does not
// depend on scheduling. Returns false when more than max_attempts were spent.
template <typename Draw>
bool fill_generation(std::size_t n_pop, double delta, std::size_t max_attempts, std::size_t threads,
                     const Problem& problem, const Weights& weights, std::uint64_t seed, int gen, Draw&& draw,
                     std::vector<SlotOutcome>& accepted, std::size_t& attempts) {
  accepted.assign(n_pop, {});
  std::vector<std::size_t> open(n_pop);
  std::iota(open.begin(), open.end(), std::size_t{0});
  std::size_t round = 0;
  attempts = 0;
  while (!open.empty()) {
    std::vector<SlotOutcome> out(open.size());
    parallel_for(open.size(), threads, [&](std::size_t k) {
      Rng rng(seed, {kStreamSmc, static_cast<std::uint64_t>(gen), open[k], round});
      out[k].theta = draw(rng);
      out[k].distance = evaluate(problem, weights, out[k].theta, rng);
    });
    attempts += open.size();
    std::vector<std::size_t> still_open;
    for (std::size_t k = 0; k < open.size(); ++k) {
      if (out[k].distance < delta) {
        accepted[open[k]] = std::move(out[k]);
      } else {
        still_open.push_back(open[k]);
      }
    }
    open = std::move(still_open);
    ++round;
    if (!open.empty() && attempts > max_attempts) return false;
  }
  return true;
}

}  // namespace

std::vector<double> perturbation_cholesky(const Population& pop) {
  std::vector<double> mean, cov;
  weighted_moments(pop, mean, cov);
  const auto d = static_cast<Eigen::Index>(mean.size());
  const MatrixXd sigma = 2.0 * Eigen::Map<const MatrixXd>(cov.data(), d, d);
  Eigen::LLT<MatrixXd> llt(sigma);
  MatrixXd lower;
  bool ok = llt.info() == Eigen::Success;
  if (ok) {
    lower = llt.matrixL();
    ok = lower.allFinite() && (lower.diagonal().array() > 0.0).all();
  }
  if (!ok) {
    // Degenerate population: independent coordinates with a small ridge.
    lower = MatrixXd::Zero(d, d);
    for (Eigen::Index i = 0; i < d; ++i) lower(i, i) = std::sqrt(std::max(sigma(i, i), 0.0) + kRidge);
  }
  std::vector<double> out(static_cast<std::size_t>(d * d));
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) out[static_cast<std::size_t>(i * d + j)] = lower(i, j);
  }
  return out;
}

std::string_view smc_status_name(SmcStatus status) {
  switch (status) {
    case SmcStatus::BudgetReached: return "budget_reached";
    case SmcStatus::AcceptanceTooLow: return "acceptance_below_minimum";
    case SmcStatus::GenerationLimit: return "generation_limit";
    case SmcStatus::NoPopulation: return "no_population";
  }
  return "unknown";
}

double Population::effective_sample_size() const {
  double sq = 0.0;
  for (const auto& p : particles) sq += p.weight * p.weight;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  if (frac == 0.0) return values[lo];
  return values[lo] + frac * (values[hi] - values[lo]);
}

double weighted_percentile(std::span<const double> values, std::span<const double> weights, double p) {
  if (values.empty() || values.size() != weights.size()) {
    throw std::invalid_argument("weighted_percentile: need matching non-empty values and weights");
  }
  // Samples without weight carry no mass and are left out.
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (weights[i] > 0.0) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (order.empty() || !(total > 0.0)) throw std::invalid_argument("weighted_percentile: weights sum to zero");
  std::vector<double> mid(order.size());
  double run = 0.0;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const double w = weights[order[i]];
    mid[i] = (run + 0.5 * w) / total;
    run += w;
  }
  if (p <= mid.front()) return values[order.front()];
  if (p >= mid.back()) return values[order.back()];
  const auto it = std::upper_bound(mid.begin(), mid.end(), p);
  const std::size_t hi = static_cast<std::size_t>(it - mid.begin());
  const std::size_t lo = hi - 1;
  const double span = mid[hi] - mid[lo];
  const double frac = span > 0.0 ? (p - mid[lo]) / span : 0.0;
  return values[order[lo]] + frac * (values[order[hi]] - values[order[lo]]);
}

void weighted_moments(const Population& pop, std::vector<double>& mean, std::vector<double>& cov) {
  const std::size_t d = pop.dim();
  mean.assign(d, 0.0);
  cov.assign(d * d, 0.0);
  for (const auto& p : pop.particles) {
    for (std::size_t i = 0; i < d; ++i) mean[i] += p.weight * p.theta[i];
  }
  for (const auto& p : pop.particles) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        cov[i * d + j] += p.weight * (p.theta[i] - mean[i]) * (p.theta[j] - mean[j]);
      }
    }
  }
}

PosteriorReport posterior_report(const Population& pop) {
  PosteriorReport report;
  const std::size_t d = pop.dim();
  const auto names = Prior::parameter_names(d);
  for (const auto& p : pop.particles) {
    report.samples.push_back(p.theta);
    report.weights.push_back(p.weight);
  }
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> column;
    column.reserve(pop.particles.size());
    for (const auto& p : pop.particles) column.push_back(p.theta[i]);
    ParameterReport r;
    r.name = names[i];
    r.ci.p05 = weighted_percentile(column, report.weights, 0.05);
    r.ci.p50 = weighted_percentile(column, report.weights, 0.50);
    r.ci.p95 = weighted_percentile(column, report.weights, 0.95);
    report.params.push_back(std::move(r));
  }
  return report;
}

Population rejection_abc(const Problem& problem, const Prior& prior, const Weights& weights, double delta,
                         std::size_t n_accept, std::uint64_t seed, std::size_t threads,
                         std::optional<std::size_t> max_budget) {
  if (n_accept < 1) throw std::invalid_argument("rejection_abc: n_accept must be >= 1");
  if (!(delta >= 0.0)) throw std::invalid_argument("rejection_abc: delta must be >= 0 or infinite");
  Population pop;
  pop.threshold = delta;
  std::size_t next_attempt = 0;
  while (pop.particles.size() < n_accept) {
    std::size_t batch = n_accept - pop.particles.size();
    if (max_budget) {
      if (next_attempt >= *max_budget) {
        throw BudgetExhausted("rejection_abc: " + std::to_string(*max_budget) + " simulations spent, only " +
                              std::to_string(pop.particles.size()) + " of " + std::to_string(n_accept) +
                              " accepted");
      }
      batch = std::min(batch, *max_budget - next_attempt);
    }
    std::vector<SlotOutcome> out(batch);
    parallel_for(batch, threads, [&](std::size_t k) {
      Rng rng(seed, {kStreamRejection, next_attempt + k});
      out[k].theta = prior.sample(problem.model, rng);
      out[k].distance = evaluate(problem, weights, out[k].theta, rng);
    });
    next_attempt += batch;
    for (auto& o : out) {
      if (o.distance < delta && pop.particles.size() < n_accept) {
        pop.particles.push_back({std::move(o.theta), 1.0, o.distance});
      }
    }
  }
  for (auto& p : pop.particles) p.weight = 1.0 / static_cast<double>(n_accept);
  pop.budget_used = next_attempt;
  pop.attempts = next_attempt;
  pop.acceptance_rate = static_cast<double>(n_accept) / static_cast<double>(next_attempt);
  return pop;
}

SmcResult smc_abc(const Problem& problem, const Prior& prior, const Weights& weights, const SmcConfig& cfg) {
  if (cfg.n_pop < 50) throw std::invalid_argument("smc_abc: n_pop must be >= 50");
  if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw std::invalid_argument("smc_abc: alpha must lie in (0,1)");
  if (!(cfg.stop.min_acceptance > 0.0 && cfg.stop.min_acceptance <= 1.0)) {
    throw std::invalid_argument("smc_abc: min_acceptance must lie in (0,1]");
  }
  const auto max_attempts =
      static_cast<std::size_t>(std::ceil(static_cast<double>(cfg.n_pop) / cfg.stop.min_acceptance));

  SmcResult result;
  std::vector<SlotOutcome> accepted;
  std::size_t attempts = 0;

  // Generation 0: the prior, keeping every candidate with a finite distance.
  const bool filled = fill_generation(
      cfg.n_pop, kInf, max_attempts, cfg.threads, problem, weights, cfg.seed, 0,
      [&](Rng& rng) { return prior.sample(problem.model, rng); }, accepted, attempts);
  result.total_budget = attempts;
  if (!filled) {
    result.status = SmcStatus::NoPopulation;
    return result;
  }
  Population pop;
  pop.generation = 0;
  pop.threshold = kInf;
  pop.attempts = attempts;
  pop.budget_used = attempts;
  pop.acceptance_rate = static_cast<double>(cfg.n_pop) / static_cast<double>(attempts);
  for (auto& a : accepted) pop.particles.push_back({std::move(a.theta), 1.0, a.distance});
  normalize(pop.particles);
  result.trace.checkpoints.push_back(checkpoint(pop));
  result.history.push_back(pop);

  for (int gen = 1;; ++gen) {
    if (pop.budget_used >= cfg.stop.max_budget) {
      result.status = SmcStatus::BudgetReached;
      break;
    }
    if (cfg.stop.max_generations && gen > *cfg.stop.max_generations) {
      result.status = SmcStatus::GenerationLimit;
      break;
    }
    std::vector<double> distances;
    for (const auto& p : pop.particles) distances.push_back(p.distance);
    const double delta = quantile(distances, cfg.alpha);
    const Kernel kernel(pop);
    std::vector<double> cumulative;
    double run = 0.0;
    for (const auto& p : pop.particles) cumulative.push_back(run += p.weight);

    const bool ok = fill_generation(
        cfg.n_pop, delta, max_attempts, cfg.threads, problem, weights, cfg.seed, gen,
        [&](Rng& rng) { return propose(pop, cumulative, kernel, prior, problem.model, rng); }, accepted,
        attempts);
    result.total_budget += attempts;
    if (!ok) {
      result.status = SmcStatus::AcceptanceTooLow;
      break;
    }

    Population next;
    next.generation = gen;
    next.threshold = delta;
    next.attempts = attempts;
    next.budget_used = pop.budget_used + attempts;
    next.acceptance_rate = static_cast<double>(cfg.n_pop) / static_cast<double>(attempts);
    next.particles.resize(cfg.n_pop);
    std::vector<double> log_w(cfg.n_pop);
    parallel_for(cfg.n_pop, cfg.threads, [&](std::size_t i) {
      // log prior - log sum_j w_j K(theta_i | theta_j), via log-sum-exp.
      std::vector<double> terms(pop.particles.size());
      double peak = -kInf;
      for (std::size_t j = 0; j < pop.particles.size(); ++j) {
        terms[j] = std::log(pop.particles[j].weight) + kernel.log_density(accepted[i].theta, pop.particles[j].theta);
        peak = std::max(peak, terms[j]);
      }
      double acc = 0.0;
      for (double t : terms) acc += std::exp(t - peak);
      log_w[i] = std::log(prior.density(problem.model, accepted[i].theta)) - (peak + std::log(acc));
    });
    const double top = *std::max_element(log_w.begin(), log_w.end());
    for (std::size_t i = 0; i < cfg.n_pop; ++i) {
      next.particles[i] = {std::move(accepted[i].theta), std::exp(log_w[i] - top), accepted[i].distance};
    }
    normalize(next.particles);
    pop = std::move(next);
    result.trace.checkpoints.push_back(checkpoint(pop));
    result.history.push_back(pop);
  }
  result.final_population = pop;
  return result;
}

}  // namespace pdifmp
