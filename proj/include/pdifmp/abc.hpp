#pragma once

// Rejection ABC and the SMC-ABC sampler with a Gaussian perturbation kernel.

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdifmp/distance.hpp"
#include "pdifmp/prior.hpp"

namespace pdifmp {

class BudgetExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Particle {
  std::vector<double> theta;
  double weight = 0.0;
  double distance = 0.0;
};

struct Population {
  int generation = 0;
  std::vector<Particle> particles;
  double threshold = std::numeric_limits<double>::infinity();
  std::size_t budget_used = 0;  // cumulative simulations up to and including this generation
  std::size_t attempts = 0;     // simulations spent in this generation
  double acceptance_rate = 1.0;

  [[nodiscard]] std::size_t dim() const { return particles.empty() ? 0 : particles.front().theta.size(); }
  [[nodiscard]] double effective_sample_size() const;
};

struct Percentiles {
  double p05 = 0.0;
  double p50 = 0.0;
  double p95 = 0.0;
};

struct CICheckpoint {
  int generation = 0;
  std::size_t budget_used = 0;
  double threshold = 0.0;
  std::vector<Percentiles> params;
};

struct CITrace {
  std::vector<CICheckpoint> checkpoints;
};

struct StoppingRule {
  std::size_t max_budget = 10000;
  double min_acceptance = 0.015;
  std::optional<int> max_generations;  // counts generations after the prior one
};

struct SmcConfig {
  std::size_t n_pop = 500;
  double alpha = 0.5;
  StoppingRule stop;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

enum class SmcStatus {
  BudgetReached,       // budget_used >= max_budget after a completed generation
  AcceptanceTooLow,    // a generation needed more than n_pop / min_acceptance attempts
  GenerationLimit,
  NoPopulation         // the prior generation itself could not be filled
};

std::string_view smc_status_name(SmcStatus status);

struct SmcResult {
  Population final_population;
  std::vector<Population> history;
  CITrace trace;
  SmcStatus status = SmcStatus::BudgetReached;
  std::size_t total_budget = 0;  // includes attempts of an abandoned generation
};

/// Draw, simulate, summarise and compare until n_accept candidates have
/// distance < delta. Candidates are evaluated in batches keyed by attempt
/// index, so the result does not depend on `threads`. Throws BudgetExhausted
/// once max_budget simulations have been spent.
Population rejection_abc(const Problem& problem, const Prior& prior, const Weights& weights, double delta,
                         std::size_t n_accept, std::uint64_t seed, std::size_t threads = 1,
                         std::optional<std::size_t> max_budget = std::nullopt);

SmcResult smc_abc(const Problem& problem, const Prior& prior, const Weights& weights, const SmcConfig& cfg);

/// Weighted percentile with the cumulative weight of each sorted sample taken
/// at its midpoint, linear in between and flat beyond the extremes.
/// Zero-weight samples are ignored.
double weighted_percentile(std::span<const double> values, std::span<const double> weights, double p);

/// Type-7 (linear) quantile of an unweighted sample.
double quantile(std::vector<double> values, double p);

struct ParameterReport {
  std::string name;
  Percentiles ci;
};

struct PosteriorReport {
  std::vector<ParameterReport> params;
  std::vector<std::vector<double>> samples;
  std::vector<double> weights;
};

PosteriorReport posterior_report(const Population& pop);

/// Row-major lower Cholesky factor of the perturbation covariance, twice the
/// weighted particle covariance. A singular covariance falls back to its
/// diagonal plus a 1e-10 ridge.
std::vector<double> perturbation_cholesky(const Population& pop);

/// Weighted mean and covariance of the particle parameters.
void weighted_moments(const Population& pop, std::vector<double>& mean, std::vector<double>& cov);

}  // namespace pdifmp
