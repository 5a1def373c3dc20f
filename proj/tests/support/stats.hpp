#pragma once

// Statistical oracles for the test suites.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "pdifmp/flows.hpp"
#include "pdifmp/model.hpp"
#include "pdifmp/random.hpp"

namespace testing {

struct KsResult {
  double statistic = 0.0;
  double p_value = 0.0;
};

/// Kolmogorov tail probability Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2).
double kolmogorov_q(double x);

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);
KsResult ks_one_sample(std::vector<double> sample, const std::function<double(double)>& cdf);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

/// Pearson chi-square goodness of fit of integer counts against Poisson(mean).
/// Cells with expected count below 5 are pooled into the tails.
struct ChiSquareResult {
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = 0.0;
};
ChiSquareResult chi_square_poisson(std::span<const double> counts, double mean);

double mean(std::span<const double> v);
double variance(std::span<const double> v);  // unbiased

/// Euler-Maruyama endpoint of the SDE of `model` in the fixed regime z (no
/// jumps) from x0 over [0, T] with step h.
pdifmp::Vec2 euler_maruyama(const pdifmp::ModelSpec& model, const pdifmp::ParamVector& params, double z,
                            const pdifmp::Vec2& x0, double T, double h, pdifmp::Rng& rng);

/// Oscillator covariance by composite Simpson quadrature of
/// int_0^t e^{A s} S S^T e^{A^T s} ds with e^{A s} from a matrix exponential.
pdifmp::SymMat2 oscillator_cov_quadrature(const pdifmp::OscillatorParams& p, double t, std::size_t intervals);

}  // namespace testing
