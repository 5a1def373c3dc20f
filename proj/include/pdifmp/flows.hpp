#pragma once

// Exact Gaussian transition laws of the SDEs underlying the test problems:
// Wiener process with drift (WPWD), Ornstein-Uhlenbeck (OU), the weakly
// damped stochastic harmonic oscillator (WDSHO) and its undamped limit
// (SimpleSHO). Each law is affine in the start state, so a step of fixed size
// is precomputed once as a LinearFlow and then applied many times.

#include <array>
#include <cstddef>
#include <stdexcept>

#include "pdifmp/random.hpp"

namespace pdifmp {

using Vec2 = std::array<double, 2>;

struct Mat2 {
  double a11 = 0.0, a12 = 0.0, a21 = 0.0, a22 = 0.0;

  static Mat2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
  Vec2 operator*(const Vec2& v) const { return {a11 * v[0] + a12 * v[1], a21 * v[0] + a22 * v[1]}; }
  Mat2 operator*(const Mat2& o) const {
    return {a11 * o.a11 + a12 * o.a21, a11 * o.a12 + a12 * o.a22,
            a21 * o.a11 + a22 * o.a21, a21 * o.a12 + a22 * o.a22};
  }
  Mat2 transpose() const { return {a11, a21, a12, a22}; }
};

/// Symmetric 2x2 matrix [[c11, c12], [c12, c22]].
struct SymMat2 {
  double c11 = 0.0, c12 = 0.0, c22 = 0.0;
  Mat2 full() const { return {c11, c12, c12, c22}; }
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N(mean, cov) in dimension 1 or 2. For dim 1 only mean[0] and cov.c11 are used.
struct GaussianStep {
  std::size_t dim = 1;
  Vec2 mean{0.0, 0.0};
  SymMat2 cov;
};

struct OscillatorParams {
  double gamma1 = 1.0;  // frequency-like
  double gamma2 = 0.0;  // damping
  double sigma = 1.0;

  /// sqrt(gamma1^2 - gamma2^2); throws std::invalid_argument unless positive.
  [[nodiscard]] double kappa() const;
};

/// Eigenvalues of a symmetric matrix at or above this bound are accepted
/// (negative ones are clamped to zero before factorisation).
inline constexpr double kPsdTolerance = 1e-12;
/// Steps shorter than this use Taylor expansions of the covariances.
inline constexpr double kTaylorStep = 1e-6;
/// Damping below this is treated as the undamped oscillator.
inline constexpr double kMinDamping = 1e-8;

GaussianStep wpwd_step(double x, double drift, double sigma, double dt);
GaussianStep ou_step(double x, double level, double eta, double sigma, double dt);

/// e^{A t} for A = [[0, 1], [-gamma1^2, -2 gamma2]].
Mat2 wdsho_exp(const OscillatorParams& p, double dt);
/// Closed-form covariance of the damped oscillator. Requires gamma2 > 0.
SymMat2 wdsho_cov(const OscillatorParams& p, double dt);
/// Closed-form covariance of the undamped oscillator (gamma2 = 0).
SymMat2 simplesho_cov(double gamma1, double sigma, double dt);
/// Covariance for any damping >= 0: routes tiny damping to simplesho_cov and
/// tiny steps to the Taylor expansion.
SymMat2 oscillator_cov(const OscillatorParams& p, double dt);
GaussianStep oscillator_step(const Vec2& x, const OscillatorParams& p, double dt);

/// Lower-triangular (or eigen-based, for singular matrices) factor L with
/// L L^T = cov after clamping eigenvalues in [-kPsdTolerance, 0) to zero.
/// Throws NumericalError if cov is indefinite beyond the tolerance.
Mat2 psd_factor(const SymMat2& cov);

/// mean + L xi with xi standard normal.
Vec2 sample_step(const GaussianStep& step, Rng& rng);

/// Affine Gaussian transition x -> transition * x + offset + factor * xi for a
/// fixed step size.
class LinearFlow {
 public:
  static LinearFlow wpwd(double drift, double sigma, double dt);
  static LinearFlow ou(double level, double eta, double sigma, double dt);
  static LinearFlow oscillator(const OscillatorParams& p, double dt);

  [[nodiscard]] std::size_t dim() const { return dim_; }
  [[nodiscard]] GaussianStep step(const Vec2& x) const;
  /// Draws the next state in place.
  void advance(Vec2& x, Rng& rng) const;

 private:
  std::size_t dim_ = 1;
  Mat2 transition_ = Mat2::identity();
  Vec2 offset_{0.0, 0.0};
  SymMat2 cov_;
  Mat2 factor_;
};

}  // namespace pdifmp
