#include "pdifmp/flows.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace pdifmp {

namespace {

void check_step(double dt) {
  if (!(dt >= 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step size must be finite and non-negative, got " + std::to_string(dt));
  }
}

// Second-order (relative) Taylor expansion of the oscillator covariance
// around t = 0. Valid for any damping, including gamma2 = 0.
SymMat2 oscillator_cov_taylor(const OscillatorParams& p, double t) {
  const double g1sq = p.gamma1 * p.gamma1;
  const double g2 = p.gamma2;
  const double s2 = p.sigma * p.sigma;
  const double c = 4.0 * g2 * g2 - g1sq;
  const double t2 = t * t;
  const double t3 = t2 * t;
  SymMat2 out;
  out.c11 = s2 * (t3 / 3.0 - g2 * t3 * t / 2.0 + (g2 * g2 + c / 3.0) * t3 * t2 / 5.0);
  out.c12 = s2 * (t2 / 2.0 - g2 * t3 + (2.0 * g2 * g2 + 2.0 * c / 3.0) * t2 * t2 / 4.0);
  out.c22 = s2 * (t - 2.0 * g2 * t2 + (8.0 * g2 * g2 - g1sq) * t3 / 3.0);
  return out;
}

}  // namespace

double OscillatorParams::kappa() const {
  const double k2 = gamma1 * gamma1 - gamma2 * gamma2;
  if (!(gamma1 > 0.0) || !(gamma2 >= 0.0) || !(k2 > 0.0)) {
    throw std::invalid_argument("oscillator requires gamma1 > 0, gamma2 >= 0 and gamma1^2 - gamma2^2 > 0");
  }
  return std::sqrt(k2);
}

GaussianStep wpwd_step(double x, double drift, double sigma, double dt) {
  check_step(dt);
  GaussianStep s;
  s.dim = 1;
  s.mean[0] = x + drift * dt;
  s.cov.c11 = sigma * sigma * dt;
  return s;
}

GaussianStep ou_step(double x, double level, double eta, double sigma, double dt) {
  check_step(dt);
  if (!(eta > 0.0)) throw std::invalid_argument("OU mean-reversion rate must be positive");
  // expm1 keeps full relative precision for tiny steps.
  const double decay = std::exp(-eta * dt);
  GaussianStep s;
  s.dim = 1;
  s.mean[0] = x * decay - level * std::expm1(-eta * dt);
  s.cov.c11 = -sigma * sigma / (2.0 * eta) * std::expm1(-2.0 * eta * dt);
  return s;
}

Mat2 wdsho_exp(const OscillatorParams& p, double dt) {
  check_step(dt);
  const double k = p.kappa();
  const double damp = std::exp(-p.gamma2 * dt);
  const double sn = std::sin(k * dt);
  const double cs = std::cos(k * dt);
  return {damp * (cs + p.gamma2 / k * sn), damp * sn / k,
          -damp * p.gamma1 * p.gamma1 / k * sn, damp * (cs - p.gamma2 / k * sn)};
}

SymMat2 wdsho_cov(const OscillatorParams& p, double dt) {
  check_step(dt);
  if (!(p.gamma2 > 0.0)) {
    throw std::invalid_argument("wdsho_cov requires gamma2 > 0; use simplesho_cov for the undamped case");
  }
  const double k = p.kappa();
  const double g1sq = p.gamma1 * p.gamma1;
  const double g2 = p.gamma2;
  const double s2 = p.sigma * p.sigma;
  const double e = std::exp(-2.0 * g2 * dt);
  const double c2 = std::cos(2.0 * k * dt);
  const double s2k = std::sin(2.0 * k * dt);
  const double sk = std::sin(k * dt);
  SymMat2 out;
  out.c11 = s2 / (4.0 * g2 * g1sq) -
            s2 * e / (4.0 * g2 * g1sq * k * k) * (g1sq - g2 * g2 * c2 + g2 * k * s2k);
  out.c12 = s2 / (2.0 * k * k) * e * sk * sk;
  out.c22 = s2 / (4.0 * g2) - s2 * e / (4.0 * g2 * k * k) * (g1sq - g2 * g2 * c2 - g2 * k * s2k);
  return out;
}

SymMat2 simplesho_cov(double gamma1, double sigma, double dt) {
  check_step(dt);
  if (!(gamma1 > 0.0)) throw std::invalid_argument("simplesho_cov requires gamma1 > 0");
  const double half_s2 = sigma * sigma / 2.0;
  const double a = 2.0 * gamma1 * dt;
  const double sn = std::sin(gamma1 * dt);
  SymMat2 out;
  out.c11 = half_s2 * (a - std::sin(a)) / (2.0 * gamma1 * gamma1 * gamma1);
  out.c12 = half_s2 * sn * sn / (gamma1 * gamma1);
  out.c22 = half_s2 * (a + std::sin(a)) / (2.0 * gamma1);
  return out;
}

SymMat2 oscillator_cov(const OscillatorParams& p, double dt) {
  check_step(dt);
  static_cast<void>(p.kappa());  // validates gamma1 > gamma2 >= 0
  if (dt < kTaylorStep) return oscillator_cov_taylor(p, dt);
  if (p.gamma2 < kMinDamping) return simplesho_cov(p.gamma1, p.sigma, dt);
  return wdsho_cov(p, dt);
}

GaussianStep oscillator_step(const Vec2& x, const OscillatorParams& p, double dt) {
  GaussianStep s;
  s.dim = 2;
  s.mean = wdsho_exp(p, dt) * x;
  s.cov = oscillator_cov(p, dt);
  return s;
}

Mat2 psd_factor(const SymMat2& cov) {
  const double half_tr = 0.5 * (cov.c11 + cov.c22);
  const double half_diff = 0.5 * (cov.c11 - cov.c22);
  const double rad = std::hypot(half_diff, cov.c12);
  const double lmax = half_tr + rad;
  const double lmin = half_tr - rad;
  if (!std::isfinite(lmax) || lmin < -kPsdTolerance) {
    throw NumericalError("covariance matrix is indefinite beyond tolerance (min eigenvalue " +
                         std::to_string(lmin) + ")");
  }
  if (lmin > 0.0 && cov.c11 > 0.0) {
    const double l11 = std::sqrt(cov.c11);
    const double l21 = cov.c12 / l11;
    const double l22 = std::sqrt(std::max(0.0, cov.c22 - l21 * l21));
    return {l11, 0.0, l21, l22};
  }
  // Singular (or clamped) case: factor through the eigen-decomposition.
  const double l1 = std::max(lmax, 0.0);
  const double l2 = std::max(lmin, 0.0);
  double v1x, v1y;
  if (cov.c12 == 0.0) {
    if (cov.c11 >= cov.c22) {
      v1x = 1.0;
      v1y = 0.0;
    } else {
      v1x = 0.0;
      v1y = 1.0;
    }
  } else {
    // Two algebraically equivalent eigenvector forms; take the better conditioned one.
    const double ax = cov.c12, ay = lmax - cov.c11;
    const double bx = lmax - cov.c22, by = cov.c12;
    if (std::hypot(ax, ay) >= std::hypot(bx, by)) {
      v1x = ax;
      v1y = ay;
    } else {
      v1x = bx;
      v1y = by;
    }
    const double n = std::hypot(v1x, v1y);
    v1x /= n;
    v1y /= n;
  }
  const double r1 = std::sqrt(l1), r2 = std::sqrt(l2);
  // Second eigenvector is the rotation of the first.
  return {v1x * r1, -v1y * r2, v1y * r1, v1x * r2};
}

Vec2 sample_step(const GaussianStep& step, Rng& rng) {
  if (step.dim == 1) {
    if (step.cov.c11 < -kPsdTolerance) throw NumericalError("negative variance in Gaussian step");
    const double sd = std::sqrt(std::max(step.cov.c11, 0.0));
    return {step.mean[0] + sd * rng.normal(), 0.0};
  }
  const Mat2 l = psd_factor(step.cov);
  const Vec2 xi{rng.normal(), rng.normal()};
  const Vec2 noise = l * xi;
  return {step.mean[0] + noise[0], step.mean[1] + noise[1]};
}

LinearFlow LinearFlow::wpwd(double drift, double sigma, double dt) {
  const GaussianStep s = wpwd_step(0.0, drift, sigma, dt);
  LinearFlow f;
  f.dim_ = 1;
  f.transition_ = Mat2::identity();
  f.offset_ = {s.mean[0], 0.0};
  f.cov_ = s.cov;
  f.factor_ = {std::sqrt(std::max(s.cov.c11, 0.0)), 0.0, 0.0, 0.0};
  return f;
}

LinearFlow LinearFlow::ou(double level, double eta, double sigma, double dt) {
  const GaussianStep s = ou_step(0.0, level, eta, sigma, dt);
  LinearFlow f;
  f.dim_ = 1;
  f.transition_ = {std::exp(-eta * dt), 0.0, 0.0, 1.0};
  f.offset_ = {s.mean[0], 0.0};
  f.cov_ = s.cov;
  f.factor_ = {std::sqrt(std::max(s.cov.c11, 0.0)), 0.0, 0.0, 0.0};
  return f;
}

LinearFlow LinearFlow::oscillator(const OscillatorParams& p, double dt) {
  LinearFlow f;
  f.dim_ = 2;
  f.transition_ = wdsho_exp(p, dt);
  f.offset_ = {0.0, 0.0};
  f.cov_ = oscillator_cov(p, dt);
  f.factor_ = psd_factor(f.cov_);
  return f;
}

GaussianStep LinearFlow::step(const Vec2& x) const {
  GaussianStep s;
  s.dim = dim_;
  s.cov = cov_;
  if (dim_ == 1) {
    s.mean = {transition_.a11 * x[0] + offset_[0], 0.0};
  } else {
    const Vec2 m = transition_ * x;
    s.mean = {m[0] + offset_[0], m[1] + offset_[1]};
  }
  return s;
}

void LinearFlow::advance(Vec2& x, Rng& rng) const {
  if (dim_ == 1) {
    x[0] = transition_.a11 * x[0] + offset_[0] + factor_.a11 * rng.normal();
    return;
  }
  const double xi1 = rng.normal();
  const double xi2 = rng.normal();
  const Vec2 m = transition_ * x;
  x[0] = m[0] + offset_[0] + factor_.a11 * xi1 + factor_.a12 * xi2;
  x[1] = m[1] + offset_[1] + factor_.a21 * xi1 + factor_.a22 * xi2;
}

}  // namespace pdifmp
