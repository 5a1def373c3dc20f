#include "pdifmp/prior.hpp"

#include <cmath>
#include <stdexcept>

namespace pdifmp {

namespace {

void check_interval(const Interval& iv, const char* name) {
  if (!std::isfinite(iv.lower) || !std::isfinite(iv.upper) || !(iv.lower < iv.upper)) {
    throw std::invalid_argument(std::string("prior for ") + name +
                                " needs finite bounds with lower < upper");
  }
  if (iv.lower < 0.0) {
    throw std::invalid_argument(std::string("prior for ") + name + " must lie in the positive reals");
  }
}

}  // namespace

Prior::Prior(Interval sigma, Interval b, Interval lambda, std::optional<Interval> eta) {
  check_interval(sigma, "sigma");
  check_interval(b, "b");
  check_interval(lambda, "lambda");
  bounds_ = {sigma, b, lambda};
  if (eta) {
    check_interval(*eta, "eta");
    bounds_.push_back(*eta);
  }
  for (const auto& iv : bounds_) box_density_ /= iv.width();
}

Prior Prior::paper_default(ModelId model, std::optional<Interval> eta) {
  Interval b{0.0, 10.0};
  if (model == ModelId::TP2_WDSHO) b = {2.0, 100.0};
  if (model == ModelId::TP4_SwitchedSHO) b = {0.0, 1.0};
  return Prior({0.0, 10.0}, b, {0.0, 1.0}, eta);
}

std::vector<std::string> Prior::parameter_names(std::size_t dim) {
  std::vector<std::string> names{"sigma", "b", "lambda"};
  if (dim == 4) names.emplace_back("eta");
  return names;
}

bool Prior::contains(const ModelSpec& model, std::span<const double> theta) const {
  if (theta.size() != bounds_.size()) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    // Open box: every parameter must stay strictly positive.
    if (!(theta[i] > bounds_[i].lower) || !(theta[i] < bounds_[i].upper)) return false;
  }
  return satisfies_model_constraints(model, ParamVector::from_vector(theta));
}

double Prior::density(const ModelSpec& model, std::span<const double> theta) const {
  return contains(model, theta) ? box_density_ : 0.0;
}

std::vector<double> Prior::sample(const ModelSpec& model, Rng& rng) const {
  std::vector<double> theta(bounds_.size());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    for (std::size_t i = 0; i < bounds_.size(); ++i) {
      theta[i] = bounds_[i].lower + rng.uniform() * bounds_[i].width();
    }
    if (contains(model, theta)) return theta;
  }
  throw std::runtime_error("prior support has (numerically) zero mass under the model constraints");
}

}  // namespace pdifmp
