#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pdifmp/model.hpp"
#include "pdifmp/random.hpp"

namespace pdifmp {

struct Interval {
  double lower = 0.0;
  double upper = 1.0;
  [[nodiscard]] double width() const { return upper - lower; }
};

/// Independent uniform priors on (sigma, b, lambda[, eta]), restricted to the
/// parameter values for which the model is well-defined.
class Prior {
 public:
  Prior(Interval sigma, Interval b, Interval lambda, std::optional<Interval> eta = std::nullopt);

  /// sigma ~ U(0,10), b ~ U(0,10), lambda ~ U(0,1); b ~ U(2,100) for TP2 and
  /// b ~ U(0,1) for TP4.
  static Prior paper_default(ModelId model, std::optional<Interval> eta = std::nullopt);

  [[nodiscard]] std::size_t dim() const { return bounds_.size(); }
  [[nodiscard]] const std::vector<Interval>& bounds() const { return bounds_; }
  [[nodiscard]] bool infers_eta() const { return bounds_.size() == 4; }
  [[nodiscard]] static std::vector<std::string> parameter_names(std::size_t dim);

  /// Inside the open box and the model constraints.
  [[nodiscard]] bool contains(const ModelSpec& model, std::span<const double> theta) const;
  /// Density (constant within the support).
  [[nodiscard]] double density(const ModelSpec& model, std::span<const double> theta) const;
  /// Rejection-samples the box until the model constraints hold.
  std::vector<double> sample(const ModelSpec& model, Rng& rng) const;

 private:
  std::vector<Interval> bounds_;
  double box_density_ = 1.0;
};

}  // namespace pdifmp
