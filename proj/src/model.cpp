#include "pdifmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdifmp {

namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

}  // namespace

std::size_t state_dim(ModelId id) {
  switch (id) {
    case ModelId::TP1_OU:
    case ModelId::TP3_WPWD:
      return 1;
    case ModelId::TP2_WDSHO:
    case ModelId::TP4_SwitchedSHO:
      return 2;
  }
  return 1;
}

std::string_view model_name(ModelId id) {
  switch (id) {
    case ModelId::TP1_OU: return "TP1";
    case ModelId::TP2_WDSHO: return "TP2";
    case ModelId::TP3_WPWD: return "TP3";
    case ModelId::TP4_SwitchedSHO: return "TP4";
  }
  return "?";
}

ModelId parse_model_id(std::string_view name) {
  if (name == "TP1" || name == "TP1_OU") return ModelId::TP1_OU;
  if (name == "TP2" || name == "TP2_WDSHO") return ModelId::TP2_WDSHO;
  if (name == "TP3" || name == "TP3_WPWD") return ModelId::TP3_WPWD;
  if (name == "TP4" || name == "TP4_SwitchedSHO") return ModelId::TP4_SwitchedSHO;
  fail("unknown model id '" + std::string(name) + "' (expected TP1, TP2, TP3 or TP4)");
}

std::string_view rate_kind_name(RateKind kind) {
  switch (kind) {
    case RateKind::Constant: return "constant";
    case RateKind::Sigmoid: return "sigmoid";
    case RateKind::ReducedCenter: return "reduced_center";
    case RateKind::Cos: return "cos";
  }
  return "?";
}

RateKind parse_rate_kind(std::string_view name) {
  if (name == "constant") return RateKind::Constant;
  if (name == "sigmoid") return RateKind::Sigmoid;
  if (name == "reduced_center") return RateKind::ReducedCenter;
  if (name == "cos") return RateKind::Cos;
  fail("unknown rate kind '" + std::string(name) +
       "' (expected constant, sigmoid, reduced_center or cos)");
}

std::string_view observation_mode_name(ObservationMode mode) {
  return mode == ObservationMode::Default ? "default" : "jump_times";
}

ObservationMode parse_observation_mode(std::string_view name) {
  if (name == "default") return ObservationMode::Default;
  if (name == "jump_times") return ObservationMode::JumpTimes;
  fail("unknown observation mode '" + std::string(name) + "' (expected default or jump_times)");
}

ModelSpec ModelSpec::defaults(ModelId id, double horizon) {
  ModelSpec spec;
  spec.model = id;
  spec.horizon = horizon;
  spec.step = 1e-2;
  spec.rate_kind = RateKind::Constant;
  spec.z0 = InitialRegime::B;
  switch (id) {
    case ModelId::TP1_OU:
      spec.eta = 0.5;
      spec.x0 = {0.0};
      break;
    case ModelId::TP2_WDSHO:
      spec.eta = 1.0;
      spec.x0 = {1.0, 1.0};
      spec.observe_first_coordinate_only = true;
      spec.jump_time_rounding = 1e-3;
      break;
    case ModelId::TP3_WPWD:
      spec.eta = 1.0;
      spec.x0 = {0.0};
      break;
    case ModelId::TP4_SwitchedSHO:
      spec.eta = 2.0;
      spec.x0 = {1.0, 1.0};
      spec.observe_first_coordinate_only = true;
      spec.jump_time_rounding = 1e-3;
      break;
  }
  return spec;
}

std::vector<double> ParamVector::to_vector() const {
  std::vector<double> v{sigma, b, lambda};
  if (eta) v.push_back(*eta);
  return v;
}

ParamVector ParamVector::from_vector(std::span<const double> theta) {
  if (theta.size() != 3 && theta.size() != 4) {
    fail("parameter vector must have 3 or 4 entries, got " + std::to_string(theta.size()));
  }
  ParamVector p;
  p.sigma = theta[0];
  p.b = theta[1];
  p.lambda = theta[2];
  if (theta.size() == 4) p.eta = theta[3];
  return p;
}

void validate(const ModelSpec& spec) {
  if (!positive_finite(spec.horizon)) fail("model.horizon must be a positive finite number");
  if (!positive_finite(spec.step)) fail("model.step must be a positive finite number");
  if (spec.step > spec.horizon) fail("model.step must not exceed model.horizon");
  if (spec.model != ModelId::TP3_WPWD && !positive_finite(spec.eta)) {
    fail("model.eta must be a positive finite number");
  }
  const std::size_t d = state_dim(spec.model);
  if (spec.x0.size() != d) {
    std::ostringstream os;
    os << "model.x0 must have " << d << " entr" << (d == 1 ? "y" : "ies") << " for "
       << model_name(spec.model) << ", got " << spec.x0.size();
    fail(os.str());
  }
  for (double v : spec.x0) {
    if (!std::isfinite(v)) fail("model.x0 entries must be finite");
  }
  if (d == 2 && !spec.observe_first_coordinate_only) {
    fail("2-dim models observe only the first coordinate; set observe_first_coordinate_only");
  }
  if (spec.jump_time_rounding && !positive_finite(*spec.jump_time_rounding)) {
    fail("model.jump_time_rounding must be positive when set");
  }
  if ((spec.model == ModelId::TP2_WDSHO || spec.model == ModelId::TP4_SwitchedSHO) &&
      !spec.jump_time_rounding) {
    fail("TP2 and TP4 require jump_time_rounding");
  }
}

bool satisfies_model_constraints(const ModelSpec& spec, const ParamVector& params) {
  const double eta = params.effective_eta(spec);
  switch (spec.model) {
    case ModelId::TP1_OU:
      return params.b > 0.0 && eta > 0.0;
    case ModelId::TP2_WDSHO:
      return eta > 0.0 && params.b > eta;
    case ModelId::TP3_WPWD:
      return params.b > 0.0;
    case ModelId::TP4_SwitchedSHO:
      return params.b > 0.0 && params.b < eta;
  }
  return false;
}

void validate(const ModelSpec& spec, const ParamVector& params) {
  if (!positive_finite(params.sigma)) fail("sigma must be a positive finite number");
  if (!positive_finite(params.b)) fail("b must be a positive finite number");
  if (!positive_finite(params.lambda)) fail("lambda must be a positive finite number");
  if (params.eta && !positive_finite(*params.eta)) fail("eta must be a positive finite number");
  if (!satisfies_model_constraints(spec, params)) {
    const double eta = params.effective_eta(spec);
    std::ostringstream os;
    if (spec.model == ModelId::TP2_WDSHO) {
      os << "TP2 is only well-defined for b > eta (b=" << params.b << ", eta=" << eta << ")";
    } else if (spec.model == ModelId::TP4_SwitchedSHO) {
      os << "TP4 is only well-defined for b in (0, eta) (b=" << params.b << ", eta=" << eta << ")";
    } else {
      os << "parameters violate the constraints of " << model_name(spec.model);
    }
    fail(os.str());
  }
}

double initial_regime(const ModelSpec& spec, const ParamVector& params) {
  if (spec.z0 == InitialRegime::B) return params.b;
  switch (spec.model) {
    case ModelId::TP1_OU:
    case ModelId::TP3_WPWD:
      return -params.b;
    case ModelId::TP2_WDSHO:
      return 2.0;
    case ModelId::TP4_SwitchedSHO:
      return 0.0;
  }
  return params.b;
}

double transition_tp1_tp3(double x_at_jump, double b) { return x_at_jump <= 0.0 ? b : -b; }

double transition_tp2(double z_prev, double b) {
  if (z_prev == b) return 2.0;
  if (z_prev == 2.0) return b;
  throw InvalidState("TP2 regime must be 2 or b=" + std::to_string(b) + ", got " +
                     std::to_string(z_prev));
}

double transition_tp4(double z_prev, double b) {
  if (z_prev == b) return 0.0;
  if (z_prev == 0.0) return b;
  throw InvalidState("TP4 regime must be 0 or b=" + std::to_string(b) + ", got " +
                     std::to_string(z_prev));
}

double next_regime(const ModelSpec& spec, const ParamVector& params, double x_first, double z_prev) {
  switch (spec.model) {
    case ModelId::TP1_OU:
    case ModelId::TP3_WPWD:
      return transition_tp1_tp3(x_first, params.b);
    case ModelId::TP2_WDSHO:
      return transition_tp2(z_prev, params.b);
    case ModelId::TP4_SwitchedSHO:
      return transition_tp4(z_prev, params.b);
  }
  return z_prev;
}

std::vector<double> HybridPath::coordinate(std::size_t coord) const {
  std::vector<double> out(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = x[i * dim + coord];
  return out;
}

double HybridPath::regime_at(std::size_t i) const {
  // Number of jumps at or before times[i].
  const auto it = std::upper_bound(jump_times.begin(), jump_times.end(), times[i]);
  const auto k = static_cast<std::size_t>(it - jump_times.begin());
  return z_values[std::min(k, z_values.size() - 1)];
}

ObservedDataset project_observation(const HybridPath& path, ObservationMode mode) {
  ObservedDataset obs;
  obs.times = path.times;
  obs.x = path.coordinate(0);
  obs.n_jumps = path.n_jumps;
  if (mode == ObservationMode::JumpTimes) obs.jump_times = path.jump_times;
  return obs;
}

}  // namespace pdifmp
