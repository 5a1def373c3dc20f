#pragma once

// Domain types for piecewise diffusion Markov processes (PDifMPs): the four
// hybrid test problems, their parameter vectors, simulated paths and the
// observed datasets derived from them.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace pdifmp {

enum class ModelId {
  TP1_OU,          // Ornstein-Uhlenbeck, level switches between -b and b
  TP2_WDSHO,       // weakly damped oscillator, frequency switches between 2 and b
  TP3_WPWD,        // Wiener process with drift, drift switches between -b and b
  TP4_SwitchedSHO  // oscillator, damping switches between 0 and b
};

enum class RateKind { Constant, Sigmoid, ReducedCenter, Cos };

enum class ObservationMode {
  Default,   // y = {x, N^j}
  JumpTimes  // y = {x, j}: jump times observed as well
};

// Initial regime z0, expressed relative to b since b is inferred.
//   B         -> z0 = b (default for every test problem)
//   Alternate -> z0 = -b (TP1/TP3), 2 (TP2), 0 (TP4)
enum class InitialRegime { B, Alternate };

class InvalidState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  ModelId model = ModelId::TP1_OU;
  double eta = 0.5;  // fixed drift parameter; ignored for TP3
  RateKind rate_kind = RateKind::Constant;
  double horizon = 500.0;
  double step = 1e-2;
  std::vector<double> x0{0.0};
  InitialRegime z0 = InitialRegime::B;
  bool observe_first_coordinate_only = false;
  std::optional<double> jump_time_rounding;

  /// Paper defaults for each test problem: eta, x0, z0 = b, h = 0.01, the
  /// first-coordinate observation for 2-dim models and the 1e-3 jump-time
  /// rounding for TP2/TP4.
  static ModelSpec defaults(ModelId id, double horizon);

  [[nodiscard]] std::size_t dim() const { return x0.size(); }
};

struct ParamVector {
  double sigma = 1.0;
  double b = 1.0;
  double lambda = 0.1;
  std::optional<double> eta;  // set only when eta is inferred

  [[nodiscard]] double effective_eta(const ModelSpec& spec) const {
    return eta.value_or(spec.eta);
  }
  [[nodiscard]] std::vector<double> to_vector() const;
  static ParamVector from_vector(std::span<const double> theta);
};

std::size_t state_dim(ModelId id);
std::string_view model_name(ModelId id);
ModelId parse_model_id(std::string_view name);
std::string_view rate_kind_name(RateKind kind);
RateKind parse_rate_kind(std::string_view name);
std::string_view observation_mode_name(ObservationMode mode);
ObservationMode parse_observation_mode(std::string_view name);

/// Throws std::invalid_argument with a message naming the offending field.
void validate(const ModelSpec& spec);

/// Strict check: every entry > 0 and finite, plus the model constraints
/// b > eta (TP2) and 0 < b < eta (TP4).
void validate(const ModelSpec& spec, const ParamVector& params);

/// Model constraints only (no positivity requirement on sigma).
[[nodiscard]] bool satisfies_model_constraints(const ModelSpec& spec, const ParamVector& params);

double initial_regime(const ModelSpec& spec, const ParamVector& params);

// Transition functions Q.

/// TP1/TP3: b if the state at the jump is <= 0, else -b.
double transition_tp1_tp3(double x_at_jump, double b);
/// TP2: 2 <-> b. Throws InvalidState if z_prev is neither.
double transition_tp2(double z_prev, double b);
/// TP4: 0 <-> b. Throws InvalidState if z_prev is neither.
double transition_tp4(double z_prev, double b);

/// Dispatches to the transition of `spec.model`; `x_first` is the first
/// coordinate of the state at the jump.
double next_regime(const ModelSpec& spec, const ParamVector& params, double x_first, double z_prev);

struct HybridPath {
  std::size_t dim = 1;
  std::vector<double> times;
  std::vector<double> x;  // row-major, times.size() * dim
  std::vector<double> jump_times;  // events strictly inside (0, T)
  std::vector<double> z_values;    // z0 followed by one value per jump
  double post_horizon_regime = 0.0;  // regime drawn after truncation at T; unused by summaries
  std::size_t n_jumps = 0;

  [[nodiscard]] std::size_t size() const { return times.size(); }
  [[nodiscard]] double state(std::size_t i, std::size_t coord = 0) const { return x[i * dim + coord]; }
  [[nodiscard]] std::vector<double> coordinate(std::size_t coord) const;
  /// Regime active at times[i] (right-continuous).
  [[nodiscard]] double regime_at(std::size_t i) const;
};

struct ObservedDataset {
  std::vector<double> times;
  std::vector<double> x;
  std::size_t n_jumps = 0;
  std::optional<std::vector<double>> jump_times;
};

ObservedDataset project_observation(const HybridPath& path, ObservationMode mode);

}  // namespace pdifmp
