#include "pdifmp/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>

namespace pdifmp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& msg) { throw std::invalid_argument(msg); }

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) fail(where + " must be an object");
}

void reject_unknown(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  require_object(j, where);
  for (const auto& [key, value] : j.items()) {
    const bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
    if (!known) {
      std::string list;
      for (const char* a : allowed) list += std::string(list.empty() ? "" : ", ") + a;
      fail("unknown key '" + where + "." + key + "' (allowed: " + list + ")");
    }
  }
}

template <typename T>
T get(const json& j, const std::string& where) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    fail(where + " has the wrong type");
  }
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a number");
  return j.get<double>();
}

std::size_t get_count(const json& j, const std::string& where) {
  if (!j.is_number()) fail(where + " must be a non-negative integer");
  const double v = j.get<double>();
  if (!(v >= 0.0) || std::floor(v) != v) fail(where + " must be a non-negative integer");
  return static_cast<std::size_t>(v);
}

Interval get_interval(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) fail(where + " must be [lower, upper]");
  return {get_number(j[0], where + "[0]"), get_number(j[1], where + "[1]")};
}

json interval_json(const Interval& iv) { return json::array({iv.lower, iv.upper}); }

std::string weight_rule_name(WeightRule rule) {
  return rule == WeightRule::MedianRatio ? "median_ratio" : "reciprocal";
}

WeightRule parse_weight_rule(const std::string& s) {
  if (s == "median_ratio") return WeightRule::MedianRatio;
  if (s == "reciprocal") return WeightRule::Reciprocal;
  fail("abc.weight_rule must be 'median_ratio' or 'reciprocal', got '" + s + "'");
}

ModelSpec parse_model(const json& j) {
  reject_unknown(j, "model",
                 {"name", "eta", "rate", "horizon", "step", "x0", "z0", "observe_first_coordinate_only",
                  "jump_time_rounding"});
  const ModelId id = j.contains("name") ? parse_model_id(get<std::string>(j["name"], "model.name")) : ModelId::TP1_OU;
  const double horizon = j.contains("horizon") ? get_number(j["horizon"], "model.horizon") : 500.0;
  ModelSpec spec = ModelSpec::defaults(id, horizon);
  if (j.contains("eta")) spec.eta = get_number(j["eta"], "model.eta");
  if (j.contains("rate")) spec.rate_kind = parse_rate_kind(get<std::string>(j["rate"], "model.rate"));
  if (j.contains("step")) spec.step = get_number(j["step"], "model.step");
  if (j.contains("x0")) {
    if (!j["x0"].is_array()) fail("model.x0 must be an array");
    spec.x0.clear();
    for (const auto& v : j["x0"]) spec.x0.push_back(get_number(v, "model.x0"));
  }
  if (j.contains("z0")) {
    const auto z0 = get<std::string>(j["z0"], "model.z0");
    if (z0 == "b") {
      spec.z0 = InitialRegime::B;
    } else if (z0 == "alternate") {
      spec.z0 = InitialRegime::Alternate;
    } else {
      fail("model.z0 must be 'b' or 'alternate', got '" + z0 + "'");
    }
  }
  if (j.contains("observe_first_coordinate_only")) {
    spec.observe_first_coordinate_only =
        get<bool>(j["observe_first_coordinate_only"], "model.observe_first_coordinate_only");
  }
  if (j.contains("jump_time_rounding")) {
    const auto& r = j["jump_time_rounding"];
    spec.jump_time_rounding = r.is_null() ? std::nullopt
                                          : std::optional<double>(get_number(r, "model.jump_time_rounding"));
  }
  return spec;
}

ParamVector parse_params(const json& j) {
  reject_unknown(j, "true_params", {"sigma", "b", "lambda", "eta"});
  for (const char* k : {"sigma", "b", "lambda"}) {
    if (!j.contains(k)) fail(std::string("true_params.") + k + " is required");
  }
  ParamVector p;
  p.sigma = get_number(j["sigma"], "true_params.sigma");
  p.b = get_number(j["b"], "true_params.b");
  p.lambda = get_number(j["lambda"], "true_params.lambda");
  if (j.contains("eta") && !j["eta"].is_null()) p.eta = get_number(j["eta"], "true_params.eta");
  return p;
}

PriorSettings parse_prior(const json& j) {
  reject_unknown(j, "prior", {"sigma", "b", "lambda", "eta"});
  PriorSettings p;
  if (j.contains("sigma")) p.sigma = get_interval(j["sigma"], "prior.sigma");
  if (j.contains("b")) p.b = get_interval(j["b"], "prior.b");
  if (j.contains("lambda")) p.lambda = get_interval(j["lambda"], "prior.lambda");
  if (j.contains("eta") && !j["eta"].is_null()) p.eta = get_interval(j["eta"], "prior.eta");
  return p;
}

AbcSettings parse_abc(const json& j) {
  reject_unknown(j, "abc",
                 {"n_pop", "alpha", "max_budget", "min_acceptance", "n_pilot", "max_generations", "weight_rule"});
  AbcSettings a;
  if (j.contains("n_pop")) a.n_pop = get_count(j["n_pop"], "abc.n_pop");
  if (j.contains("alpha")) a.alpha = get_number(j["alpha"], "abc.alpha");
  if (j.contains("max_budget")) a.max_budget = get_count(j["max_budget"], "abc.max_budget");
  if (j.contains("min_acceptance")) a.min_acceptance = get_number(j["min_acceptance"], "abc.min_acceptance");
  if (j.contains("n_pilot")) a.n_pilot = get_count(j["n_pilot"], "abc.n_pilot");
  if (j.contains("max_generations") && !j["max_generations"].is_null()) {
    a.max_generations = static_cast<int>(get_count(j["max_generations"], "abc.max_generations"));
  }
  if (j.contains("weight_rule")) a.weight_rule = parse_weight_rule(get<std::string>(j["weight_rule"], "abc.weight_rule"));
  return a;
}

ErgodicSettings parse_ergodic(const json& j) {
  reject_unknown(j, "ergodic", {"t_long", "t_star", "n_rep"});
  ErgodicSettings e;
  if (j.contains("t_long")) e.t_long = get_number(j["t_long"], "ergodic.t_long");
  if (j.contains("t_star")) e.t_star = get_number(j["t_star"], "ergodic.t_star");
  if (j.contains("n_rep")) e.n_rep = get_count(j["n_rep"], "ergodic.n_rep");
  return e;
}

// Preset construction ---------------------------------------------------------

struct PresetSpec {
  std::string model;
  double horizon;
  std::string rate = "constant";
  std::string observation = "default";
  double sigma, b, lambda;
  std::optional<double> eta;
  std::optional<Interval> eta_prior;
  double max_budget;
};

json build_preset(const PresetSpec& p) {
  const ModelSpec spec = ModelSpec::defaults(parse_model_id(p.model), p.horizon);
  PriorSettings prior;
  if (spec.model == ModelId::TP2_WDSHO) prior.b = {2.0, 100.0};
  if (spec.model == ModelId::TP4_SwitchedSHO) prior.b = {0.0, 1.0};
  prior.eta = p.eta_prior;
  RunConfig cfg;
  cfg.model = spec;
  cfg.model.rate_kind = parse_rate_kind(p.rate);
  if (p.eta) cfg.model.eta = *p.eta;
  cfg.observation = parse_observation_mode(p.observation);
  cfg.true_params = ParamVector{p.sigma, p.b, p.lambda, p.eta_prior ? p.eta : std::nullopt};
  cfg.prior = prior;
  cfg.abc.max_budget = static_cast<std::size_t>(p.max_budget);
  return to_json(cfg);
}

const std::map<std::string, PresetSpec>& presets() {
  static const std::map<std::string, PresetSpec> table = [] {
    std::map<std::string, PresetSpec> t;
    // TP1 settings 1-3 with constant rate.
    t["tp1-setting1"] = {"TP1", 500.0, "constant", "default", 1.0, 2.0, 0.1, {}, {}, 1e4};
    t["tp1-setting2"] = {"TP1", 500.0, "constant", "default", 1.0, 2.0, 0.2, {}, {}, 1e4};
    t["tp1-setting3"] = {"TP1", 500.0, "constant", "default", 2.0, 4.0, 0.2, {}, {}, 1e4};
    // Setting 1 over different observation horizons.
    t["tp1-horizon100"] = {"TP1", 100.0, "constant", "default", 1.0, 2.0, 0.1, {}, {}, 1e4};
    t["tp1-horizon500"] = {"TP1", 500.0, "constant", "default", 1.0, 2.0, 0.1, {}, {}, 1e4};
    t["tp1-horizon1000"] = {"TP1", 1000.0, "constant", "default", 1.0, 2.0, 0.1, {}, {}, 1e4};
    // State-dependent rates on TP1 setting 1.
    t["tp1-sigmoid"] = {"TP1", 500.0, "sigmoid", "default", 1.0, 2.0, 0.1, {}, {}, 4e4};
    t["tp1-reduced-center"] = {"TP1", 500.0, "reduced_center", "default", 1.0, 2.0, 0.1, {}, {}, 1e4};
    t["tp1-cos"] = {"TP1", 500.0, "cos", "default", 1.0, 2.0, 0.1, {}, {}, 1.5e4};
    // Remaining test problems.
    t["tp2"] = {"TP2", 1000.0, "constant", "default", 1.0, 10.0, 0.1, {}, {}, 1.3e4};
    t["tp3"] = {"TP3", 1000.0, "constant", "default", 1.0, 2.0, 0.1, {}, {}, 5e4};
    t["tp4"] = {"TP4", 5000.0, "constant", "default", 1.0, 0.1, 0.1, {}, {}, 1.3e4};
    // Drift parameter inferred as a fourth component.
    t["tp1-eta"] = {"TP1", 500.0, "constant", "default", 1.0, 2.0, 0.1, 1.0, Interval{0.0, 10.0}, 1.5e5};
    t["tp4-eta"] = {"TP4", 5000.0, "constant", "default", 1.0, 0.1, 0.1, 20.0, Interval{2.0, 100.0}, 5e4};
    // TP3 with observed jump times and the slope summary.
    t["tp3-jumptimes"] = {"TP3", 1000.0, "constant", "jump_times", 1.0, 2.0, 0.1, {}, {}, 5e4};
    t["tp3-sigma8"] = {"TP3", 1000.0, "constant", "jump_times", 8.0, 2.0, 0.1, {}, {}, 5e4};
    t["tp3-sigmoid"] = {"TP3", 1000.0, "sigmoid", "jump_times", 1.0, 2.0, 0.1, {}, {}, 5e4};
    t["tp3-reduced-center"] = {"TP3", 1000.0, "reduced_center", "jump_times", 1.0, 2.0, 0.1, {}, {}, 5e4};
    t["tp3-cos"] = {"TP3", 1000.0, "cos", "jump_times", 1.0, 2.0, 0.1, {}, {}, 5e4};
    return t;
  }();
  return table;
}

}  // namespace

Prior RunConfig::make_prior() const { return Prior(prior.sigma, prior.b, prior.lambda, prior.eta); }

void RunConfig::validate() const {
  pdifmp::validate(model);
  const Prior pr = make_prior();  // checks the intervals
  if (true_params) {
    pdifmp::validate(model, *true_params);
    if (true_params->eta.has_value() != pr.infers_eta()) {
      fail("true_params.eta and prior.eta must be given together (eta is either inferred or fixed)");
    }
  }
  if (abc.n_pop < 50) fail("abc.n_pop must be >= 50");
  if (!(abc.alpha > 0.0 && abc.alpha < 1.0)) fail("abc.alpha must lie in (0,1)");
  if (!(abc.min_acceptance > 0.0 && abc.min_acceptance <= 1.0)) fail("abc.min_acceptance must lie in (0,1]");
  if (abc.max_budget < 1) fail("abc.max_budget must be >= 1");
  if (abc.n_pilot < 20) fail("abc.n_pilot must be >= 20");
  if (!(ergodic.t_long > 0.0) || !std::isfinite(ergodic.t_long)) fail("ergodic.t_long must be positive");
  if (!(ergodic.t_star > 0.0) || !std::isfinite(ergodic.t_star)) fail("ergodic.t_star must be positive");
  if (ergodic.n_rep < 100) fail("ergodic.n_rep must be >= 100");
  if (observed && observed->path.empty()) fail("observed.path must not be empty");
  if (observed && observation == ObservationMode::JumpTimes && !observed->jumps) {
    fail("observation 'jump_times' with observed files needs observed.jumps");
  }
  if (output.empty()) fail("output must name a directory");
}

json to_json(const RunConfig& cfg) {
  json model{{"name", model_name(cfg.model.model)},
             {"eta", cfg.model.eta},
             {"rate", rate_kind_name(cfg.model.rate_kind)},
             {"horizon", cfg.model.horizon},
             {"step", cfg.model.step},
             {"x0", cfg.model.x0},
             {"z0", cfg.model.z0 == InitialRegime::B ? "b" : "alternate"},
             {"observe_first_coordinate_only", cfg.model.observe_first_coordinate_only},
             {"jump_time_rounding", cfg.model.jump_time_rounding ? json(*cfg.model.jump_time_rounding) : json(nullptr)}};
  json prior{{"sigma", interval_json(cfg.prior.sigma)},
             {"b", interval_json(cfg.prior.b)},
             {"lambda", interval_json(cfg.prior.lambda)},
             {"eta", cfg.prior.eta ? interval_json(*cfg.prior.eta) : json(nullptr)}};
  json abc{{"n_pop", cfg.abc.n_pop},
           {"alpha", cfg.abc.alpha},
           {"max_budget", cfg.abc.max_budget},
           {"min_acceptance", cfg.abc.min_acceptance},
           {"n_pilot", cfg.abc.n_pilot},
           {"max_generations", cfg.abc.max_generations ? json(*cfg.abc.max_generations) : json(nullptr)},
           {"weight_rule", weight_rule_name(cfg.abc.weight_rule)}};
  json ergodic{{"t_long", cfg.ergodic.t_long}, {"t_star", cfg.ergodic.t_star}, {"n_rep", cfg.ergodic.n_rep}};
  json out{{"model", model},
           {"observation", observation_mode_name(cfg.observation)},
           {"prior", prior},
           {"abc", abc},
           {"ergodic", ergodic},
           {"seed", cfg.seed},
           {"output", cfg.output}};
  if (cfg.true_params) {
    const auto& p = *cfg.true_params;
    out["true_params"] = {{"sigma", p.sigma}, {"b", p.b}, {"lambda", p.lambda},
                          {"eta", p.eta ? json(*p.eta) : json(nullptr)}};
  } else {
    out["true_params"] = nullptr;
  }
  if (cfg.observed) {
    out["observed"] = {{"path", cfg.observed->path},
                       {"jumps", cfg.observed->jumps ? json(*cfg.observed->jumps) : json(nullptr)}};
  } else {
    out["observed"] = nullptr;
  }
  return out;
}

RunConfig config_from_json(const json& j) {
  reject_unknown(j, "config",
                 {"model", "observation", "true_params", "prior", "abc", "ergodic", "observed", "seed", "output"});
  RunConfig cfg;
  cfg.model = parse_model(j.contains("model") ? j["model"] : json::object());
  if (j.contains("observation")) {
    cfg.observation = parse_observation_mode(get<std::string>(j["observation"], "observation"));
  }
  if (j.contains("true_params") && !j["true_params"].is_null()) cfg.true_params = parse_params(j["true_params"]);
  if (j.contains("prior")) {
    cfg.prior = parse_prior(j["prior"]);
  } else {
    cfg.prior = PriorSettings{};
    if (cfg.model.model == ModelId::TP2_WDSHO) cfg.prior.b = {2.0, 100.0};
    if (cfg.model.model == ModelId::TP4_SwitchedSHO) cfg.prior.b = {0.0, 1.0};
  }
  if (j.contains("abc")) cfg.abc = parse_abc(j["abc"]);
  if (j.contains("ergodic")) cfg.ergodic = parse_ergodic(j["ergodic"]);
  if (j.contains("observed") && !j["observed"].is_null()) {
    const auto& o = j["observed"];
    reject_unknown(o, "observed", {"path", "jumps"});
    if (!o.contains("path")) fail("observed.path is required");
    ObservedFiles files;
    files.path = get<std::string>(o["path"], "observed.path");
    if (o.contains("jumps") && !o["jumps"].is_null()) files.jumps = get<std::string>(o["jumps"], "observed.jumps");
    cfg.observed = files;
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned() && !(j["seed"].is_number_integer() && j["seed"].get<long long>() >= 0)) {
      fail("seed must be a non-negative 64-bit integer");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
  }
  if (j.contains("output")) cfg.output = get<std::string>(j["output"], "output");
  return cfg;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, spec] : presets()) names.push_back(name);
  return names;
}

json preset_json(const std::string& name) {
  const auto& table = presets();
  const auto it = table.find(name);
  if (it == table.end()) {
    std::string list;
    for (const auto& [n, s] : table) list += (list.empty() ? "" : ", ") + n;
    fail("unknown preset '" + name + "' (available: " + list + ")");
  }
  return build_preset(it->second);
}

RunConfig load_config(const std::optional<std::filesystem::path>& file, const std::optional<std::string>& preset) {
  json merged = preset ? preset_json(*preset) : json::object();
  if (file) {
    std::ifstream in(*file);
    if (!in) throw std::runtime_error("cannot open config file " + file->string());
    json overlay;
    try {
      overlay = json::parse(in);
    } catch (const json::parse_error& e) {
      fail("config file " + file->string() + " is not valid JSON: " + e.what());
    }
    require_object(overlay, "config");
    merged.merge_patch(overlay);
  }
  return config_from_json(merged);
}

}  // namespace pdifmp
