#include "pdifmp/commands.hpp"

#include "pdifmp/io.hpp"
#include "pdifmp/simulate.hpp"

namespace pdifmp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path dir(cfg.output);
  fs::create_directories(dir);
  return dir;
}

json manifest(const RunConfig& cfg, const std::string& command) {
  return json{{"command", command}, {"version", kVersion}, {"seed", cfg.seed}, {"config", to_json(cfg)}};
}

}  // namespace

ObservedDataset observed_dataset(const RunConfig& cfg) {
  if (cfg.observed) {
    std::optional<fs::path> jumps;
    if (cfg.observed->jumps) jumps = fs::path(*cfg.observed->jumps);
    return read_observed(cfg.observed->path, jumps, cfg.observation);
  }
  if (!cfg.true_params) throw std::invalid_argument("inference needs true_params or observed files");
  Rng rng(cfg.seed, {kStreamObserved});
  return project_observation(simulate(cfg.model, *cfg.true_params, rng), cfg.observation);
}

HybridPath cmd_simulate(const RunConfig& cfg) {
  cfg.validate();
  if (!cfg.true_params) throw std::invalid_argument("simulate needs a true_params block");
  Rng rng(cfg.seed, {kStreamObserved});
  HybridPath path = simulate(cfg.model, *cfg.true_params, rng);
  const fs::path dir = prepare_output(cfg);
  write_csv(dir / "path.csv", path_table(path));
  write_csv(dir / "jumps.csv", jumps_table(path));
  json m = manifest(cfg, "simulate");
  m["n_points"] = path.size();
  m["n_jumps"] = path.n_jumps;
  write_json(dir / "manifest.json", m);
  return path;
}

InferOutcome cmd_infer(const RunConfig& cfg, std::size_t threads) {
  cfg.validate();
  const Prior prior = cfg.make_prior();
  const ObservedDataset data = observed_dataset(cfg);
  const Problem problem(cfg.model, cfg.observation, summarize(data, cfg.model.step));

  InferOutcome outcome;
  outcome.calibration =
      calibrate_weights(problem, prior, cfg.abc.n_pilot, cfg.seed, threads, cfg.abc.weight_rule);

  SmcConfig smc;
  smc.n_pop = cfg.abc.n_pop;
  smc.alpha = cfg.abc.alpha;
  smc.stop.max_budget = cfg.abc.max_budget;
  smc.stop.min_acceptance = cfg.abc.min_acceptance;
  smc.stop.max_generations = cfg.abc.max_generations;
  smc.seed = cfg.seed;
  smc.threads = threads;
  outcome.smc = smc_abc(problem, prior, outcome.calibration.weights, smc);

  const fs::path dir = prepare_output(cfg);
  write_json(dir / "weights.json",
             weights_json(outcome.calibration.weights, cfg.abc.weight_rule, outcome.calibration.pilot.size()));
  json m = manifest(cfg, "infer");
  m["status"] = smc_status_name(outcome.smc.status);
  m["budget_used"] = outcome.smc.total_budget;
  m["pilot_runs"] = cfg.abc.n_pilot;
  m["observed_n_jumps"] = data.n_jumps;
  if (outcome.smc.status != SmcStatus::NoPopulation) {
    const Population& pop = outcome.smc.final_population;
    const std::size_t dim = pop.dim();
    write_csv(dir / "posterior.csv", posterior_table(pop));
    write_csv(dir / "populations.csv", populations_table(outcome.smc.history));
    write_csv(dir / "ci_trace.csv", ci_trace_table(outcome.smc.trace, dim));
    m["generations"] = pop.generation;
    json report = json::object();
    for (const auto& p : posterior_report(pop).params) {
      report[p.name] = {{"p05", p.ci.p05}, {"median", p.ci.p50}, {"p95", p.ci.p95}};
    }
    m["posterior"] = report;
  }
  write_json(dir / "manifest.json", m);
  return outcome;
}

ErgodicReport cmd_ergodic(const RunConfig& cfg, std::size_t threads) {
  cfg.validate();
  if (!cfg.true_params) throw std::invalid_argument("ergodic needs a true_params block");
  const ErgodicReport r = ergodic_check(cfg.model, *cfg.true_params, cfg.ergodic.t_long, cfg.ergodic.t_star,
                                        cfg.ergodic.n_rep, cfg.seed, threads);
  const fs::path dir = prepare_output(cfg);
  CsvTable t;
  t.header = {"grid", "time_avg", "ensemble"};
  for (std::size_t i = 0; i < r.time_avg_density.grid.size(); ++i) {
    t.rows.push_back({r.time_avg_density.grid[i], r.time_avg_density.values[i], r.ensemble_density.values[i]});
  }
  write_csv(dir / "densities.csv", t);
  json report{{"l1_gap", r.l1_gap},
              {"t_long", cfg.ergodic.t_long},
              {"t_star", r.t_star},
              {"n_replicates", r.n_replicates},
              {"burn_in_fraction", kBurnInFraction},
              {"bandwidth_time_avg", r.time_avg_density.bandwidth},
              {"bandwidth_ensemble", r.ensemble_density.bandwidth}};
  write_json(dir / "report.json", report);
  write_json(dir / "manifest.json", manifest(cfg, "ergodic"));
  return r;
}

SummaryVector cmd_summarize(const fs::path& path_csv, const std::optional<fs::path>& jumps_csv,
                            ObservationMode mode, double h, const fs::path& out) {
  const ObservedDataset d = read_observed(path_csv, jumps_csv, mode);
  SummaryVector s = summarize(d, h);
  fs::create_directories(out);
  write_json(out / "summary.json", summary_json(s));
  return s;
}

}  // namespace pdifmp
