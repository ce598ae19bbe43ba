#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gridfreq/experiment.hpp"

namespace {

using namespace gridfreq;

int run_sweep_cmd(const std::string& config_path, const std::string& out_override,
                  std::uint64_t seed, bool seed_set, const std::string& scenario_override,
                  double alpha_override, std::size_t runs_override, std::size_t samples_override,
                  bool check) {
  ExperimentConfig cfg = load_experiment_config(config_path);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (seed_set) cfg.noise.seed = seed;
  if (!scenario_override.empty()) cfg.scenario = scenario_from_string(scenario_override);
  if (alpha_override > 0.0) {
    cfg.noise.family = alpha_override == 2.0 ? NoiseFamily::gaussian : NoiseFamily::stable;
    cfg.noise.alpha = alpha_override;
  }
  if (runs_override > 0) cfg.runs = runs_override;
  if (samples_override > 0) cfg.samples_per_run = samples_override;
  cfg.check();

  const auto results = run_sweep(cfg);
  const auto files = emit_outputs(results, cfg, cfg.output_dir);
  for (const auto& f : files) std::cout << "wrote " << f << '\n';

  bool breached = false;
  for (const auto& r : results) {
    std::printf("kappa_c=%-6g width=%.6g +- %.6g predicted=%.6g (%s, %zu/%zu runs)\n",
                r.kappa_c, r.estimate_mean, r.estimate_spread, r.predicted,
                to_string(r.kind).c_str(), r.runs_ok, r.runs_ok + r.runs_failed);
    if (!r.valid || std::abs(r.estimate_mean - r.predicted) > 2.0 * r.estimate_spread)
      breached = true;
  }
  if (check && breached) {
    std::cerr << "sweep deviates from prediction beyond 2 x spread\n";
    return 3;
  }
  return 0;
}

int run_analyze_cmd(const std::string& input, double f_ref, const std::string& out_dir) {
  const FrequencyRecording rec = ingest_recording(input, f_ref);
  if (!rec.rejected_rows.empty()) {
    for (const auto& msg : rec.rejected_rows) std::cerr << "warning: " << msg << '\n';
  }
  if (!rec.gap_indices.empty())
    std::cerr << "warning: " << rec.gap_indices.size() << " sampling gap(s) detected\n";
  const AnalysisReport rep = analyze_recording(rec);
  write_analysis(rep, out_dir);
  std::printf("samples: %zu\n", rep.stats.n);
  std::printf("std: %.6g, kurtosis: %.4g\n", rep.stats.std,
              rep.stats.kurtosis ? *rep.stats.kurtosis : 0.0);
  std::printf("gamma: %.6g (R^2 %.4f)\n", rep.gamma.gamma, rep.gamma.r_squared);
  std::printf("stable fit (ecf): alpha=%.4g scale=%.6g\n", rep.stable_ecf.alpha,
              rep.stable_ecf.scale);
  std::printf("implied power noise: alpha=%.4g scale=%.6g\n", rep.extraction.power_fit.alpha,
              rep.extraction.power_fit.scale);
  std::cout << "report written to " << out_dir << '\n';
  return 0;
}

int run_predict_cmd(const std::string& scenario, double alpha, double scale,
                    std::vector<double> kappa, const std::string& out_path) {
  NoiseSpec noise;
  if (alpha == 2.0) {
    noise.family = NoiseFamily::gaussian;
    noise.alpha = 2.0;
  } else {
    noise.family = NoiseFamily::stable;
    noise.alpha = alpha;
  }
  noise.scale = {scale};
  const auto sc = scenario_from_string(scenario);
  const auto curve = prediction_curve(sc, noise, kappa);
  if (!out_path.empty()) {
    write_prediction_csv(kappa, curve, out_path);
    std::cout << "wrote " << out_path << '\n';
  }
  std::printf("kappa_c,predicted_width,gamma_eff,kind\n");
  for (std::size_t i = 0; i < curve.size(); ++i)
    std::printf("%g,%.8g,%.8g,%s\n", kappa[i], curve[i].value, curve[i].gamma_eff,
                to_string(curve[i].kind).c_str());
  return 0;
}

int run_grid_validate_cmd(const std::string& grid_path, const std::string& scenario,
                          double kappa_c) {
  GridSpec grid;
  if (!grid_path.empty()) {
    grid = load_grid_json(grid_path);
  } else {
    grid = build_test_grid(scenario_from_string(scenario), kappa_c);
  }
  const auto violations = validate(grid);
  if (violations.empty()) {
    const auto eg = effective_gamma(grid);
    std::printf("ok: %zu nodes, gamma_eff=%.6g (%s)\n", grid.n, eg.bulk,
                eg.uniform ? "uniform" : "heterogeneous");
    return 0;
  }
  for (const auto& v : violations) std::cout << "violation: " << v << '\n';
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic power-grid frequency simulator and analysis toolkit"};
  app.require_subcommand(1);

  // sweep options (overrides apply on top of the config file)
  std::string sweep_config, sweep_out, sweep_scenario;
  std::uint64_t sweep_seed = 0;
  double sweep_alpha = 0.0;
  std::size_t sweep_runs = 0, sweep_samples = 0;
  bool sweep_check = false;

  auto* sweep = app.add_subcommand("sweep", "run a control-gain ensemble sweep");
  sweep->add_option("--config", sweep_config, "experiment config JSON")->required();
  sweep->add_option("--out", sweep_out, "output directory override");
  auto* seed_opt = sweep->add_option("--seed", sweep_seed, "master seed override");
  sweep->add_option("--scenario", sweep_scenario, "scenario override");
  sweep->add_option("--alpha", sweep_alpha, "noise alpha override (2 = gaussian)");
  sweep->add_option("--runs", sweep_runs, "runs per sweep point override");
  sweep->add_option("--samples", sweep_samples, "samples per run override");
  sweep->add_flag("--check", sweep_check, "exit 3 when estimates leave the 2 x spread band");

  std::string analyze_input, analyze_out;
  double f_ref = 50.0;
  auto* analyze = app.add_subcommand("analyze", "analyze a frequency recording");
  analyze->add_option("--input", analyze_input, "recording file (t,f rows or f column)")
      ->required();
  analyze->add_option("--fref", f_ref, "reference frequency, Hz");
  analyze->add_option("--out", analyze_out, "output directory")->required();

  std::string predict_scenario = "homogeneous", predict_out;
  double predict_alpha = 2.0, predict_scale = 0.01;
  std::vector<double> kappa_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5,
                                    0.6, 0.7, 0.8, 0.9, 1.0};
  auto* predict = app.add_subcommand("predict", "closed-form width predictions");
  predict->add_option("--scenario", predict_scenario, "scenario");
  predict->add_option("--alpha", predict_alpha, "stability parameter (2 = gaussian)");
  predict->add_option("--scale", predict_scale, "per-node noise scale sigma_S");
  predict->add_option("--kappa", kappa_grid, "kappa_c sweep values");
  predict->add_option("--out", predict_out, "CSV output path");

  std::string grid_path, grid_scenario = "homogeneous";
  double grid_kappa_c = 0.0;
  auto* grid = app.add_subcommand("grid", "grid utilities");
  auto* grid_validate = grid->add_subcommand("validate", "check grid invariants");
  grid_validate->add_option("--config", grid_path, "grid JSON file");
  grid_validate->add_option("--scenario", grid_scenario, "preset scenario");
  grid_validate->add_option("--kappa-c", grid_kappa_c, "control parameter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sweep->parsed()) {
      return run_sweep_cmd(sweep_config, sweep_out, sweep_seed, !seed_opt->empty(),
                           sweep_scenario, sweep_alpha, sweep_runs, sweep_samples,
                           sweep_check);
    }
    if (analyze->parsed()) return run_analyze_cmd(analyze_input, f_ref, analyze_out);
    if (predict->parsed())
      return run_predict_cmd(predict_scenario, predict_alpha, predict_scale, kappa_grid,
                             predict_out);
    if (grid->parsed() && grid_validate->parsed())
      return run_grid_validate_cmd(grid_path, grid_scenario, grid_kappa_c);
    std::cerr << app.help();
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
