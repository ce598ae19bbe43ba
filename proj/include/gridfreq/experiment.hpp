#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridfreq/cf.hpp"
#include "gridfreq/grid.hpp"
#include "gridfreq/noise.hpp"
#include "gridfreq/predict.hpp"
#include "gridfreq/sde.hpp"
#include "gridfreq/stats.hpp"

namespace gridfreq {

/// Full sweep description; the JSON schema mirrors the fields. `grid_file`
/// supplies the network for the custom scenario, where the sweep applies the
/// gain rule kappa_C_i = 10 * kappa_c * kappa_D_i to the loaded grid.
struct ExperimentConfig {
  Scenario scenario = Scenario::homogeneous;
  NoiseSpec noise;
  std::vector<double> kappa_c_grid;
  std::size_t runs = 100;
  std::size_t samples_per_run = 1000;
  double dt = 1e-2;
  std::optional<SimConfig> sim_override;  // full control over steps/burn-in/stride
  std::string output_dir = "out";
  std::optional<std::string> grid_file;
  FitMethod stable_fit_method = FitMethod::quantile;
  std::size_t threads = 0;  // 0 = hardware concurrency

  void check() const;
};

ExperimentConfig load_experiment_config(const std::string& path);

/// Per-control-gain ensemble summary; spread is the standard deviation of the
/// per-run width estimates across runs.
struct EnsembleStats {
  double kappa_c = 0.0;
  double estimate_mean = 0.0;
  double estimate_spread = 0.0;
  double predicted = 0.0;
  double gamma_eff = 0.0;
  WidthKind kind = WidthKind::std_dev;
  std::size_t runs_ok = 0;
  std::size_t runs_failed = 0;
  bool valid = false;  // false when more than 5% of runs failed
};

/// Runs `runs` independent trajectories per sweep value and aggregates the
/// per-run width estimates. Fully deterministic in (config, seed); individual
/// run failures are counted, not fatal.
std::vector<EnsembleStats> run_sweep(const ExperimentConfig& config);

struct FrequencyRecording {
  std::vector<double> t;      // seconds
  std::vector<double> f;      // Hz
  std::vector<double> omega;  // 2 pi (f - f_ref)
  double f_ref = 50.0;
  std::vector<std::string> rejected_rows;  // "line N: ..." diagnostics
  std::vector<std::size_t> gap_indices;    // sample index before each gap
};

/// Reads a frequency recording: `t,f` rows or a single `f` column at 1 s
/// cadence, comma or whitespace separated, optional header line.
FrequencyRecording ingest_recording(const std::string& path, double f_ref = 50.0);

struct AnalysisReport {
  Moments stats;
  AcfCurve acf;
  GammaFit gamma;
  double gaussian_mean = 0.0;
  double gaussian_std = 0.0;
  StableFit stable_quantile;
  StableFit stable_ecf;
  PowerExtraction extraction;
};

/// The recording pipeline: moments and kurtosis, ACF with exponential gamma
/// fit, Gaussian and stable fits, and the extracted power-noise distribution.
AnalysisReport analyze_recording(const FrequencyRecording& rec);

void write_analysis(const AnalysisReport& report, const std::string& out_dir);

/// Writes sweep CSV, prediction table and manifest into out_dir; returns the
/// file list. Byte-identical for identical inputs.
std::vector<std::string> emit_outputs(const std::vector<EnsembleStats>& results,
                                      const ExperimentConfig& config,
                                      const std::string& out_dir);

}  // namespace gridfreq
