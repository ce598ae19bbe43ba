#include "gridfreq/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace gridfreq {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

GridSpec grid_for(const ExperimentConfig& cfg, double kappa_c) {
  if (cfg.scenario == Scenario::custom) {
    if (!cfg.grid_file) throw std::invalid_argument("custom scenario requires grid_file");
    GridSpec g = load_grid_json(*cfg.grid_file);
    for (std::size_t i = 0; i < g.n; ++i) g.control_gain[i] = 10.0 * kappa_c * g.damping[i];
    return g;
  }
  return build_test_grid(cfg.scenario, kappa_c);
}

WidthPrediction prediction_for(const ExperimentConfig& cfg, double kappa_c) {
  if (cfg.scenario == Scenario::custom) {
    const GridSpec g = grid_for(cfg, kappa_c);
    return cfg.noise.family == NoiseFamily::gaussian ? predict_std(g, cfg.noise)
                                                     : predict_stable_scale(g, cfg.noise);
  }
  return prediction_curve(cfg.scenario, cfg.noise, {kappa_c}).front();
}

}  // namespace

void ExperimentConfig::check() const {
  noise.check();
  if (runs < 2) throw std::invalid_argument("config: need at least 2 runs");
  if (samples_per_run < 2) throw std::invalid_argument("config: need at least 2 samples per run");
  if (kappa_c_grid.empty()) throw std::invalid_argument("config: kappa_c_grid is empty");
  if (!std::is_sorted(kappa_c_grid.begin(), kappa_c_grid.end()))
    throw std::invalid_argument("config: kappa_c_grid must be sorted");
  if (kappa_c_grid.front() < 0.0)
    throw std::invalid_argument("config: kappa_c values must be nonnegative");
  if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
  if (scenario == Scenario::custom && !grid_file)
    throw std::invalid_argument("config: custom scenario requires grid_file");
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  nlohmann::json j;
  in >> j;

  ExperimentConfig cfg;
  cfg.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  const auto& jn = j.at("noise");
  const auto family = jn.at("family").get<std::string>();
  if (family == "gaussian") {
    cfg.noise.family = NoiseFamily::gaussian;
    cfg.noise.alpha = 2.0;
  } else if (family == "stable") {
    cfg.noise.family = NoiseFamily::stable;
    cfg.noise.alpha = jn.at("alpha").get<double>();
  } else {
    throw std::runtime_error("config: noise family must be gaussian or stable");
  }
  if (jn.at("scale").is_array()) {
    cfg.noise.scale = jn.at("scale").get<std::vector<double>>();
  } else {
    cfg.noise.scale = {jn.at("scale").get<double>()};
  }
  cfg.noise.seed = jn.value("seed", std::uint64_t{0});

  cfg.kappa_c_grid = j.at("kappa_c_grid").get<std::vector<double>>();
  cfg.runs = j.value("runs", std::size_t{100});
  cfg.samples_per_run = j.value("samples_per_run", std::size_t{1000});
  cfg.output_dir = j.value("output_dir", std::string{"out"});
  if (j.contains("grid_file")) cfg.grid_file = j.at("grid_file").get<std::string>();
  if (j.contains("stable_fit_method")) {
    const auto m = j.at("stable_fit_method").get<std::string>();
    if (m == "quantile") cfg.stable_fit_method = FitMethod::quantile;
    else if (m == "ecf") cfg.stable_fit_method = FitMethod::ecf;
    else throw std::runtime_error("config: stable_fit_method must be quantile or ecf");
  }
  if (j.contains("sim")) {
    const auto& js = j.at("sim");
    cfg.dt = js.value("dt", 1e-2);
    if (js.contains("steps") || js.contains("burn_in") || js.contains("stride")) {
      SimConfig sc;
      sc.dt = cfg.dt;
      sc.steps = js.at("steps").get<std::size_t>();
      sc.burn_in = js.value("burn_in", std::size_t{0});
      sc.stride = js.value("stride", std::size_t{1});
      cfg.sim_override = sc;
    }
  }
  cfg.threads = j.value("threads", std::size_t{0});
  cfg.check();
  return cfg;
}

std::vector<EnsembleStats> run_sweep(const ExperimentConfig& cfg) {
  cfg.check();
  const std::size_t n_kappa = cfg.kappa_c_grid.size();

  struct Point {
    GridSpec grid;
    SimConfig sim;
    WidthPrediction prediction;
  };
  std::vector<Point> points;
  points.reserve(n_kappa);
  for (double kc : cfg.kappa_c_grid) {
    Point p;
    p.grid = grid_for(cfg, kc);
    const auto violations = validate(p.grid);
    if (!violations.empty())
      throw std::runtime_error("sweep grid invalid at kappa_c=" + fmt(kc) + ": " + violations[0]);
    p.prediction = prediction_for(cfg, kc);
    p.sim = cfg.sim_override.value_or(
        SimConfig::for_samples(effective_gamma(p.grid).bulk, cfg.samples_per_run, cfg.dt));
    points.push_back(std::move(p));
  }

  // One width estimate per (kappa, run); NaN marks a failed run. Run indices
  // are globally unique so every trajectory in the sweep sees an independent
  // noise stream.
  std::vector<std::vector<double>> widths(n_kappa,
                                          std::vector<double>(cfg.runs, std::nan("")));
  std::atomic<std::size_t> cursor{0};
  const std::size_t total = n_kappa * cfg.runs;
  const std::size_t n_threads =
      std::max<std::size_t>(1, cfg.threads ? cfg.threads : std::thread::hardware_concurrency());

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = cursor.fetch_add(1);
      if (idx >= total) return;
      const std::size_t ki = idx / cfg.runs;
      const std::size_t run = idx % cfg.runs;
      try {
        const Trajectory traj =
            simulate(points[ki].grid, cfg.noise, points[ki].sim, idx);
        if (cfg.noise.family == NoiseFamily::gaussian) {
          widths[ki][run] = moments(traj.bulk).std;
        } else {
          widths[ki][run] = fit_stable(traj.bulk, cfg.stable_fit_method).scale;
        }
      } catch (const std::exception&) {
        // failed run: leave NaN, counted below
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i + 1 < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  std::vector<EnsembleStats> results;
  results.reserve(n_kappa);
  for (std::size_t ki = 0; ki < n_kappa; ++ki) {
    EnsembleStats es;
    es.kappa_c = cfg.kappa_c_grid[ki];
    es.kind = points[ki].prediction.kind;
    es.predicted = points[ki].prediction.value;
    es.gamma_eff = points[ki].prediction.gamma_eff;
    double sum = 0.0;
    std::vector<double> ok;
    ok.reserve(cfg.runs);
    for (double w : widths[ki]) {
      if (std::isnan(w)) {
        ++es.runs_failed;
      } else {
        ok.push_back(w);
        sum += w;
      }
    }
    es.runs_ok = ok.size();
    if (es.runs_ok >= 2) {
      es.estimate_mean = sum / static_cast<double>(es.runs_ok);
      double ss = 0.0;
      for (double w : ok) ss += (w - es.estimate_mean) * (w - es.estimate_mean);
      es.estimate_spread = std::sqrt(ss / static_cast<double>(es.runs_ok - 1));
    }
    es.valid = es.runs_failed * 20 <= cfg.runs;  // at most 5% failures
    results.push_back(es);
  }
  return results;
}

FrequencyRecording ingest_recording(const std::string& path, double f_ref) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open recording: " + path);

  FrequencyRecording rec;
  rec.f_ref = f_ref;
  std::string line;
  std::size_t line_no = 0;
  bool saw_data = false;
  while (std::getline(in, line)) {
    ++line_no;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    std::vector<double> cols;
    double v;
    while (ss >> v) cols.push_back(v);
    std::string trailing;
    if (ss.clear(), ss >> trailing; !trailing.empty()) cols.clear();  // non-numeric content
    if (cols.empty()) {
      std::istringstream probe(line);
      std::string tok;
      if (probe >> tok) {
        if (!saw_data && rec.rejected_rows.empty()) continue;  // header line
        rec.rejected_rows.push_back("line " + std::to_string(line_no) + ": non-numeric row");
      }
      continue;
    }
    saw_data = true;
    if (cols.size() == 1) {
      rec.t.push_back(static_cast<double>(rec.f.size()));  // implicit 1 s cadence
      rec.f.push_back(cols[0]);
    } else {
      rec.t.push_back(cols[0]);
      rec.f.push_back(cols[1]);
    }
  }
  if (rec.f.empty()) throw std::runtime_error("recording is empty: " + path);

  rec.omega.resize(rec.f.size());
  for (std::size_t i = 0; i < rec.f.size(); ++i)
    rec.omega[i] = 2.0 * std::numbers::pi * (rec.f[i] - f_ref);

  if (rec.t.size() > 2) {
    std::vector<double> diffs(rec.t.size() - 1);
    for (std::size_t i = 0; i + 1 < rec.t.size(); ++i) diffs[i] = rec.t[i + 1] - rec.t[i];
    std::vector<double> sorted = diffs;
    std::sort(sorted.begin(), sorted.end());
    const double cadence = sorted[sorted.size() / 2];
    for (std::size_t i = 0; i < diffs.size(); ++i)
      if (diffs[i] > 1.5 * cadence) rec.gap_indices.push_back(i);
  }
  return rec;
}

AnalysisReport analyze_recording(const FrequencyRecording& rec) {
  if (rec.omega.size() < 10'000)
    throw std::invalid_argument("analyze_recording: need at least 1e4 samples");
  const double dt = rec.t.size() > 1 ? rec.t[1] - rec.t[0] : 1.0;

  AnalysisReport rep;
  rep.stats = moments(rec.omega);
  rep.gaussian_mean = rep.stats.mean;
  rep.gaussian_std = rep.stats.std;

  // ACF long enough to fit the exponential decay down to c = 0.1; cap the
  // window so short recordings stay within the length precondition.
  const double max_lag = std::min(100.0 * dt * 30.0,
                                  dt * static_cast<double>(rec.omega.size() / 2 - 1));
  rep.acf = autocorrelation(rec.omega, dt, std::min(max_lag, 200.0));
  rep.gamma = fit_gamma(rep.acf);

  rep.stable_quantile = fit_stable(rec.omega, FitMethod::quantile);
  rep.stable_ecf = fit_stable(rec.omega, FitMethod::ecf);
  rep.extraction = extract_power_distribution(rec.omega, rep.gamma.gamma);
  return rep;
}

namespace {

void write_two_column(const std::string& path, const std::vector<double>& a,
                      const std::vector<double>& b) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  for (std::size_t i = 0; i < a.size(); ++i) out << fmt(a[i]) << ' ' << fmt(b[i]) << '\n';
}

nlohmann::ordered_json fit_json(const StableFit& f) {
  nlohmann::ordered_json j;
  j["method"] = to_string(f.method);
  j["alpha"] = f.alpha;
  j["beta"] = f.beta;
  j["scale"] = f.scale;
  j["location"] = f.location;
  return j;
}

}  // namespace

void write_analysis(const AnalysisReport& rep, const std::string& out_dir) {
  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_two_column((dir / "acf.txt").string(), rep.acf.lags, rep.acf.values);
  write_two_column((dir / "power_density_fitted.txt").string(), rep.extraction.power_density.x,
                   rep.extraction.power_density.p);
  write_two_column((dir / "power_density_empirical.txt").string(),
                   rep.extraction.power_density_empirical.x,
                   rep.extraction.power_density_empirical.p);

  nlohmann::ordered_json j;
  j["n_samples"] = rep.stats.n;
  j["mean"] = rep.stats.mean;
  j["std"] = rep.stats.std;
  if (rep.stats.kurtosis) j["kurtosis"] = *rep.stats.kurtosis;
  j["gamma_fit"] = {{"gamma", rep.gamma.gamma},
                    {"r_squared", rep.gamma.r_squared},
                    {"lags_used", rep.gamma.lags_used}};
  j["gaussian_fit"] = {{"mean", rep.gaussian_mean}, {"std", rep.gaussian_std}};
  j["stable_fit_quantile"] = fit_json(rep.stable_quantile);
  j["stable_fit_ecf"] = fit_json(rep.stable_ecf);
  j["power_fit"] = fit_json(rep.extraction.power_fit);
  std::ofstream out(dir / "report.json");
  if (!out) throw std::runtime_error("cannot write analysis report");
  out << j.dump(2) << '\n';
}

std::vector<std::string> emit_outputs(const std::vector<EnsembleStats>& results,
                                      const ExperimentConfig& cfg, const std::string& out_dir) {
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path dir(out_dir);
  {
    std::ofstream probe(dir / ".write_probe");
    if (!probe) throw std::runtime_error("output directory is not writable: " + out_dir);
  }
  fs::remove(dir / ".write_probe");

  std::vector<std::string> files;
  const fs::path sweep_path = dir / "sweep.csv";
  {
    std::ofstream out(sweep_path);
    if (!out) throw std::runtime_error("cannot write: " + sweep_path.string());
    out << "kappa_c,estimate_mean,estimate_spread,predicted,gamma_eff,kind,runs_ok,"
           "runs_failed,valid\n";
    for (const auto& r : results) {
      out << fmt(r.kappa_c) << ',' << fmt(r.estimate_mean) << ',' << fmt(r.estimate_spread)
          << ',' << fmt(r.predicted) << ',' << fmt(r.gamma_eff) << ',' << to_string(r.kind)
          << ',' << r.runs_ok << ',' << r.runs_failed << ',' << (r.valid ? 1 : 0) << '\n';
    }
  }
  files.push_back(sweep_path.string());

  nlohmann::ordered_json j;
  j["scenario"] = to_string(cfg.scenario);
  j["noise"] = {{"family", cfg.noise.family == NoiseFamily::gaussian ? "gaussian" : "stable"},
                {"alpha", cfg.noise.effective_alpha()},
                {"scale", cfg.noise.scale},
                {"seed", cfg.noise.seed}};
  j["noise_digest"] = noise_digest(cfg.noise);
  j["kappa_c_grid"] = cfg.kappa_c_grid;
  j["runs"] = cfg.runs;
  j["samples_per_run"] = cfg.samples_per_run;
  j["dt"] = cfg.dt;
  j["stable_fit_method"] = to_string(cfg.stable_fit_method);
  {
    // digest over the canonical config echo above
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
    std::ostringstream hex;
    hex << std::hex << h;
    j["config_digest"] = hex.str();
  }
  auto files_json = nlohmann::ordered_json::array();
  for (const auto& f : files) files_json.push_back(fs::path(f).filename().string());
  j["files"] = files_json;
  const fs::path manifest_path = dir / "manifest.json";
  {
    std::ofstream out(manifest_path);
    if (!out) throw std::runtime_error("cannot write: " + manifest_path.string());
    out << j.dump(2) << '\n';
  }
  files.push_back(manifest_path.string());
  return files;
}

}  // namespace gridfreq
