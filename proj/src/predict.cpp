#include "gridfreq/predict.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <stdexcept>

namespace gridfreq {

std::string to_string(WidthKind kind) {
  return kind == WidthKind::std_dev ? "std" : "stable_scale";
}

double aggregate_gaussian_amplitude(const GridSpec& grid, const NoiseSpec& noise) {
  if (noise.effective_alpha() != 2.0)
    throw std::invalid_argument("aggregate_gaussian_amplitude: noise is not Gaussian");
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double sigma_p = std::numbers::sqrt2 * noise.scale_at(i);
    sum_sq += sigma_p * sigma_p;
  }
  return std::sqrt(sum_sq) / grid.total_inertia();
}

WidthPrediction predict_std(const GridSpec& grid, const NoiseSpec& noise) {
  const auto eg = effective_gamma(grid);
  WidthPrediction p;
  p.kind = WidthKind::std_dev;
  p.gamma_eff = eg.bulk;
  p.approximate = !eg.uniform;
  p.value = aggregate_gaussian_amplitude(grid, noise) / std::sqrt(2.0 * eg.bulk);
  p.inputs_digest = grid_digest(grid) + ":" + noise_digest(noise);
  return p;
}

WidthPrediction predict_stable_scale(const GridSpec& grid, const NoiseSpec& noise) {
  const double alpha = noise.effective_alpha();
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("predict_stable_scale: alpha must be in (0, 2]");
  const auto eg = effective_gamma(grid);
  double sum_pow = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) sum_pow += std::pow(noise.scale_at(i), alpha);
  WidthPrediction p;
  p.kind = WidthKind::stable_scale;
  p.gamma_eff = eg.bulk;
  p.approximate = !eg.uniform;
  p.value = std::pow(sum_pow / (eg.bulk * alpha), 1.0 / alpha) /
            (std::numbers::sqrt2 * grid.total_inertia());
  p.inputs_digest = grid_digest(grid) + ":" + noise_digest(noise);
  return p;
}

std::vector<double> predict_autocorrelation(double gamma_eff, const std::vector<double>& lags) {
  if (!(gamma_eff > 0.0))
    throw std::invalid_argument("predict_autocorrelation: gamma_eff must be positive");
  std::vector<double> c;
  c.reserve(lags.size());
  for (double lag : lags) {
    if (lag < 0.0) throw std::invalid_argument("predict_autocorrelation: negative lag");
    c.push_back(std::exp(-gamma_eff * lag));
  }
  return c;
}

std::vector<WidthPrediction> prediction_curve(Scenario scenario, const NoiseSpec& noise,
                                              const std::vector<double>& kappa_c_grid) {
  const WidthKind kind =
      noise.family == NoiseFamily::gaussian ? WidthKind::std_dev : WidthKind::stable_scale;
  std::vector<WidthPrediction> curve;
  curve.reserve(kappa_c_grid.size());
  for (double kc : kappa_c_grid) {
    if (scenario == Scenario::generator_only) {
      // Only half the network is controlled; the prediction substitutes
      // kappa_c / 2 into the homogeneous gain rule instead of using the
      // grid's own gamma_eff.
      GridSpec pred_grid = build_test_grid(Scenario::generator_only, 0.0);
      for (std::size_t i = 0; i < pred_grid.n; ++i)
        pred_grid.control_gain[i] = 10.0 * (kc / 2.0) * pred_grid.damping[i];
      auto p = kind == WidthKind::std_dev ? predict_std(pred_grid, noise)
                                          : predict_stable_scale(pred_grid, noise);
      curve.push_back(p);
    } else {
      const GridSpec grid = build_test_grid(scenario, kc);
      curve.push_back(kind == WidthKind::std_dev ? predict_std(grid, noise)
                                                 : predict_stable_scale(grid, noise));
    }
  }
  return curve;
}

void write_prediction_csv(const std::vector<double>& kappa_c_grid,
                          const std::vector<WidthPrediction>& curve, const std::string& path) {
  if (kappa_c_grid.size() != curve.size())
    throw std::invalid_argument("write_prediction_csv: size mismatch");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write prediction table: " + path);
  out << "kappa_c,predicted_width,gamma_eff,kind\n";
  char buf[96];
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%s\n", kappa_c_grid[i], curve[i].value,
                  curve[i].gamma_eff, to_string(curve[i].kind).c_str());
    out << buf;
  }
}

}  // namespace gridfreq
