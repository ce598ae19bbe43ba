#pragma once

#include <string>
#include <vector>

#include "gridfreq/grid.hpp"
#include "gridfreq/noise.hpp"

namespace gridfreq {

enum class WidthKind { std_dev, stable_scale };

std::string to_string(WidthKind kind);

/// Closed-form stationary width of the bulk angular velocity. `approximate`
/// is set when the per-node damping-to-inertia ratios are not uniform, where
/// the formula only holds for the averaged ratio.
struct WidthPrediction {
  WidthKind kind = WidthKind::std_dev;
  double value = 0.0;      // s^-1
  double gamma_eff = 0.0;  // s^-1
  bool approximate = false;
  std::string inputs_digest;
};

/// Aggregated Gaussian white-noise amplitude sqrt(sum sigma_P^2) / sum M with
/// sigma_P = sqrt(2) * sigma_S. Rejects non-Gaussian noise.
double aggregate_gaussian_amplitude(const GridSpec& grid, const NoiseSpec& noise);

/// Stationary standard deviation sigma_P_bar / sqrt(2 gamma_eff).
WidthPrediction predict_std(const GridSpec& grid, const NoiseSpec& noise);

/// Stationary stable scale
/// (1 / (sqrt(2) sum M)) * [sum sigma_S^alpha / (gamma_eff alpha)]^(1/alpha).
WidthPrediction predict_stable_scale(const GridSpec& grid, const NoiseSpec& noise);

/// exp(-gamma_eff * lag) per lag.
std::vector<double> predict_autocorrelation(double gamma_eff, const std::vector<double>& lags);

/// Width prediction per sweep value. The generator-only scenario substitutes
/// kappa_c / 2 into the homogeneous gain rule, since only half the network is
/// controlled; heterogeneous damping uses the ratio of summed damping to
/// summed inertia and is flagged approximate.
std::vector<WidthPrediction> prediction_curve(Scenario scenario, const NoiseSpec& noise,
                                              const std::vector<double>& kappa_c_grid);

/// CSV columns: kappa_c, predicted_width, gamma_eff, kind.
void write_prediction_csv(const std::vector<double>& kappa_c_grid,
                          const std::vector<WidthPrediction>& curve, const std::string& path);

}  // namespace gridfreq
