#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridfreq/cf.hpp"
#include "gridfreq/stable_fit.hpp"

namespace gridfreq {

struct Moments {
  double mean = 0.0;
  double std = 0.0;                 // n-1 normalization
  std::optional<double> kurtosis;   // raw m4 / m2^2, absent for zero variance
  std::size_t n = 0;
};

Moments moments(std::span<const double> series);

/// Sample autocorrelation of the mean-removed series, biased (1/N) estimator.
struct AcfCurve {
  std::vector<double> lags;    // seconds
  std::vector<double> values;  // values[0] == 1
  std::vector<std::size_t> n_samples;
  double dt = 0.0;
};

AcfCurve autocorrelation(std::span<const double> series, double dt, double max_lag);

struct GammaFit {
  double gamma = 0.0;
  double r_squared = 0.0;
  std::size_t lags_used = 0;
};

/// Damping-to-inertia ratio from the exponential ACF decay: least squares on
/// ln c over positive lags with c > 0.1.
GammaFit fit_gamma(const AcfCurve& acf);

/// quantile: McCulloch's tabulated quantile estimator (needs >= 500 points);
/// ecf: characteristic-function regression refining the quantile start.
StableFit fit_stable(std::span<const double> series, FitMethod method = FitMethod::quantile);

/// (1/N) sum exp(i k x_j) on a symmetric grid; exact 1 at k = 0 and Hermitian
/// by construction.
CharFn empirical_cf(std::span<const double> series, const std::vector<double>& k_grid);

/// Linearly interpolated quantile at the (i + 0.5) / n positions of the
/// sorted sample.
double sample_quantile(std::span<const double> sorted, double p);

}  // namespace gridfreq
