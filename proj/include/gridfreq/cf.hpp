#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <vector>

#include "gridfreq/stable_fit.hpp"

namespace gridfreq {

/// Characteristic function tabulated on a symmetric, uniformly spaced
/// wavenumber grid that includes 0. Values are Hermitian with value(0) = 1.
struct CharFn {
  std::vector<double> k;
  std::vector<std::complex<double>> val;
  std::optional<double> gamma;  // damping ratio the transform used, if any

  void check() const;  // throws std::invalid_argument on invariant breach
  bool real_nonnegative(double tol = 1e-12) const;
};

/// 2 * n_half + 1 uniformly spaced wavenumbers on [-k_max, k_max].
std::vector<double> symmetric_k_grid(double k_max, std::size_t n_half);

/// exp(-(scale * |k|)^alpha) on the given grid.
CharFn make_stable_cf(double alpha, double scale, const std::vector<double>& k_grid);

/// Bulk-velocity CF from the power-noise CF,
/// S_w(k) = exp[(1/gamma) * int_0^k ln(S_P(z)) / z dz]. The quadrature treats
/// each cell as a local power law in -ln S_P, which also covers the z -> 0
/// singularity of the integrand for alpha <= 1.
CharFn omega_cf_from_power_cf(const CharFn& power_cf, double gamma);

/// Power-noise CF from the bulk-velocity CF,
/// S_P(k) = exp[gamma * k * d/dk ln(S_w(k))], centered differences (log-log
/// where the CF is real), one-sided at the grid ends.
CharFn power_cf_from_omega_cf(const CharFn& omega_cf, double gamma);

struct Density {
  std::vector<double> x;
  std::vector<double> p;
  double min_value = 0.0;  // most negative tabulated value
  bool ringing = false;    // set when min_value < -1e-4
};

/// Inverse-Fourier quadrature of a CF; requires |CF| < 1e-6 at the grid edge.
Density pdf_from_cf(const CharFn& cf, const std::vector<double>& x_grid);

std::vector<double> linspace(double lo, double hi, std::size_t count);

struct ExtractionGrids {
  std::size_t n_k_half = 2048;   // half grid; full grid has 2 * n_k_half + 1 points
  std::size_t n_x = 2001;
  double x_half_width = 0.0;     // 0 = choose from the recovered scale
  double cf_edge_target = 1e-6;  // |CF(k_max)| aimed for when sizing the grid
};

struct PowerExtraction {
  StableFit omega_fit;              // fit of the input velocity series
  StableFit power_fit;              // implied stable parameters of the power noise
  CharFn power_cf;                  // transformed fitted CF
  Density power_density;            // density from the fitted route
  Density power_density_empirical;  // density from the hybrid-smoothed empirical CF
};

/// Recording pipeline: fit the velocity series, transform the fitted CF to
/// the power-noise CF, invert to a density; the same transform also runs on
/// the hybrid-smoothed empirical CF for a data-direct comparison.
PowerExtraction extract_power_distribution(const std::vector<double>& omega_series,
                                           double gamma, const ExtractionGrids& grids = {});

}  // namespace gridfreq
