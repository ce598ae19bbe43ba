#include "gridfreq/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace gridfreq {

namespace {

// McCulloch's quantile-estimator tables (Commun. Stat. Simul. 15, 1986).
// nu_alpha = (x95 - x05) / (x75 - x25), nu_beta = (x95 + x05 - 2 x50) / (x95 - x05).
const std::vector<double> kNuAlphaGrid = {2.439, 2.5, 2.6, 2.7, 2.8, 3.0, 3.2, 3.5,
                                          4.0,   5.0, 6.0, 8.0, 10., 15., 25.};
const std::vector<double> kNuBetaGrid = {0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0};

const double kAlphaTable[15][7] = {
    {2.000, 2.000, 2.000, 2.000, 2.000, 2.000, 2.000},
    {1.916, 1.924, 1.924, 1.924, 1.924, 1.924, 1.924},
    {1.808, 1.813, 1.829, 1.829, 1.829, 1.829, 1.829},
    {1.729, 1.730, 1.737, 1.745, 1.745, 1.745, 1.745},
    {1.664, 1.663, 1.663, 1.668, 1.676, 1.676, 1.676},
    {1.563, 1.560, 1.553, 1.548, 1.547, 1.547, 1.547},
    {1.484, 1.480, 1.471, 1.460, 1.448, 1.438, 1.438},
    {1.391, 1.386, 1.378, 1.364, 1.337, 1.318, 1.318},
    {1.279, 1.273, 1.266, 1.250, 1.210, 1.184, 1.150},
    {1.128, 1.121, 1.114, 1.101, 1.067, 1.027, 0.973},
    {1.029, 1.021, 1.014, 1.004, 0.974, 0.935, 0.874},
    {0.896, 0.892, 0.887, 0.883, 0.855, 0.823, 0.769},
    {0.818, 0.812, 0.806, 0.801, 0.780, 0.756, 0.691},
    {0.698, 0.695, 0.692, 0.689, 0.676, 0.656, 0.595},
    {0.593, 0.590, 0.588, 0.586, 0.579, 0.563, 0.513}};

const double kBetaTable[15][7] = {
    {0.0, 2.160, 1.000, 1.000, 1.000, 1.000, 1.000},
    {0.0, 1.592, 3.390, 1.000, 1.000, 1.000, 1.000},
    {0.0, 0.759, 1.800, 1.000, 1.000, 1.000, 1.000},
    {0.0, 0.482, 1.048, 1.694, 1.000, 1.000, 1.000},
    {0.0, 0.360, 0.760, 1.232, 2.229, 1.000, 1.000},
    {0.0, 0.253, 0.518, 0.823, 1.575, 1.000, 1.000},
    {0.0, 0.203, 0.410, 0.632, 1.244, 1.906, 1.000},
    {0.0, 0.165, 0.332, 0.499, 0.943, 1.560, 1.000},
    {0.0, 0.136, 0.271, 0.404, 0.689, 1.230, 2.195},
    {0.0, 0.109, 0.216, 0.323, 0.539, 0.827, 1.917},
    {0.0, 0.096, 0.190, 0.284, 0.472, 0.693, 1.759},
    {0.0, 0.082, 0.163, 0.243, 0.412, 0.601, 1.596},
    {0.0, 0.074, 0.147, 0.220, 0.377, 0.546, 1.482},
    {0.0, 0.064, 0.128, 0.191, 0.330, 0.478, 1.362},
    {0.0, 0.056, 0.112, 0.167, 0.285, 0.428, 1.274}};

// Phi3(alpha, |beta|) = (x75 - x25) / scale.
const std::vector<double> kPhi3AlphaGrid = {2.0, 1.9, 1.8, 1.7, 1.6, 1.5, 1.4, 1.3,
                                            1.2, 1.1, 1.0, 0.9, 0.8, 0.7, 0.6, 0.5};
const std::vector<double> kPhi3BetaGrid = {0.0, 0.25, 0.5, 0.75, 1.0};

const double kPhi3Table[16][5] = {
    {1.908, 1.908, 1.908, 1.908, 1.908}, {1.914, 1.915, 1.916, 1.918, 1.921},
    {1.921, 1.922, 1.927, 1.936, 1.947}, {1.927, 1.930, 1.943, 1.961, 1.987},
    {1.933, 1.940, 1.962, 1.997, 2.043}, {1.939, 1.952, 1.988, 2.045, 2.116},
    {1.946, 1.967, 2.022, 2.106, 2.211}, {1.955, 1.984, 2.067, 2.188, 2.333},
    {1.965, 2.007, 2.125, 2.294, 2.491}, {1.980, 2.040, 2.205, 2.435, 2.696},
    {2.000, 2.085, 2.311, 2.624, 2.973}, {2.040, 2.149, 2.461, 2.886, 3.356},
    {2.098, 2.244, 2.676, 3.265, 3.912}, {2.189, 2.392, 3.004, 3.844, 4.775},
    {2.337, 2.634, 3.542, 4.808, 6.247}, {2.588, 3.073, 4.534, 6.636, 9.144}};

std::size_t bracket(const std::vector<double>& grid, double v) {
  // index of the left cell edge; grid may be increasing or decreasing
  const bool inc = grid.back() > grid.front();
  std::size_t lo = 0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
    if (inc ? (v >= grid[i]) : (v <= grid[i])) lo = i;
  }
  return lo;
}

template <typename Table>
double bilinear(const std::vector<double>& rows, const std::vector<double>& cols,
                const Table& table, double r, double c) {
  r = std::clamp(r, std::min(rows.front(), rows.back()), std::max(rows.front(), rows.back()));
  c = std::clamp(c, std::min(cols.front(), cols.back()), std::max(cols.front(), cols.back()));
  const std::size_t i = bracket(rows, r);
  const std::size_t j = bracket(cols, c);
  const double tr = (r - rows[i]) / (rows[i + 1] - rows[i]);
  const double tc = (c - cols[j]) / (cols[j + 1] - cols[j]);
  return (1 - tr) * ((1 - tc) * table[i][j] + tc * table[i][j + 1]) +
         tr * ((1 - tc) * table[i + 1][j] + tc * table[i + 1][j + 1]);
}

StableFit fit_stable_quantile(std::span<const double> series) {
  std::vector<double> sorted(series.begin(), series.end());
  std::sort(sorted.begin(), sorted.end());
  const double x05 = sample_quantile(sorted, 0.05);
  const double x25 = sample_quantile(sorted, 0.25);
  const double x50 = sample_quantile(sorted, 0.50);
  const double x75 = sample_quantile(sorted, 0.75);
  const double x95 = sample_quantile(sorted, 0.95);
  const double iqr = x75 - x25;
  const double span = x95 - x05;
  if (!(iqr > 0.0) || !(span > 0.0))
    throw std::runtime_error("fit_stable: degenerate sample (zero spread)");

  const double nu_alpha = std::clamp(span / iqr, kNuAlphaGrid.front(), kNuAlphaGrid.back());
  const double nu_beta_signed = (x95 + x05 - 2.0 * x50) / span;
  const double nu_beta = std::min(std::abs(nu_beta_signed), 1.0);

  StableFit fit;
  fit.method = FitMethod::quantile;
  fit.alpha = std::clamp(bilinear(kNuAlphaGrid, kNuBetaGrid, kAlphaTable, nu_alpha, nu_beta),
                         0.5, 2.0);
  double beta = bilinear(kNuAlphaGrid, kNuBetaGrid, kBetaTable, nu_alpha, nu_beta);
  beta = std::clamp(beta, -1.0, 1.0) * (nu_beta_signed < 0 ? -1.0 : 1.0);
  fit.beta = fit.alpha >= 2.0 ? 0.0 : beta;
  const double phi3 =
      bilinear(kPhi3AlphaGrid, kPhi3BetaGrid, kPhi3Table, fit.alpha, std::abs(fit.beta));
  fit.scale = iqr / phi3;
  // Symmetric convention: the median locates the law (beta ~ 0 throughout
  // this toolkit, so no median-shift correction is applied).
  fit.location = x50;
  return fit;
}

// Empirical CF at isolated wavenumbers of the centered sample.
std::complex<double> ecf_at(std::span<const double> series, double k, double center) {
  double re = 0.0, im = 0.0;
  for (double x : series) {
    re += std::cos(k * (x - center));
    im += std::sin(k * (x - center));
  }
  const double n = static_cast<double>(series.size());
  return {re / n, im / n};
}

StableFit fit_stable_ecf(std::span<const double> series) {
  StableFit fit = fit_stable_quantile(series);
  const double center = fit.location;

  // Koutrouvelis-style regression: ln(-ln|phi|^2) = ln(2 c^alpha) + alpha ln k,
  // sampled where the fitted CF is well away from both 1 and the noise floor.
  for (int pass = 0; pass < 2; ++pass) {
    std::vector<double> xs, ys;
    for (int j = 1; j <= 10; ++j) {
      const double k = 0.1 * j / std::max(fit.scale, 1e-300);
      const double mod = std::abs(ecf_at(series, k, center));
      if (mod < 0.05 || mod > 0.999) continue;
      xs.push_back(std::log(k));
      ys.push_back(std::log(-std::log(mod * mod)));
    }
    if (xs.size() < 5) throw std::runtime_error("fit_stable: ecf regression has too few points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      mx += xs[i];
      my += ys[i];
    }
    mx /= xs.size();
    my /= ys.size();
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      sxx += (xs[i] - mx) * (xs[i] - mx);
      sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (!(sxx > 0.0)) throw std::runtime_error("fit_stable: ecf regression degenerate");
    const double alpha = std::clamp(sxy / sxx, 0.1, 2.0);
    const double intercept = my - (sxy / sxx) * mx;
    const double scale = std::pow(std::exp(intercept) / 2.0, 1.0 / alpha);
    if (!std::isfinite(alpha) || !std::isfinite(scale) || !(scale > 0.0))
      throw std::runtime_error("fit_stable: ecf fit diverged");
    fit.alpha = alpha;
    fit.scale = scale;
  }

  // Skewness from the CF phase; unidentifiable near the Gaussian boundary.
  if (fit.alpha <= 1.95 && std::abs(fit.alpha - 1.0) > 1e-3) {
    double su = 0, suk = 0, skk = 0, skb = 0, sbb = 0, sub = 0;
    for (int j = 1; j <= 10; ++j) {
      const double k = 0.1 * j / fit.scale;
      const auto phi = ecf_at(series, k, center);
      const double u = std::atan2(phi.imag(), phi.real());
      const double b = std::pow(k, fit.alpha);  // k > 0, sign term is +1
      su += u;
      suk += u * k;
      skk += k * k;
      skb += k * b;
      sbb += b * b;
      sub += u * b;
    }
    (void)su;
    // least squares for u = mu k + q b with q = beta c^alpha tan(pi alpha / 2)
    const double det = skk * sbb - skb * skb;
    if (std::abs(det) > 1e-30) {
      const double q = (skk * sub - skb * suk) / det;
      const double denom =
          std::pow(fit.scale, fit.alpha) * std::tan(std::numbers::pi * fit.alpha / 2.0);
      if (std::abs(denom) > 1e-12) fit.beta = std::clamp(q / denom, -1.0, 1.0);
    }
  } else {
    fit.beta = 0.0;
  }
  fit.method = FitMethod::ecf;
  return fit;
}

}  // namespace

std::string to_string(FitMethod method) {
  switch (method) {
    case FitMethod::quantile: return "quantile";
    case FitMethod::ecf: return "ecf";
    case FitMethod::mle: return "mle";
  }
  throw std::logic_error("unreachable fit method");
}

double sample_quantile(std::span<const double> sorted, double p) {
  const std::size_t n = sorted.size();
  if (n == 0) throw std::invalid_argument("sample_quantile: empty sample");
  const double h = p * static_cast<double>(n) - 0.5;
  if (h <= 0.0) return sorted.front();
  if (h >= static_cast<double>(n - 1)) return sorted.back();
  const auto i = static_cast<std::size_t>(h);
  const double frac = h - static_cast<double>(i);
  return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
}

Moments moments(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 2) throw std::invalid_argument("moments: need at least two points");
  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);
  double m2 = 0.0, m4 = 0.0;
  for (double x : series) {
    const double d = x - mean;
    const double d2 = d * d;
    m2 += d2;
    m4 += d2 * d2;
  }
  m2 /= static_cast<double>(n);
  m4 /= static_cast<double>(n);
  Moments m;
  m.mean = mean;
  m.n = n;
  m.std = std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1));
  if (m2 > 0.0) m.kurtosis = m4 / (m2 * m2);
  return m;
}

AcfCurve autocorrelation(std::span<const double> series, double dt, double max_lag) {
  if (!(dt > 0.0) || !(max_lag >= 0.0))
    throw std::invalid_argument("autocorrelation: bad dt or max_lag");
  const auto n = series.size();
  const auto max_k = static_cast<std::size_t>(max_lag / dt);
  if (n <= 2 * max_k) throw std::invalid_argument("autocorrelation: series too short");
  for (double x : series)
    if (!std::isfinite(x)) throw std::invalid_argument("autocorrelation: non-finite value");

  double mean = 0.0;
  for (double x : series) mean += x;
  mean /= static_cast<double>(n);

  AcfCurve acf;
  acf.dt = dt;
  acf.lags.reserve(max_k + 1);
  acf.values.reserve(max_k + 1);
  acf.n_samples.reserve(max_k + 1);
  double c0 = 0.0;
  for (double x : series) c0 += (x - mean) * (x - mean);
  c0 /= static_cast<double>(n);
  if (!(c0 > 0.0)) throw std::invalid_argument("autocorrelation: zero-variance series");
  for (std::size_t k = 0; k <= max_k; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i + k < n; ++i) s += (series[i] - mean) * (series[i + k] - mean);
    s /= static_cast<double>(n);  // biased normalization
    acf.lags.push_back(static_cast<double>(k) * dt);
    acf.values.push_back(k == 0 ? 1.0 : s / c0);
    acf.n_samples.push_back(n - k);
  }
  return acf;
}

GammaFit fit_gamma(const AcfCurve& acf) {
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < acf.lags.size(); ++i) {
    if (acf.lags[i] > 0.0 && acf.values[i] > 0.1) {
      xs.push_back(acf.lags[i]);
      ys.push_back(std::log(acf.values[i]));
    }
  }
  if (xs.size() < 5) throw std::runtime_error("fit_gamma: fewer than 5 usable lags");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= xs.size();
  my /= ys.size();
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  if (!std::isfinite(slope) || slope >= 0.0)
    throw std::runtime_error("fit_gamma: autocorrelation shows no decay");
  GammaFit fit;
  fit.gamma = -slope;
  fit.lags_used = xs.size();
  const double ss_res = syy - slope * sxy;
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  return fit;
}

StableFit fit_stable(std::span<const double> series, FitMethod method) {
  if (series.size() < 500)
    throw std::invalid_argument("fit_stable: need at least 500 points");
  for (double x : series)
    if (!std::isfinite(x)) throw std::invalid_argument("fit_stable: non-finite value");
  switch (method) {
    case FitMethod::quantile: return fit_stable_quantile(series);
    case FitMethod::ecf: return fit_stable_ecf(series);
    case FitMethod::mle:
      throw std::invalid_argument("fit_stable: mle is not provided; use ecf");
  }
  throw std::logic_error("unreachable fit method");
}

CharFn empirical_cf(std::span<const double> series, const std::vector<double>& k_grid) {
  if (series.empty() || k_grid.empty())
    throw std::invalid_argument("empirical_cf: empty series or grid");
  const std::size_t m = k_grid.size();
  // grid must be symmetric and uniform with 0 in the middle
  const std::size_t half = m / 2;
  if (m % 2 != 1 || k_grid[half] != 0.0)
    throw std::invalid_argument("empirical_cf: grid must be symmetric around an explicit 0");
  const double dk = k_grid[half + 1] - k_grid[half];

  std::vector<double> re(half, 0.0), im(half, 0.0);
  for (double x : series) {
    const double c = std::cos(dk * x), s = std::sin(dk * x);
    double cr = c, ci = s;
    for (std::size_t j = 0; j < half; ++j) {
      re[j] += cr;
      im[j] += ci;
      const double nr = cr * c - ci * s;
      ci = cr * s + ci * c;
      cr = nr;
    }
  }

  CharFn cf;
  cf.k = k_grid;
  cf.val.assign(m, {1.0, 0.0});
  const double n = static_cast<double>(series.size());
  for (std::size_t j = 0; j < half; ++j) {
    const std::complex<double> v(re[j] / n, im[j] / n);
    cf.val[half + 1 + j] = v;
    cf.val[half - 1 - j] = std::conj(v);
  }
  return cf;
}

}  // namespace gridfreq
