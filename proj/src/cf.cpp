#include "gridfreq/cf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "gridfreq/stats.hpp"

namespace gridfreq {

namespace {

std::size_t half_index(const CharFn& cf) {
  const std::size_t m = cf.k.size();
  if (m % 2 != 1) throw std::invalid_argument("CharFn: grid must have odd point count");
  return m / 2;
}

// -ln CF on the positive half grid (index 0 -> k just above 0). A tail that
// has underflowed to zero is tolerated and reported via `saturated_from`
// (transform outputs there are indistinguishable from zero anyway); a zero or
// sign change in the interior is a hard error since the logarithm is
// undefined.
struct NegLog {
  std::vector<double> val;
  std::size_t saturated_from;  // == val.size() when the whole tail is usable
};

NegLog neg_log_positive_half(const CharFn& cf, const char* who) {
  const std::size_t half = half_index(cf);
  NegLog out;
  out.val.assign(half, 0.0);
  out.saturated_from = half;
  for (std::size_t m = half; m-- > 0;) {
    const auto v = cf.val[half + 1 + m];
    if (std::abs(v.imag()) > 1e-9)
      throw std::invalid_argument(std::string(who) + ": CF must be real (symmetric law)");
    const double re = v.real();
    if (re < 1e-290) {
      if (out.saturated_from != m + 1)
        throw std::runtime_error(std::string(who) + ": CF vanishes or crosses zero on grid");
      out.saturated_from = m;
      continue;
    }
    out.val[m] = std::max(0.0, -std::log(re));
  }
  return out;
}

CharFn from_positive_half(const std::vector<double>& k_grid, const std::vector<double>& expnt,
                          double gamma) {
  // expnt holds -ln CF on the positive half; mirror with Hermitian symmetry.
  CharFn out;
  out.k = k_grid;
  const std::size_t half = k_grid.size() / 2;
  out.val.assign(k_grid.size(), {1.0, 0.0});
  for (std::size_t m = 0; m < half; ++m) {
    const double v = std::isinf(expnt[m]) ? 0.0 : std::exp(-expnt[m]);
    out.val[half + 1 + m] = {v, 0.0};
    out.val[half - 1 - m] = {v, 0.0};
  }
  out.gamma = gamma;
  return out;
}

}  // namespace

void CharFn::check() const {
  const std::size_t m = k.size();
  if (m != val.size() || m < 3 || m % 2 != 1)
    throw std::invalid_argument("CharFn: need an odd number of (k, value) pairs");
  const std::size_t half = m / 2;
  if (k[half] != 0.0) throw std::invalid_argument("CharFn: grid must contain k = 0");
  const double dk = k[half + 1] - k[half];
  for (std::size_t i = 0; i + 1 < m; ++i) {
    if (std::abs((k[i + 1] - k[i]) - dk) > 1e-9 * dk)
      throw std::invalid_argument("CharFn: grid must be uniformly spaced");
  }
  if (std::abs(val[half] - std::complex<double>(1.0, 0.0)) > 1e-12)
    throw std::invalid_argument("CharFn: value at k = 0 must be 1");
  for (std::size_t i = 0; i < m; ++i) {
    if (std::abs(val[i]) > 1.0 + 1e-9)
      throw std::invalid_argument("CharFn: |value| exceeds 1");
    if (std::abs(val[i] - std::conj(val[m - 1 - i])) > 1e-9)
      throw std::invalid_argument("CharFn: values are not Hermitian");
  }
}

bool CharFn::real_nonnegative(double tol) const {
  for (const auto& v : val)
    if (std::abs(v.imag()) > tol || v.real() < -tol) return false;
  return true;
}

std::vector<double> symmetric_k_grid(double k_max, std::size_t n_half) {
  if (!(k_max > 0.0) || n_half == 0)
    throw std::invalid_argument("symmetric_k_grid: bad parameters");
  std::vector<double> k(2 * n_half + 1);
  const double dk = k_max / static_cast<double>(n_half);
  for (std::size_t i = 0; i <= 2 * n_half; ++i) {
    const auto off = static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(n_half);
    k[i] = static_cast<double>(off) * dk;
  }
  k[n_half] = 0.0;
  return k;
}

CharFn make_stable_cf(double alpha, double scale, const std::vector<double>& k_grid) {
  if (!(alpha > 0.0 && alpha <= 2.0) || !(scale >= 0.0))
    throw std::invalid_argument("make_stable_cf: bad parameters");
  CharFn cf;
  cf.k = k_grid;
  cf.val.resize(k_grid.size());
  for (std::size_t i = 0; i < k_grid.size(); ++i)
    cf.val[i] = {std::exp(-std::pow(scale * std::abs(k_grid[i]), alpha)), 0.0};
  return cf;
}

CharFn omega_cf_from_power_cf(const CharFn& power_cf, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("omega_cf_from_power_cf: gamma must be > 0");
  power_cf.check();
  const std::size_t half = half_index(power_cf);
  const auto neg = neg_log_positive_half(power_cf, "omega_cf_from_power_cf");
  const auto& L = neg.val;
  const std::size_t usable = neg.saturated_from;

  // Zero noise: ln 1 = 0 everywhere.
  if (usable == half && std::all_of(L.begin(), L.end(), [](double v) { return v == 0.0; })) {
    CharFn out = power_cf;
    out.gamma = gamma;
    return out;
  }

  // Integral of L(z)/z with L treated as a power law a z^b on each cell. This
  // is exact for stable inputs and absorbs the z -> 0 endpoint: the first
  // cell contributes L_1 / b for any local exponent b > 0.
  std::vector<double> expnt(half, std::numeric_limits<double>::infinity());
  double cum = 0.0;
  double b_first = 2.0;
  if (usable > 1 && L[0] > 0.0 && L[1] > L[0]) {
    const double k1 = power_cf.k[half + 1], k2 = power_cf.k[half + 2];
    b_first = std::log(L[1] / L[0]) / std::log(k2 / k1);
  }
  if (usable > 0) {
    cum = b_first > 0.0 ? L[0] / b_first : 0.0;
    expnt[0] = cum / gamma;
  }
  for (std::size_t m = 1; m < usable; ++m) {
    const double za = power_cf.k[half + m], zb = power_cf.k[half + 1 + m];
    const double la = L[m - 1], lb = L[m];
    double piece;
    if (la > 0.0 && lb > 0.0 && lb != la) {
      const double b = std::log(lb / la) / std::log(zb / za);
      piece = std::abs(b) > 1e-12 ? (lb - la) / b : la * std::log(zb / za);
    } else if (la > 0.0 || lb > 0.0) {
      piece = 0.5 * (la / za + lb / zb) * (zb - za);  // trapezoid fallback
    } else {
      piece = 0.0;
    }
    if (!std::isfinite(piece))
      throw std::runtime_error("omega_cf_from_power_cf: quadrature failed");
    cum += piece;
    expnt[m] = cum / gamma;
  }
  return from_positive_half(power_cf.k, expnt, gamma);
}

CharFn power_cf_from_omega_cf(const CharFn& omega_cf, double gamma) {
  if (!(gamma > 0.0)) throw std::invalid_argument("power_cf_from_omega_cf: gamma must be > 0");
  omega_cf.check();
  const std::size_t half = half_index(omega_cf);
  const auto neg = neg_log_positive_half(omega_cf, "power_cf_from_omega_cf");
  const auto& L = neg.val;
  const std::size_t usable = neg.saturated_from;

  if (usable == half && std::all_of(L.begin(), L.end(), [](double v) { return v == 0.0; })) {
    CharFn out = omega_cf;
    out.gamma = gamma;
    return out;
  }

  // gamma k d/dk ln S = -gamma b(k) L(k) with b the log-log slope of L;
  // centered differences in log space, one-sided at the ends. Exact for
  // power-law exponents, second order otherwise.
  std::vector<double> expnt(half, std::numeric_limits<double>::infinity());
  auto slope = [&](std::size_t lo, std::size_t hi) {
    return std::log(L[hi] / L[lo]) /
           std::log(omega_cf.k[half + 1 + hi] / omega_cf.k[half + 1 + lo]);
  };
  for (std::size_t m = 0; m < usable; ++m) {
    if (L[m] == 0.0) {
      expnt[m] = 0.0;  // CF still 1 here; derivative term vanishes
      continue;
    }
    std::size_t lo = m > 0 ? m - 1 : m;
    std::size_t hi = m + 1 < usable ? m + 1 : m;
    while (lo < m && L[lo] == 0.0) ++lo;
    while (hi > m && L[hi] == 0.0) --hi;
    if (lo == hi) {
      expnt[m] = 0.0;
      continue;
    }
    double b = slope(lo, hi);
    if (!std::isfinite(b))
      throw std::runtime_error("power_cf_from_omega_cf: derivative is not finite");
    b = std::clamp(b, 1e-6, 6.0);
    expnt[m] = gamma * b * L[m];
  }
  return from_positive_half(omega_cf.k, expnt, gamma);
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  if (count < 2 || !(hi > lo)) throw std::invalid_argument("linspace: bad parameters");
  std::vector<double> v(count);
  const double step = (hi - lo) / static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) v[i] = lo + static_cast<double>(i) * step;
  return v;
}

Density pdf_from_cf(const CharFn& cf, const std::vector<double>& x_grid) {
  cf.check();
  if (x_grid.empty()) throw std::invalid_argument("pdf_from_cf: empty x grid");
  if (std::abs(cf.val.front()) > 1e-6 || std::abs(cf.val.back()) > 1e-6)
    throw std::runtime_error("pdf_from_cf: CF has not decayed below 1e-6 at the grid edge");

  const std::size_t half = half_index(cf);
  const double dk = cf.k[half + 1] - cf.k[half];

  // Hermitian symmetry: p(x) = (1/pi) Re int_0^kmax CF(k) e^{-ikx} dk.
  Density d;
  d.x = x_grid;
  d.p.resize(x_grid.size());
  for (std::size_t xi = 0; xi < x_grid.size(); ++xi) {
    const double x = x_grid[xi];
    double acc = 0.5;  // k = 0 trapezoid endpoint, CF(0) = 1
    for (std::size_t m = 0; m < half; ++m) {
      const auto v = cf.val[half + 1 + m];
      const double k = cf.k[half + 1 + m];
      const double term = v.real() * std::cos(k * x) + v.imag() * std::sin(k * x);
      acc += (m + 1 == half) ? 0.5 * term : term;
    }
    d.p[xi] = acc * dk / std::numbers::pi;
  }
  d.min_value = *std::min_element(d.p.begin(), d.p.end());
  d.ringing = d.min_value < -1e-4;
  return d;
}

PowerExtraction extract_power_distribution(const std::vector<double>& omega_series,
                                           double gamma, const ExtractionGrids& grids) {
  if (omega_series.size() < 10'000)
    throw std::invalid_argument("extract_power_distribution: need at least 1e4 samples");
  if (!(gamma > 0.0))
    throw std::invalid_argument("extract_power_distribution: gamma must be > 0");

  PowerExtraction out;
  out.omega_fit = fit_stable(omega_series, FitMethod::ecf);
  const double alpha = out.omega_fit.alpha;
  const double c_omega = out.omega_fit.scale;

  // Stable-in/stable-out scale relation of the transform pair.
  const double c_power = c_omega * std::pow(gamma * alpha, 1.0 / alpha);
  out.power_fit = out.omega_fit;
  out.power_fit.scale = c_power;
  out.power_fit.beta = 0.0;
  out.power_fit.location = 0.0;

  // Size the wavenumber grid off the slower-decaying CF of the pair.
  const double c_min = std::min(c_omega, c_power);
  const double k_max =
      1.1 * std::pow(-std::log(grids.cf_edge_target), 1.0 / alpha) / c_min;
  const auto k_grid = symmetric_k_grid(k_max, grids.n_k_half);

  const CharFn omega_cf_fit = make_stable_cf(alpha, c_omega, k_grid);
  out.power_cf = power_cf_from_omega_cf(omega_cf_fit, gamma);

  // Data-direct route: empirical CF of the centered series, blended into the
  // fitted CF where the empirical one sinks toward its 1/sqrt(N) noise floor.
  std::vector<double> centered(omega_series.size());
  for (std::size_t i = 0; i < centered.size(); ++i)
    centered[i] = omega_series[i] - out.omega_fit.location;
  const CharFn emp = empirical_cf(centered, k_grid);
  const double floor = 1.0 / std::sqrt(static_cast<double>(centered.size()));
  const double lo = 3.0 * floor, hi = 30.0 * floor;
  CharFn hybrid;
  hybrid.k = k_grid;
  hybrid.val.resize(k_grid.size());
  for (std::size_t i = 0; i < k_grid.size(); ++i) {
    const double ref = omega_cf_fit.val[i].real();
    double w = 0.0;
    if (ref >= hi) {
      w = 1.0;
    } else if (ref > lo) {
      w = std::log(ref / lo) / std::log(hi / lo);
    }
    double v = w * emp.val[i].real() + (1.0 - w) * ref;
    v = std::clamp(v, 1e-300, 1.0);
    hybrid.val[i] = {v, 0.0};
  }
  hybrid.val[k_grid.size() / 2] = {1.0, 0.0};

  const CharFn power_cf_emp = power_cf_from_omega_cf(hybrid, gamma);

  double x_half = grids.x_half_width;
  if (!(x_half > 0.0)) {
    const double tail_stretch = alpha >= 1.9 ? 10.0 : 40.0 / alpha;
    x_half = c_power * tail_stretch;
  }
  const auto x_grid = linspace(-x_half, x_half, grids.n_x);
  out.power_density = pdf_from_cf(out.power_cf, x_grid);
  out.power_density_empirical = pdf_from_cf(power_cf_emp, x_grid);
  return out;
}

}  // namespace gridfreq
