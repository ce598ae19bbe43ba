#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "gridfreq/cf.hpp"
#include "gridfreq/stats.hpp"
#include "oracles.hpp"

using namespace gridfreq;

namespace {

// Scale of a tabulated stable CF read off at a reference grid point.
double scale_at_ref(const CharFn& cf, double alpha) {
  const std::size_t half = cf.k.size() / 2;
  const std::size_t ref = half + half / 2;  // mid positive grid
  const double l = -std::log(cf.val[ref].real());
  return std::pow(l, 1.0 / alpha) / cf.k[ref];
}

double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i)
    acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  return acc;
}

}  // namespace

TEST_CASE("charfn invariants are enforced") {
  auto cf = make_stable_cf(1.5, 1.0, symmetric_k_grid(10.0, 64));
  CHECK_NOTHROW(cf.check());
  CHECK(cf.real_nonnegative());

  SUBCASE("k = 0 must map to 1") {
    cf.val[64] = {0.99, 0.0};
    CHECK_THROWS_AS(cf.check(), std::invalid_argument);
  }
  SUBCASE("modulus above 1 is rejected") {
    cf.val[70] = {1.1, 0.0};
    CHECK_THROWS_AS(cf.check(), std::invalid_argument);
  }
  SUBCASE("hermitian symmetry is required") {
    cf.val[70] = {cf.val[70].real(), 0.2};
    CHECK_THROWS_AS(cf.check(), std::invalid_argument);
  }
}

TEST_CASE("forward transform maps stable power noise to stable bulk velocity") {
  // exp(-(c|k|)^alpha) -> exp(-(c|k|)^alpha / (gamma alpha))
  for (double alpha : {1.2, 1.5, 2.0}) {
    for (double gamma : {0.1, 0.5}) {
      const double c_p = 1.0;
      const auto grid = symmetric_k_grid(20.0 / c_p, 2048);
      const CharFn power = make_stable_cf(alpha, c_p, grid);
      const CharFn omega = omega_cf_from_power_cf(power, gamma);
      omega.check();
      const double expected = c_p / std::pow(gamma * alpha, 1.0 / alpha);
      CHECK(scale_at_ref(omega, alpha) == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("zero noise passes through the forward transform") {
  const auto grid = symmetric_k_grid(5.0, 128);
  CharFn flat;
  flat.k = grid;
  flat.val.assign(grid.size(), {1.0, 0.0});
  const CharFn out = omega_cf_from_power_cf(flat, 0.3);
  for (const auto& v : out.val) CHECK(v.real() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("gaussian forward transform reproduces the closed-form width map") {
  // exp(-sigma^2 k^2 / 2) -> std sigma / sqrt(2 gamma)
  const double sigma = 0.5, gamma = 0.2;
  const auto grid = symmetric_k_grid(24.0, 2048);
  const CharFn power = make_stable_cf(2.0, sigma / std::numbers::sqrt2, grid);
  const CharFn omega = omega_cf_from_power_cf(power, gamma);
  const double scale_omega = scale_at_ref(omega, 2.0);
  const double std_omega = std::numbers::sqrt2 * scale_omega;
  CHECK(std_omega == doctest::Approx(sigma / std::sqrt(2.0 * gamma)).epsilon(1e-6));
}

TEST_CASE("inverse transform maps stable bulk velocity back to power noise") {
  SUBCASE("worked example: scale 0.5, alpha 1.5, gamma 0.2") {
    const auto grid = symmetric_k_grid(40.0, 2048);
    const CharFn omega = make_stable_cf(1.5, 0.5, grid);
    const CharFn power = power_cf_from_omega_cf(omega, 0.2);
    const double expected = 0.5 * std::pow(0.3, 2.0 / 3.0);
    CHECK(expected == doctest::Approx(0.22407).epsilon(1e-4));
    CHECK(scale_at_ref(power, 1.5) == doctest::Approx(expected).epsilon(1e-6));
  }
  SUBCASE("gaussian case inverts the width map") {
    // sigma_P^2 = 2 gamma sigma_w^2; gamma = 0.5, std_w = 1 -> std_P = 1
    const auto grid = symmetric_k_grid(16.0, 2048);
    const CharFn omega = make_stable_cf(2.0, 1.0 / std::numbers::sqrt2, grid);
    const CharFn power = power_cf_from_omega_cf(omega, 0.5);
    const double std_p = std::numbers::sqrt2 * scale_at_ref(power, 2.0);
    CHECK(std_p == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("transform pair round trip is the identity on stable CFs") {
  for (double alpha : {1.2, 1.5, 2.0}) {
    for (double gamma : {0.1, 0.5}) {
      const double c_p = 1.0;
      const auto grid = symmetric_k_grid(20.0 / c_p, 2048);
      const CharFn power_in = make_stable_cf(alpha, c_p, grid);
      const CharFn round =
          power_cf_from_omega_cf(omega_cf_from_power_cf(power_in, gamma), gamma);
      double max_dev = 0.0;
      for (std::size_t i = 0; i < round.val.size(); ++i)
        max_dev = std::max(max_dev, std::abs(round.val[i] - power_in.val[i]));
      CHECK(max_dev < 1e-3);
    }
  }
}

TEST_CASE("transform errors") {
  const auto grid = symmetric_k_grid(10.0, 64);
  CharFn cf = make_stable_cf(1.5, 1.0, grid);
  CHECK_THROWS_AS(omega_cf_from_power_cf(cf, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(power_cf_from_omega_cf(cf, -1.0), std::invalid_argument);

  // a zero in the interior of the grid (not a saturated tail) is an error
  CharFn touching_zero = cf;
  touching_zero.val[64 + 10] = {0.0, 0.0};
  touching_zero.val[64 - 10] = {0.0, 0.0};
  CHECK_THROWS_AS(omega_cf_from_power_cf(touching_zero, 0.2), std::runtime_error);
  CHECK_THROWS_AS(power_cf_from_omega_cf(touching_zero, 0.2), std::runtime_error);
}

TEST_CASE("density from gaussian and cauchy CFs") {
  SUBCASE("standard gaussian density at zero") {
    const auto grid = symmetric_k_grid(8.0, 2048);
    const CharFn cf = make_stable_cf(2.0, 1.0 / std::numbers::sqrt2, grid);
    const auto x = linspace(-8.0, 8.0, 2001);
    const Density d = pdf_from_cf(cf, x);
    CHECK(d.p[1000] == doctest::Approx(0.39894).epsilon(1e-4 / 0.39894));
    CHECK(trapezoid(d.x, d.p) == doctest::Approx(1.0).epsilon(1e-3));
    CHECK_FALSE(d.ringing);
  }
  SUBCASE("standard cauchy density at zero") {
    const auto grid = symmetric_k_grid(16.0, 4096);
    const CharFn cf = make_stable_cf(1.0, 1.0, grid);
    const auto x = linspace(-800.0, 800.0, 160'001);
    const Density d = pdf_from_cf(cf, x);
    CHECK(d.p[80'000] == doctest::Approx(0.31831).epsilon(1e-3 / 0.31831));
    CHECK(trapezoid(d.x, d.p) == doctest::Approx(1.0).epsilon(1e-3));
  }
  SUBCASE("symmetric CF gives symmetric density") {
    const auto grid = symmetric_k_grid(12.0, 1024);
    const CharFn cf = make_stable_cf(1.5, 1.0, grid);
    const auto x = linspace(-10.0, 10.0, 501);
    const Density d = pdf_from_cf(cf, x);
    for (std::size_t i = 0; i < d.x.size(); ++i)
      CHECK(std::abs(d.p[i] - d.p[d.x.size() - 1 - i]) < 1e-6);
  }
  SUBCASE("insufficient CF decay is rejected") {
    const auto grid = symmetric_k_grid(1.0, 128);
    const CharFn cf = make_stable_cf(2.0, 0.3, grid);
    CHECK_THROWS_AS(pdf_from_cf(cf, linspace(-1.0, 1.0, 11)), std::runtime_error);
  }
  SUBCASE("non-positive-definite CF input flags ringing") {
    // A near-rectangular profile is not a valid CF; its transform oscillates
    // below zero and the tabulation must say so.
    const auto grid = symmetric_k_grid(12.0, 1024);
    CharFn boxy;
    boxy.k = grid;
    boxy.val.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
      boxy.val[i] = {std::exp(-std::pow(std::abs(grid[i]) / 6.0, 8.0)), 0.0};
    const Density d = pdf_from_cf(boxy, linspace(-5.0, 5.0, 1001));
    CHECK(d.ringing);
    CHECK(d.min_value < -1e-4);
  }
}

TEST_CASE("power extraction from synthetic gaussian bulk velocity") {
  const double gamma = 0.1, sigma_omega = 2.0e-3;
  const auto series = oracle::ou_series(gamma, sigma_omega, 1.0, 100'000, 4321);
  const PowerExtraction ex = extract_power_distribution(series, gamma);
  CHECK(ex.omega_fit.alpha > 1.9);
  // Recovered power noise std sqrt(2 gamma) * sigma_omega (widths in std units)
  const double std_power = std::numbers::sqrt2 * ex.power_fit.scale;
  CHECK(std_power == doctest::Approx(std::sqrt(2.0 * gamma) * sigma_omega).epsilon(0.05));
  // Fitted-route density integrates to one and is positive at the center
  CHECK(trapezoid(ex.power_density.x, ex.power_density.p) == doctest::Approx(1.0).epsilon(5e-3));
  CHECK(ex.power_density.p[ex.power_density.p.size() / 2] > 0.0);
  // Data-direct route stays close to the fitted route for clean gaussian input
  double max_rel = 0.0;
  const double peak = ex.power_density.p[ex.power_density.p.size() / 2];
  for (std::size_t i = 0; i < ex.power_density.p.size(); ++i)
    max_rel = std::max(max_rel,
                       std::abs(ex.power_density.p[i] - ex.power_density_empirical.p[i]) / peak);
  CHECK(max_rel < 0.05);
}

TEST_CASE("power extraction from synthetic heavy-tailed bulk velocity") {
  const double alpha = 1.5, gamma = 0.1, drive_scale = 3.0e-3;
  const auto series = oracle::stable_ou_series(alpha, gamma, drive_scale, 1.0, 100'000, 777);
  const PowerExtraction ex = extract_power_distribution(series, gamma);
  CHECK(std::abs(ex.omega_fit.alpha - alpha) < 0.1);
  // The transform recovers the unit-time drive scale of the power noise.
  CHECK(ex.power_fit.scale == doctest::Approx(drive_scale).epsilon(0.10));
  // Stationary bulk scale follows the closed-form relation of the pair.
  const double expected_omega_scale = drive_scale / std::pow(alpha * gamma, 1.0 / alpha);
  CHECK(ex.omega_fit.scale == doctest::Approx(expected_omega_scale).epsilon(0.10));
}

TEST_CASE("power extraction rejects degenerate input") {
  const std::vector<double> flat(20'000, 1.0);
  CHECK_THROWS(extract_power_distribution(flat, 0.1));
  const std::vector<double> tiny(100, 0.0);
  CHECK_THROWS_AS(extract_power_distribution(tiny, 0.1), std::invalid_argument);
}
