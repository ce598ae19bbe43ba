#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>
#include <vector>

#include "gridfreq/sde.hpp"
#include "gridfreq/stats.hpp"
#include "oracles.hpp"

using namespace gridfreq;

namespace {

GridSpec two_node_grid() {
  GridSpec g;
  g.n = 2;
  g.inertia = {1.0, 1.0};
  g.damping = {0.1, 0.1};
  g.control_gain = {0.0, 0.0};
  g.power = {-1.0, 1.0};
  g.coupling = {0.0, 4.0, 4.0, 0.0};
  return g;
}

GridSpec single_node_grid() {
  GridSpec g;
  g.n = 1;
  g.inertia = {1.0};
  g.damping = {0.1};
  g.control_gain = {0.0};
  g.power = {0.0};
  g.coupling = {0.0};
  return g;
}

NoiseSpec quiet_noise() {
  NoiseSpec n;
  n.family = NoiseFamily::gaussian;
  n.scale = {0.0};
  return n;
}

}  // namespace

TEST_CASE("fixed point solves the power balance") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  const auto theta = find_fixed_point(g);
  CHECK(theta[0] == 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    double r = g.power[i];
    for (std::size_t j = 0; j < g.n; ++j)
      if (j != i) r += g.k(i, j) * std::sin(theta[j] - theta[i]);
    CHECK(std::abs(r) < 1e-9);
  }
}

TEST_CASE("two-node fixed point is arcsin(P/K)") {
  const auto theta = find_fixed_point(two_node_grid());
  CHECK(theta[1] - theta[0] == doctest::Approx(std::asin(0.25)).epsilon(1e-9));
  CHECK(std::asin(0.25) == doctest::Approx(0.25268).epsilon(1e-4));
}

TEST_CASE("an overloaded line has no synchronous fixed point") {
  GridSpec g = two_node_grid();
  g.set_k(0, 1, 0.5);  // |P| / K = 2 > 1
  CHECK_THROWS_AS(find_fixed_point(g), std::runtime_error);
}

TEST_CASE("a noise-free step at the fixed point does not move the state") {
  const GridSpec g = build_test_grid(Scenario::heterogeneous_damping, 0.5);
  State st;
  st.theta = find_fixed_point(g);
  st.omega.assign(g.n, 0.0);
  const State before = st;
  std::vector<Rng> rngs(g.n);
  step(st, g, quiet_noise(), 1e-3, rngs);
  for (std::size_t i = 0; i < g.n; ++i) {
    CHECK(std::abs(st.omega[i] - before.omega[i]) < 1e-12);
    CHECK(std::abs(st.theta[i] - before.theta[i]) < 1e-15);
  }
}

TEST_CASE("noise-free dynamics converge to the two-node steady state") {
  const GridSpec g = two_node_grid();
  State st;
  st.theta = {0.0, 0.6};  // away from equilibrium
  st.omega = {0.2, -0.1};
  std::vector<Rng> rngs(g.n);
  const double dt = 1e-3;
  for (int s = 0; s < 400'000; ++s) step(st, g, quiet_noise(), dt, rngs);
  CHECK(std::sin(st.theta[1] - st.theta[0]) == doctest::Approx(0.25).epsilon(1e-6));
  CHECK(std::abs(st.omega[0]) < 1e-8);
  CHECK(std::abs(st.omega[1]) < 1e-8);
}

TEST_CASE("bulk velocity decays at (damping + control) / inertia") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.5);  // gamma_eff = 0.6
  State st;
  st.theta = find_fixed_point(g);
  st.omega.assign(g.n, 0.01);  // uniform kick keeps the bulk mode clean
  std::vector<Rng> rngs(g.n);
  const double dt = 1e-3;
  const double w0 = bulk_omega(st, g);
  for (int s = 0; s < 2000; ++s) step(st, g, quiet_noise(), dt, rngs);
  const double w1 = bulk_omega(st, g);
  const double rate = -std::log(w1 / w0) / 2.0;  // over 2 s
  CHECK(rate == doctest::Approx(0.6).epsilon(0.01));
}

TEST_CASE("noise-free bulk decays monotonically toward zero") {
  const GridSpec g = build_test_grid(Scenario::heterogeneous_damping, 0.0);
  State st;
  st.theta = find_fixed_point(g);
  st.omega.assign(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) st.omega[i] = (i % 2 ? 0.02 : -0.01);
  std::vector<Rng> rngs(g.n);
  const double w0 = std::abs(bulk_omega(st, g));
  double running_max = 0.0;
  std::vector<double> window_peaks;
  for (int s = 1; s <= 120'000; ++s) {
    step(st, g, quiet_noise(), 1e-3, rngs);
    running_max = std::max(running_max, std::abs(bulk_omega(st, g)));
    if (s % 20'000 == 0) {
      window_peaks.push_back(running_max);
      running_max = 0.0;
    }
  }
  for (std::size_t i = 1; i < window_peaks.size(); ++i)
    CHECK(window_peaks[i] < window_peaks[i - 1]);  // envelope decays
  CHECK(window_peaks.back() < 1e-3 * window_peaks.front());
  CHECK(window_peaks.front() >= w0 * 0.5);
}

TEST_CASE("zero noise keeps the bulk at zero") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.steps = 2000;
  cfg.burn_in = 0;
  cfg.stride = 10;
  const Trajectory traj = simulate(g, quiet_noise(), cfg, 0);
  REQUIRE(traj.bulk.size() == 200);
  for (double w : traj.bulk) CHECK(std::abs(w) < 1e-10);
}

TEST_CASE("simulate is deterministic in (seed, run index)") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.2);
  NoiseSpec noise;
  noise.family = NoiseFamily::stable;
  noise.alpha = 1.5;
  noise.scale = {0.01};
  noise.seed = 99;
  const SimConfig cfg = SimConfig::for_samples(0.3, 200);
  const Trajectory a = simulate(g, noise, cfg, 7);
  const Trajectory b = simulate(g, noise, cfg, 7);
  REQUIRE(a.bulk.size() == b.bulk.size());
  for (std::size_t i = 0; i < a.bulk.size(); ++i) CHECK(a.bulk[i] == b.bulk[i]);

  const Trajectory c = simulate(g, noise, cfg, 8);
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.bulk.size(); ++i)
    if (a.bulk[i] != c.bulk[i]) ++diff;
  CHECK(diff > a.bulk.size() / 2);
}

TEST_CASE("trajectory sample count and spacing follow the config") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.steps = 5000;
  cfg.burn_in = 1000;
  cfg.stride = 40;
  const Trajectory traj = simulate(g, noise, cfg, 0);
  CHECK(traj.bulk.size() == (cfg.steps - cfg.burn_in) / cfg.stride);
  CHECK(traj.times.front() == doctest::Approx((1000 + 40) * 1e-2));
  CHECK(traj.times[1] - traj.times[0] == doctest::Approx(0.4));
  CHECK(traj.meta.sim.stride == 40);
}

TEST_CASE("bulk omega is the inertia-weighted mean") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  State st;
  st.theta.assign(g.n, 0.0);

  st.omega.assign(g.n, 0.37);
  CHECK(bulk_omega(st, g) == doctest::Approx(0.37).epsilon(1e-12));

  st.omega.assign(g.n, 0.0);
  st.omega[0] = 1.0;
  CHECK(bulk_omega(st, g) == doctest::Approx(1.1 / 39.1).epsilon(1e-12));
  CHECK(1.1 / 39.1 == doctest::Approx(0.028133).epsilon(1e-4));

  const GridSpec g2 = two_node_grid();
  State st2;
  st2.theta = {0.0, 0.0};
  st2.omega = {1.0, -1.0};
  CHECK(bulk_omega(st2, g2) == 0.0);
}

TEST_CASE("single node realizes an Ornstein-Uhlenbeck process") {
  const GridSpec g = single_node_grid();
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  noise.seed = 2024;
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.burn_in = 10'000;
  cfg.steps = cfg.burn_in + 1'000'000;
  cfg.stride = 1;
  const Trajectory traj = simulate(g, noise, cfg, 0);

  // Stationary std from the aggregated-noise closed form.
  const double predicted = std::numbers::sqrt2 * 0.01 / std::sqrt(2.0 * 0.1);
  CHECK(moments(traj.bulk).std == doctest::Approx(predicted).epsilon(0.03));

  // Exponential autocorrelation with rate gamma; fit on a strided view.
  std::vector<double> strided;
  strided.reserve(traj.bulk.size() / 10);
  for (std::size_t i = 0; i < traj.bulk.size(); i += 10) strided.push_back(traj.bulk[i]);
  const AcfCurve acf = autocorrelation(strided, 0.1, 25.0);
  const GammaFit fit = fit_gamma(acf);
  CHECK(fit.gamma == doctest::Approx(0.1).epsilon(0.1));
}

TEST_CASE("pooled ensemble std matches the exact stationary value") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  noise.seed = 5151;
  const SimConfig cfg = SimConfig::for_samples(0.1, 1000);
  std::vector<double> pooled;
  for (std::uint64_t run = 0; run < 20; ++run) {
    const Trajectory t = simulate(g, noise, cfg, run);
    pooled.insert(pooled.end(), t.bulk.begin(), t.bulk.end());
  }
  const double exact = oracle::lyapunov_bulk_std(g, std::vector<double>(10, 0.01));
  CHECK(moments(pooled).std == doctest::Approx(exact).epsilon(0.035));
}

TEST_CASE("halving dt leaves the stationary width within ensemble error") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.4);
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  noise.seed = 616;
  auto pooled_std = [&](double dt, std::uint64_t run_base) {
    const SimConfig cfg = SimConfig::for_samples(0.5, 500, dt);
    std::vector<double> pooled;
    for (std::uint64_t run = 0; run < 10; ++run) {
      const Trajectory t = simulate(g, noise, cfg, run_base + run);
      pooled.insert(pooled.end(), t.bulk.begin(), t.bulk.end());
    }
    return moments(pooled).std;
  };
  const double coarse = pooled_std(1e-2, 0);
  const double fine = pooled_std(5e-3, 1000);
  // ~5000 samples each with neighbor correlation; 3 combined standard errors
  const double se = coarse * 3.0 * std::sqrt(2.0 / (2.0 * 450.0));
  CHECK(std::abs(coarse - fine) < se);
}

TEST_CASE("integration aborts on numerical blow-up with a diagnostic") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  SimConfig cfg;
  cfg.dt = 100.0;  // far past the explicit-scheme stability limit
  cfg.steps = 5000;
  cfg.burn_in = 0;
  cfg.stride = 1;
  CHECK_THROWS_WITH_AS(simulate(g, noise, cfg, 0), doctest::Contains("non-finite"),
                       std::runtime_error);
}

TEST_CASE("trajectory export writes columns and a metadata sidecar") {
  namespace fs = std::filesystem;
  const GridSpec g = two_node_grid();
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  noise.seed = 11;
  SimConfig cfg;
  cfg.dt = 1e-2;
  cfg.steps = 300;
  cfg.burn_in = 100;
  cfg.stride = 10;
  cfg.record_nodes = true;
  const Trajectory traj = simulate(g, noise, cfg, 3);
  REQUIRE(traj.node_omega.size() == 2);

  const auto dir = fs::temp_directory_path();
  const auto data = (dir / "gridfreq_traj.txt").string();
  const auto meta = (dir / "gridfreq_traj.json").string();
  write_trajectory(traj, data, meta);

  // recorded bulk stays consistent with the recorded node columns
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    const double weighted = (traj.node_omega[0][s] + traj.node_omega[1][s]) / 2.0;
    CHECK(traj.bulk[s] == doctest::Approx(weighted).epsilon(1e-12));
  }

  std::ifstream in(data);
  std::string header;
  std::getline(in, header);
  CHECK(header.find("bulk_omega") != std::string::npos);
  std::size_t rows = 0;
  double t, bulk, w1, w2;
  while (in >> t >> bulk >> w1 >> w2) ++rows;
  CHECK(rows == traj.times.size());

  std::ifstream min(meta);
  std::string blob((std::istreambuf_iterator<char>(min)), std::istreambuf_iterator<char>());
  CHECK(blob.find(traj.meta.grid_digest) != std::string::npos);
  CHECK(blob.find("\"run_index\": 3") != std::string::npos);
  fs::remove(data);
  fs::remove(meta);
}

TEST_CASE("config validation in simulate") {
  const GridSpec g = build_test_grid(Scenario::homogeneous, 0.0);
  NoiseSpec noise;
  noise.family = NoiseFamily::gaussian;
  noise.scale = {0.01};
  SimConfig cfg;
  cfg.steps = 100;
  cfg.burn_in = 100;
  CHECK_THROWS_AS(simulate(g, noise, cfg, 0), std::invalid_argument);
  cfg.burn_in = 0;
  cfg.stride = 0;
  CHECK_THROWS_AS(simulate(g, noise, cfg, 0), std::invalid_argument);
}
