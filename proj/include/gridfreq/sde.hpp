#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gridfreq/grid.hpp"
#include "gridfreq/noise.hpp"

namespace gridfreq {

struct State {
  std::vector<double> theta;  // phase angles, rad, stored unwrapped
  std::vector<double> omega;  // angular velocities, s^-1
  double t = 0.0;
};

/// Integration layout. Samples are recorded every `stride` steps after
/// `burn_in` steps are discarded, so a trajectory holds
/// (steps - burn_in) / stride points.
struct SimConfig {
  double dt = 1e-2;
  std::size_t steps = 0;
  std::size_t burn_in = 0;
  std::size_t stride = 1;
  bool record_nodes = false;

  /// Defaults used by the sweeps: burn-in covers 10 / gamma_eff seconds and
  /// the recorded samples span at least 100 / gamma_eff seconds.
  static SimConfig for_samples(double gamma_eff, std::size_t samples, double dt = 1e-2);
};

struct TrajectoryMeta {
  std::string grid_digest;
  std::string noise_digest;
  SimConfig sim;
  std::uint64_t run_index = 0;
  std::uint64_t seed = 0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<double> bulk;                    // inertia-weighted omega
  std::vector<std::vector<double>> node_omega;  // per node, empty unless recorded
  TrajectoryMeta meta;
};

/// Inertia-weighted mean angular velocity, sum(M_i w_i) / sum(M_i).
double bulk_omega(const State& state, const GridSpec& grid);

/// Noise-free synchronous phases (theta_1 = 0) by damped Newton iteration,
/// falling back to relaxation integration if Newton stalls. Throws when no
/// fixed point is found at the requested residual tolerance.
std::vector<double> find_fixed_point(const GridSpec& grid, double tol = 1e-10);

/// One Euler-Maruyama step; rngs holds one stream per node.
void step(State& state, const GridSpec& grid, const NoiseSpec& noise, double dt,
          std::vector<Rng>& rngs);

/// Integrate from the synchronous fixed point. Deterministic in
/// (grid, noise, config, run_index); aborts on non-finite state.
Trajectory simulate(const GridSpec& grid, const NoiseSpec& noise, const SimConfig& config,
                    std::uint64_t run_index);

/// Columnar text (time, bulk[, node columns]) plus a JSON metadata sidecar.
void write_trajectory(const Trajectory& traj, const std::string& data_path,
                      const std::string& meta_path);

}  // namespace gridfreq
