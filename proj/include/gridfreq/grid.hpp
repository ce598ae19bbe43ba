#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace gridfreq {

/// Ten-node test scenarios: control gains follow the damping layout.
enum class Scenario { homogeneous, heterogeneous_damping, generator_only, custom };

Scenario scenario_from_string(const std::string& tag);
std::string to_string(Scenario scenario);

/// Static grid parameters. Couplings are symmetric with zero diagonal, power
/// set-points balance to zero, and the nonzero-coupling graph is connected;
/// validate() reports any violation. Immutable once built, safe to share
/// across ensemble workers.
struct GridSpec {
  std::size_t n = 0;
  std::vector<double> inertia;       // M_i, s
  std::vector<double> damping;       // kappa^D_i
  std::vector<double> control_gain;  // kappa^C_i, enters dynamics like damping
  std::vector<double> power;         // P^in_0,i, s^-2
  std::vector<double> coupling;      // K_ij, s^-2, n x n row-major

  double k(std::size_t i, std::size_t j) const { return coupling[i * n + j]; }
  void set_k(std::size_t i, std::size_t j, double v) {
    coupling[i * n + j] = v;
    coupling[j * n + i] = v;
  }
  double total_inertia() const;
};

/// Every violated invariant as a human-readable message (1-based node
/// indices); empty means the grid is valid.
std::vector<std::string> validate(const GridSpec& grid);

/// The ten-node test grid: consumers 1-5 at -1 s^-2, generators 6-10 at
/// +1 s^-2, K = 4 s^-2 on a ring with two chords. kappa_c is the sweep's
/// dimensionless control parameter; per-node gains are 10 * kappa_c * damping
/// (generator-only: gains on generators, unit inertia, damping 0.1).
GridSpec build_test_grid(Scenario scenario, double kappa_c);

struct EffectiveGamma {
  std::vector<double> per_node;  // (damping_i + control_i) / inertia_i
  double bulk = 0.0;             // sum(damping + control) / sum(inertia)
  bool uniform = false;          // per-node ratios equal within 1e-9 relative
};

EffectiveGamma effective_gamma(const GridSpec& grid);

/// JSON file format: {n, inertia[], damping[], control_gain[], power[],
/// edges[[i, j, K]...]} with 0-based indices.
GridSpec load_grid_json(const std::string& path);
void save_grid_json(const GridSpec& grid, const std::string& path);

std::string grid_digest(const GridSpec& grid);

}  // namespace gridfreq
