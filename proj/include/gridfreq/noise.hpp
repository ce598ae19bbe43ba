#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace gridfreq {

/// Deterministic random stream: xoshiro256** seeded through splitmix64.
/// Streams are derived per (seed, run, node) so ensemble workers never share
/// state and results are independent of scheduling.
class Rng {
 public:
  Rng() : Rng(0, 0, 0) {}
  Rng(std::uint64_t seed, std::uint64_t run, std::uint64_t node);

  std::uint64_t next_u64();
  double uniform01();     // [0, 1)
  double uniform_open();  // (0, 1)
  double exponential();   // Exp(1)
  double normal();        // N(0,1), Marsaglia polar

 private:
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

Rng derive_rng(std::uint64_t seed, std::uint64_t run, std::uint64_t node);

enum class NoiseFamily { gaussian, stable };

/// Per-node power-noise description. `scale` holds sigma_S per node; a single
/// entry broadcasts to all nodes. The standard stable variate has
/// characteristic function exp(-|k|^alpha), so a node's white-noise increment
/// over dt is sigma_S * dt^(1/alpha) * S_alpha; at alpha = 2 this is Gaussian
/// with standard deviation sqrt(2) * sigma_S * sqrt(dt).
struct NoiseSpec {
  NoiseFamily family = NoiseFamily::gaussian;
  double alpha = 2.0;  // stability exponent, (0, 2]; gaussian implies 2
  std::vector<double> scale;
  std::uint64_t seed = 0;

  double scale_at(std::size_t node) const;
  double effective_alpha() const { return family == NoiseFamily::gaussian ? 2.0 : alpha; }
  void check() const;  // throws std::invalid_argument on bad parameters
};

/// Draw from the standard symmetric alpha-stable law, CF exp(-|k|^alpha).
/// Chambers-Mallows-Stuck for alpha < 2; the alpha = 2 boundary uses the
/// analytic limit of the construction (a Gaussian with variance 2).
double sample_standard_stable(double alpha, Rng& rng);

/// Integrated noise over one step: sigma_S,i * dt^(1/alpha) * S_alpha.
double noise_increment(const NoiseSpec& spec, std::size_t node, double dt, Rng& rng);

std::string noise_digest(const NoiseSpec& spec);

}  // namespace gridfreq
