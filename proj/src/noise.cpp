#include "gridfreq/noise.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace gridfreq {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

// splitmix64; advances the counter and returns the mixed output.
inline std::uint64_t splitmix_next(std::uint64_t& x) {
  x += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = x;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed, std::uint64_t run, std::uint64_t node) {
  std::uint64_t x = seed;
  x = splitmix_next(x) ^ (0x9E3779B97F4A7C15ULL * (run + 1));
  x = splitmix_next(x) ^ (0xC2B2AE3D27D4EB4FULL * (node + 1));
  // The splitmix finalizer is a bijection, so at most one counter value maps
  // to zero and the xoshiro state can never be all zero.
  for (auto& w : s_) w = splitmix_next(x);
}

std::uint64_t Rng::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Rng::uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform_open() {
  return (static_cast<double>(next_u64() >> 12) + 0.5) * 0x1.0p-52;
}

double Rng::exponential() {
  return -std::log((static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53);
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform01() - 1.0;
    v = 2.0 * uniform01() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * m;
  has_spare_ = true;
  return u * m;
}

Rng derive_rng(std::uint64_t seed, std::uint64_t run, std::uint64_t node) {
  return Rng(seed, run, node);
}

double NoiseSpec::scale_at(std::size_t node) const {
  if (scale.empty()) throw std::invalid_argument("NoiseSpec: no scale set");
  if (scale.size() == 1) return scale[0];
  if (node >= scale.size()) throw std::invalid_argument("NoiseSpec: node index out of range");
  return scale[node];
}

void NoiseSpec::check() const {
  const double a = effective_alpha();
  if (!(a > 0.0 && a <= 2.0))
    throw std::invalid_argument("NoiseSpec: alpha must be in (0, 2]");
  if (family == NoiseFamily::gaussian && alpha != 2.0)
    throw std::invalid_argument("NoiseSpec: gaussian family implies alpha = 2");
  if (scale.empty()) throw std::invalid_argument("NoiseSpec: scale is empty");
  for (double s : scale)
    if (!(s >= 0.0)) throw std::invalid_argument("NoiseSpec: scales must be nonnegative");
}

double sample_standard_stable(double alpha, Rng& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0))
    throw std::invalid_argument("sample_standard_stable: alpha must be in (0, 2]");
  const double pi = std::numbers::pi;
  if (alpha == 2.0) {
    // CMS limit at the Gaussian boundary: 2 sin(V) sqrt(W) ~ N(0, 2).
    const double v = pi * (rng.uniform_open() - 0.5);
    return 2.0 * std::sin(v) * std::sqrt(rng.exponential());
  }
  if (alpha == 1.0) return std::tan(pi * (rng.uniform_open() - 0.5));
  const double v = pi * (rng.uniform_open() - 0.5);
  const double w = rng.exponential();
  const double t = std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha);
  return t * std::pow(std::cos((1.0 - alpha) * v) / w, (1.0 - alpha) / alpha);
}

double noise_increment(const NoiseSpec& spec, std::size_t node, double dt, Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("noise_increment: dt must be positive");
  const double sigma = spec.scale_at(node);
  if (sigma == 0.0) return 0.0;
  if (spec.family == NoiseFamily::gaussian)
    return sigma * std::sqrt(dt) * (std::numbers::sqrt2 * rng.normal());
  return sigma * std::pow(dt, 1.0 / spec.alpha) * sample_standard_stable(spec.alpha, rng);
}

std::string noise_digest(const NoiseSpec& spec) {
  // FNV-1a over the canonical textual form.
  std::ostringstream os;
  os << (spec.family == NoiseFamily::gaussian ? "gaussian" : "stable") << '|'
     << spec.effective_alpha() << '|' << spec.seed;
  for (double s : spec.scale) os << '|' << s;
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : os.str()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream hex;
  hex << std::hex << h;
  return hex.str();
}

}  // namespace gridfreq
