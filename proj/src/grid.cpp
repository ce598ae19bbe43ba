#include "gridfreq/grid.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace gridfreq {

namespace {

constexpr double kPowerBalanceTol = 1e-12;
constexpr double kUniformRelTol = 1e-9;

// Test-network inertia draw (uniform on [0.1, 10]) and the heterogeneous
// damping realization with sum(damping) / sum(inertia) = 0.1 exactly.
const std::vector<double> kTestInertia = {1.1, 1.7, 7.0, 8.7, 3.2, 9.8, 0.7, 5.8, 0.2, 0.9};
const std::vector<double> kHeterogeneousDamping = {0.306, 0.494, 0.158, 0.188, 0.573,
                                                   0.089, 0.592, 0.849, 0.425, 0.236};

// Default topology: ring 1-..-10-1 plus chords (1,6) and (3,8), 0-based here.
// Loads stay light at K=4, |P|=1; the topology is overridable through grid
// JSON files.
const std::vector<std::pair<std::size_t, std::size_t>> kTestEdges = {
    {0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 8}, {8, 9}, {9, 0},
    {0, 5}, {2, 7}};

bool connected(const GridSpec& g) {
  if (g.n == 0) return false;
  std::vector<char> seen(g.n, 0);
  std::vector<std::size_t> stack = {0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t i = stack.back();
    stack.pop_back();
    for (std::size_t j = 0; j < g.n; ++j) {
      if (!seen[j] && g.k(i, j) != 0.0) {
        seen[j] = 1;
        stack.push_back(j);
      }
    }
  }
  for (char s : seen)
    if (!s) return false;
  return true;
}

}  // namespace

Scenario scenario_from_string(const std::string& tag) {
  if (tag == "homogeneous") return Scenario::homogeneous;
  if (tag == "heterogeneous-damping") return Scenario::heterogeneous_damping;
  if (tag == "generator-only") return Scenario::generator_only;
  if (tag == "custom") return Scenario::custom;
  throw std::invalid_argument("unknown scenario tag: " + tag);
}

std::string to_string(Scenario scenario) {
  switch (scenario) {
    case Scenario::homogeneous: return "homogeneous";
    case Scenario::heterogeneous_damping: return "heterogeneous-damping";
    case Scenario::generator_only: return "generator-only";
    case Scenario::custom: return "custom";
  }
  throw std::logic_error("unreachable scenario");
}

double GridSpec::total_inertia() const {
  return std::accumulate(inertia.begin(), inertia.end(), 0.0);
}

std::vector<std::string> validate(const GridSpec& g) {
  std::vector<std::string> violations;
  auto sized = [&](const std::vector<double>& v) { return v.size() == g.n; };
  if (g.n == 0) violations.push_back("empty grid (n = 0)");
  if (!sized(g.inertia) || !sized(g.damping) || !sized(g.control_gain) || !sized(g.power) ||
      g.coupling.size() != g.n * g.n) {
    violations.push_back("field lengths inconsistent with node count");
    return violations;  // index checks below would be meaningless
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    if (!(g.inertia[i] > 0.0))
      violations.push_back("nonpositive inertia at node " + std::to_string(i + 1));
    if (g.damping[i] < 0.0)
      violations.push_back("negative damping at node " + std::to_string(i + 1));
    if (g.control_gain[i] < 0.0)
      violations.push_back("negative control gain at node " + std::to_string(i + 1));
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    if (g.k(i, i) != 0.0)
      violations.push_back("nonzero coupling diagonal at node " + std::to_string(i + 1));
    for (std::size_t j = i + 1; j < g.n; ++j) {
      if (g.k(i, j) != g.k(j, i)) {
        violations.push_back("asymmetric coupling between nodes " + std::to_string(i + 1) +
                             " and " + std::to_string(j + 1));
      }
    }
  }
  const double psum = std::accumulate(g.power.begin(), g.power.end(), 0.0);
  if (std::abs(psum) > kPowerBalanceTol) {
    std::ostringstream os;
    os << "unbalanced power (sum = " << psum << ")";
    violations.push_back(os.str());
  }
  if (g.n > 0 && !connected(g)) violations.push_back("coupling graph is not connected");
  return violations;
}

GridSpec build_test_grid(Scenario scenario, double kappa_c) {
  if (kappa_c < 0.0) throw std::invalid_argument("build_test_grid: kappa_c must be >= 0");
  if (scenario == Scenario::custom)
    throw std::invalid_argument("build_test_grid: custom grids come from a grid file");

  GridSpec g;
  g.n = 10;
  g.power.assign({-1, -1, -1, -1, -1, +1, +1, +1, +1, +1});
  g.coupling.assign(g.n * g.n, 0.0);
  for (auto [i, j] : kTestEdges) g.set_k(i, j, 4.0);

  switch (scenario) {
    case Scenario::homogeneous:
      g.inertia = kTestInertia;
      g.damping.resize(g.n);
      for (std::size_t i = 0; i < g.n; ++i) g.damping[i] = 0.1 * g.inertia[i];
      break;
    case Scenario::heterogeneous_damping:
      g.inertia = kTestInertia;
      g.damping = kHeterogeneousDamping;
      break;
    case Scenario::generator_only:
      g.inertia.assign(g.n, 1.0);
      g.damping.assign(g.n, 0.1);
      break;
    default:
      throw std::logic_error("unreachable scenario");
  }

  g.control_gain.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    const bool controlled = scenario != Scenario::generator_only || g.power[i] > 0.0;
    g.control_gain[i] = controlled ? 10.0 * kappa_c * g.damping[i] : 0.0;
  }
  return g;
}

EffectiveGamma effective_gamma(const GridSpec& g) {
  EffectiveGamma eg;
  eg.per_node.resize(g.n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < g.n; ++i) {
    const double coeff = g.damping[i] + g.control_gain[i];
    eg.per_node[i] = coeff / g.inertia[i];
    num += coeff;
    den += g.inertia[i];
  }
  eg.bulk = num / den;
  eg.uniform = true;
  for (double r : eg.per_node) {
    const double ref = std::max(std::abs(eg.bulk), 1e-300);
    if (std::abs(r - eg.bulk) > kUniformRelTol * ref) {
      eg.uniform = false;
      break;
    }
  }
  return eg;
}

GridSpec load_grid_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open grid file: " + path);
  nlohmann::json j;
  in >> j;

  GridSpec g;
  g.n = j.at("n").get<std::size_t>();
  g.inertia = j.at("inertia").get<std::vector<double>>();
  g.damping = j.at("damping").get<std::vector<double>>();
  g.control_gain = j.at("control_gain").get<std::vector<double>>();
  g.power = j.at("power").get<std::vector<double>>();
  g.coupling.assign(g.n * g.n, 0.0);
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 3)
      throw std::runtime_error("grid file: each edge must be [i, j, K]");
    const auto i = e[0].get<std::size_t>();
    const auto jj = e[1].get<std::size_t>();
    if (i >= g.n || jj >= g.n || i == jj)
      throw std::runtime_error("grid file: bad edge endpoints");
    if (g.k(i, jj) != 0.0) throw std::runtime_error("grid file: duplicate edge");
    g.set_k(i, jj, e[2].get<double>());
  }
  return g;
}

void save_grid_json(const GridSpec& g, const std::string& path) {
  nlohmann::ordered_json j;
  j["n"] = g.n;
  j["inertia"] = g.inertia;
  j["damping"] = g.damping;
  j["control_gain"] = g.control_gain;
  j["power"] = g.power;
  auto edges = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t jj = i + 1; jj < g.n; ++jj)
      if (g.k(i, jj) != 0.0) edges.push_back({i, jj, g.k(i, jj)});
  j["edges"] = edges;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write grid file: " + path);
  out << j.dump(2) << '\n';
}

std::string grid_digest(const GridSpec& g) {
  std::ostringstream os;
  os.precision(17);
  os << g.n;
  auto dump = [&](const std::vector<double>& v) {
    for (double x : v) os << '|' << x;
  };
  dump(g.inertia);
  dump(g.damping);
  dump(g.control_gain);
  dump(g.power);
  dump(g.coupling);
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
