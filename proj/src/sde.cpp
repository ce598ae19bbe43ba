#include "gridfreq/sde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace gridfreq {

namespace {

// Dense Gaussian elimination with partial pivoting; a is row-major n x n,
// b the right-hand side. Returns false when the matrix is singular.
bool solve_dense(std::vector<double> a, std::vector<double> b, std::size_t n,
                 std::vector<double>& x) {
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
    if (std::abs(a[piv * n + col]) < 1e-300) return false;
    if (piv != col) {
      for (std::size_t c = 0; c < n; ++c) std::swap(a[piv * n + c], a[col * n + c]);
      std::swap(b[piv], b[col]);
    }
    const double inv = 1.0 / a[col * n + col];
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] * inv;
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (std::size_t ri = n; ri-- > 0;) {
    double s = b[ri];
    for (std::size_t c = ri + 1; c < n; ++c) s -= a[ri * n + c] * x[c];
    x[ri] = s / a[ri * n + ri];
  }
  return true;
}

struct Edge {
  std::size_t i, j;
  double k;
};

std::vector<Edge> edge_list(const GridSpec& g) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < g.n; ++i)
    for (std::size_t j = i + 1; j < g.n; ++j)
      if (g.k(i, j) != 0.0) edges.push_back({i, j, g.k(i, j)});
  return edges;
}

void power_residual(const GridSpec& g, const std::vector<Edge>& edges,
                    const std::vector<double>& theta, std::vector<double>& r) {
  r.assign(g.n, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) r[i] = g.power[i];
  for (const auto& e : edges) {
    const double s = e.k * std::sin(theta[e.j] - theta[e.i]);
    r[e.i] += s;
    r[e.j] -= s;
  }
}

double max_abs(const std::vector<double>& v, std::size_t from = 0) {
  double m = 0.0;
  for (std::size_t i = from; i < v.size(); ++i) m = std::max(m, std::abs(v[i]));
  return m;
}

// One Euler-Maruyama step with the right-hand side evaluated at the old state.
void step_impl(State& st, const GridSpec& g, const std::vector<Edge>& edges,
               const std::vector<double>& coeff, const NoiseSpec& noise, double dt,
               std::vector<Rng>& rngs, std::vector<double>& force) {
  force.resize(g.n);
  for (std::size_t i = 0; i < g.n; ++i) force[i] = g.power[i] - coeff[i] * st.omega[i];
  for (const auto& e : edges) {
    const double s = e.k * std::sin(st.theta[e.j] - st.theta[e.i]);
    force[e.i] += s;
    force[e.j] -= s;
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    st.theta[i] += st.omega[i] * dt;
    st.omega[i] += (force[i] * dt + noise_increment(noise, i, dt, rngs[i])) / g.inertia[i];
  }
  st.t += dt;
}

}  // namespace

SimConfig SimConfig::for_samples(double gamma_eff, std::size_t samples, double dt) {
  if (!(gamma_eff > 0.0)) throw std::invalid_argument("SimConfig: gamma_eff must be positive");
  if (samples == 0) throw std::invalid_argument("SimConfig: need at least one sample");
  SimConfig c;
  c.dt = dt;
  c.stride = static_cast<std::size_t>(std::max(1.0, std::ceil(0.1 / (gamma_eff * dt))));
  c.burn_in = static_cast<std::size_t>(std::ceil(10.0 / (gamma_eff * dt)));
  c.steps = c.burn_in + samples * c.stride;
  return c;
}

double bulk_omega(const State& state, const GridSpec& grid) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < grid.n; ++i) {
    num += state.omega[i] * grid.inertia[i];
    den += grid.inertia[i];
  }
  return num / den;
}

std::vector<double> find_fixed_point(const GridSpec& g, double tol) {
  if (g.n == 0) throw std::invalid_argument("find_fixed_point: empty grid");
  const auto edges = edge_list(g);
  std::vector<double> theta(g.n, 0.0), r;
  if (g.n == 1) return theta;

  const std::size_t m = g.n - 1;  // unknowns: theta_2..theta_n, node 1 is reference
  std::vector<double> jac(m * m), rhs(m), delta, trial(g.n), rt;

  auto newton = [&](std::size_t max_iter) {
    power_residual(g, edges, theta, r);
    double rn = max_abs(r, 1);
    for (std::size_t it = 0; it < max_iter && rn > tol; ++it) {
      std::fill(jac.begin(), jac.end(), 0.0);
      for (const auto& e : edges) {
        const double c = e.k * std::cos(theta[e.j] - theta[e.i]);
        if (e.i > 0 && e.j > 0) {
          jac[(e.i - 1) * m + (e.j - 1)] += c;
          jac[(e.j - 1) * m + (e.i - 1)] += c;
        }
        if (e.i > 0) jac[(e.i - 1) * m + (e.i - 1)] -= c;
        if (e.j > 0) jac[(e.j - 1) * m + (e.j - 1)] -= c;
      }
      for (std::size_t i = 0; i < m; ++i) rhs[i] = -r[i + 1];
      if (!solve_dense(jac, rhs, m, delta)) return false;
      double lambda = 1.0;
      while (lambda > 1e-4) {
        trial = theta;
        for (std::size_t i = 0; i < m; ++i) trial[i + 1] += lambda * delta[i];
        power_residual(g, edges, trial, rt);
        const double rtn = max_abs(rt, 1);
        if (rtn < (1.0 - 0.25 * lambda) * rn || rtn <= tol) {
          theta = trial;
          r = rt;
          rn = rtn;
          break;
        }
        lambda *= 0.5;
      }
      if (lambda <= 1e-4) return false;
    }
    return rn <= tol;
  };

  if (newton(50)) return theta;

  // Relaxation fallback: the residual is the negative gradient of the network
  // potential, so a small-step descent settles near a stable equilibrium.
  double kmax = 0.0;
  for (const auto& e : edges) kmax = std::max(kmax, std::abs(e.k));
  const double eta = 0.05 / std::max(1.0, kmax * static_cast<double>(g.n));
  for (std::size_t it = 0; it < 2'000'000; ++it) {
    power_residual(g, edges, theta, r);
    if (max_abs(r, 1) < 1e-3) break;
    for (std::size_t i = 1; i < g.n; ++i) theta[i] += eta * r[i];
  }
  if (newton(100)) return theta;
  throw std::runtime_error("find_fixed_point: no synchronous fixed point at tolerance");
}

void step(State& state, const GridSpec& grid, const NoiseSpec& noise, double dt,
          std::vector<Rng>& rngs) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  if (state.theta.size() != grid.n || state.omega.size() != grid.n)
    throw std::invalid_argument("step: state size does not match grid");
  if (rngs.size() < grid.n) throw std::invalid_argument("step: need one rng per node");
  const auto edges = edge_list(grid);
  std::vector<double> coeff(grid.n), force;
  for (std::size_t i = 0; i < grid.n; ++i) coeff[i] = grid.damping[i] + grid.control_gain[i];
  step_impl(state, grid, edges, coeff, noise, dt, rngs, force);
}

Trajectory simulate(const GridSpec& grid, const NoiseSpec& noise, const SimConfig& config,
                    std::uint64_t run_index) {
  noise.check();
  if (config.steps <= config.burn_in)
    throw std::invalid_argument("simulate: steps must exceed burn_in");
  if (config.stride == 0) throw std::invalid_argument("simulate: stride must be >= 1");

  State st;
  st.theta = find_fixed_point(grid);
  st.omega.assign(grid.n, 0.0);

  std::vector<Rng> rngs;
  rngs.reserve(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) rngs.push_back(derive_rng(noise.seed, run_index, i));

  const auto edges = edge_list(grid);
  std::vector<double> coeff(grid.n), force;
  for (std::size_t i = 0; i < grid.n; ++i) coeff[i] = grid.damping[i] + grid.control_gain[i];

  Trajectory traj;
  const std::size_t samples = (config.steps - config.burn_in) / config.stride;
  traj.times.reserve(samples);
  traj.bulk.reserve(samples);
  if (config.record_nodes) traj.node_omega.assign(grid.n, {});

  for (std::size_t s = 1; s <= config.steps; ++s) {
    step_impl(st, grid, edges, coeff, noise, config.dt, rngs, force);
    for (std::size_t i = 0; i < grid.n; ++i) {
      if (!std::isfinite(st.omega[i]) || !std::isfinite(st.theta[i]))
        throw std::runtime_error("simulate: non-finite state at step " + std::to_string(s) +
                                 ", node " + std::to_string(i + 1));
    }
    if (s > config.burn_in && (s - config.burn_in) % config.stride == 0) {
      traj.times.push_back(st.t);
      traj.bulk.push_back(bulk_omega(st, grid));
      if (config.record_nodes)
        for (std::size_t i = 0; i < grid.n; ++i) traj.node_omega[i].push_back(st.omega[i]);
    }
  }

  traj.meta.grid_digest = grid_digest(grid);
  traj.meta.noise_digest = noise_digest(noise);
  traj.meta.sim = config;
  traj.meta.run_index = run_index;
  traj.meta.seed = noise.seed;
  return traj;
}

void write_trajectory(const Trajectory& traj, const std::string& data_path,
                      const std::string& meta_path) {
  std::ofstream out(data_path);
  if (!out) throw std::runtime_error("cannot write trajectory: " + data_path);
  out << "# time bulk_omega";
  for (std::size_t i = 0; i < traj.node_omega.size(); ++i) out << " omega_" << i + 1;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.12g", v);
    out << buf;
  };
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    put(traj.times[s]);
    out << ' ';
    put(traj.bulk[s]);
    for (const auto& col : traj.node_omega) {
      out << ' ';
      put(col[s]);
    }
    out << '\n';
  }

  nlohmann::ordered_json j;
  j["grid_digest"] = traj.meta.grid_digest;
  j["noise_digest"] = traj.meta.noise_digest;
  j["run_index"] = traj.meta.run_index;
  j["seed"] = traj.meta.seed;
  j["dt"] = traj.meta.sim.dt;
  j["steps"] = traj.meta.sim.steps;
  j["burn_in"] = traj.meta.sim.burn_in;
  j["stride"] = traj.meta.sim.stride;
  j["samples"] = traj.times.size();
  std::ofstream meta(meta_path);
  if (!meta) throw std::runtime_error("cannot write trajectory sidecar: " + meta_path);
  meta << j.dump(2) << '\n';
}

}  // namespace gridfreq
