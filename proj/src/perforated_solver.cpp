#include "dsf/perforated_solver.hpp"

#include <cmath>
#include <numbers>

#include "dsf/errors.hpp"
#include "dsf/fast_poisson.hpp"

namespace dsf {

namespace {

void require_3d(const ProblemConfig& cfg) {
  if (cfg.n != 3) throw ConfigError("grid solvers support n = 3 only (n = " + std::to_string(cfg.n) + ")");
}

double lattice_radius(double h) { return h / (4.0 * std::numbers::pi * kLatticeGreenOrigin); }

MonopoleState monopoles(const ParticleCoupling& pc, std::span<const double> u, double h) {
  MonopoleState s;
  const std::size_t n = pc.unknown.size();
  s.q.resize(n);
  s.U.resize(n);
  double qmax = 0.0, rmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double up = u[pc.unknown[j]];
    s.q[j] = -pc.tau[j] * up;
    s.U[j] = up - s.q[j] * kLatticeGreenOrigin / h;
    qmax = std::max(qmax, std::abs(s.q[j]));
    rmax = std::max(rmax, std::abs(s.q[j] + pc.kappa[j] * s.U[j]));
  }
  s.closure_residual = qmax > 0.0 ? rmax / qmax : rmax;
  return s;
}

}  // namespace

Grid eps_grid(const ProblemConfig& cfg) {
  require_3d(cfg);
  const int m = cfg.periods();
  const int cells = cfg.grid_nodes > 0 ? cfg.grid_nodes - 1 : 4 * m;
  if (cells < 4 * m)
    throw ConfigError("grid too coarse for eps-solves: need h <= eps/4 (" + std::to_string(4 * m + 1) +
                      " nodes per axis or more)");
  if (cells % (2 * m) != 0)
    throw ConfigError("grid_nodes - 1 must be a multiple of 2/eps so particle centers fall on nodes");
  const Grid g(cells);
  if (!(cfg.particle_radius() < lattice_radius(g.spacing())))
    throw ConfigError("grid too fine for the point-particle model: particle radius " +
                      format_double(cfg.particle_radius()) + " must be below " +
                      format_double(lattice_radius(g.spacing())));
  return g;
}

ParticleCoupling couple_particles(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid) {
  require_3d(cfg);
  if (layer.n != 3) throw ConfigError("particle layer dimension does not match n = 3");
  const double h = grid.spacing();
  const double radius = layer.radius;
  if (layer.count() > 0 && !(radius < lattice_radius(h)))
    throw ConfigError("grid too fine for the point-particle model: particle radius " + format_double(radius) +
                      " must be below " + format_double(lattice_radius(h)));
  const auto c = constants(3, cfg.c0);
  const double w_h = kLatticeGreenOrigin / h;
  ParticleCoupling pc;
  std::vector<char> used(grid.unknown_count(), 0);
  for (std::size_t j = 0; j < layer.count(); ++j) {
    const auto x = layer.center(j);
    int idx[3];
    for (int d = 0; d < 3; ++d) {
      const double t = x[static_cast<std::size_t>(d)] / h;
      idx[d] = static_cast<int>(std::lround(t));
      if (std::abs(t - idx[d]) > 1e-9 * std::max(1.0, t))
        throw ConfigError("particle center is not a grid node; refine the grid to a multiple of 2/eps cells");
    }
    if (grid.kind(idx[0], idx[1], idx[2]) != NodeKind::interior)
      throw ConfigError("particle center must be an interior grid node");
    const std::size_t u = grid.unknown(idx[0], idx[1], idx[2]);
    if (used[u]) throw ConfigError("two particles share a grid node");
    used[u] = 1;
    const double sigma = effective_robin(cfg.a(x), c);
    const double kappa = sigma * layer.eps * layer.eps;
    if (!(kappa * w_h < 1.0)) throw ConfigError("particle absorption too strong for the grid");
    pc.unknown.push_back(u);
    pc.kappa.push_back(kappa);
    pc.tau.push_back(kappa / (1.0 - kappa * w_h));
    pc.energy_coeff.push_back(cfg.b.trace(x) / 3.0 * (1.0 / (4.0 * std::numbers::pi * radius) - w_h));
  }
  return pc;
}

ControlProblem eps_problem(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid) {
  const auto pc = couple_particles(cfg, layer, grid);
  const int m = grid.cells();
  auto sys = assemble_poisson(grid, BoundaryField(grid));
  ControlProblem cp(grid);
  cp.matrix = std::move(sys.matrix);
  cp.cost_diag.assign(grid.unknown_count(), 0.0);
  std::vector<double> shift(static_cast<std::size_t>(m), 0.0);
  const double per_layer = static_cast<double>(m - 1) * (m - 1);
  for (std::size_t j = 0; j < pc.unknown.size(); ++j) {
    cp.matrix.add_to_diagonal(pc.unknown[j], pc.tau[j]);
    cp.cost_diag[pc.unknown[j]] = pc.energy_coeff[j] * pc.tau[j] * pc.tau[j];
    shift[static_cast<std::size_t>(grid.unknown_to_ijk(pc.unknown[j])[2])] += pc.tau[j] / per_layer;
  }
  cp.preconditioner = std::make_shared<SpectralPreconditioner>(grid, std::move(shift));
  cp.load = load_vector(grid, cfg.f);
  cp.bform = std::make_shared<BForm>(grid, cfg.b);
  cp.target = ScalarField::sample(grid, [&](double x, double y, double z) { return cfg.u_target(x, y, z); });
  cp.eta = cfg.eta;
  cp.big_n = cfg.big_n;
  cp.linear = SolverParameters{cfg.tol.linear, cfg.tol.max_iterations};
  return cp;
}

std::pair<ScalarField, MonopoleState> solve_state_eps(const ProblemConfig& cfg, const ParticleLayer& layer,
                                                      const BoundaryField& v) {
  for (double x : v.values)
    if (!std::isfinite(x)) throw ConfigError("control values must be finite");
  const auto cp = eps_problem(cfg, layer, v.grid);
  const auto u = cp.state(v);
  auto mono = monopoles(couple_particles(cfg, layer, v.grid), u, v.grid.spacing());
  mono.iterations = static_cast<int>(cp.linear_iterations);
  return {ScalarField::from_unknowns(v.grid, u), std::move(mono)};
}

double eval_J_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const BoundaryField& v) {
  const auto cp = eps_problem(cfg, layer, v.grid);
  return cp.cost(v, cp.state(v));
}

EpsSolution optimize_eps(const ProblemConfig& cfg, const ParticleLayer& layer) {
  return optimize_eps(cfg, layer, BoundaryField(eps_grid(cfg)));
}

EpsSolution optimize_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const BoundaryField& v_start) {
  const Grid& grid = v_start.grid;
  const auto cp = eps_problem(cfg, layer, grid);
  const auto r = minimize(cp, v_start, cfg.tol.optimizer, cfg.tol.max_iterations);
  EpsSolution s(grid);
  s.u_eps = ScalarField::from_unknowns(grid, r.u);
  s.p_eps = ScalarField::from_unknowns(grid, r.p);
  s.v_eps = r.v;
  s.monopoles = monopoles(couple_particles(cfg, layer, grid), r.u, grid.spacing());
  s.monopoles.iterations = static_cast<int>(cp.linear_iterations);
  s.j_eps = r.cost;
  s.energy_eps = energy_eps(cfg, layer, grid);
  s.iterations = r.iterations;
  s.residuals = r.history;
  return s;
}

double energy_eps(const ProblemConfig& cfg, const ParticleLayer& layer) {
  return energy_eps(cfg, layer, eps_grid(cfg));
}

double energy_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid) {
  ProblemConfig plain = cfg;
  plain.b = MatrixField::identity(3);
  plain.u_target = CoefficientField::constant(0.0);
  const auto cp = eps_problem(plain, layer, grid);
  return cp.tracking(cp.state(BoundaryField(grid)));
}

}  // namespace dsf
