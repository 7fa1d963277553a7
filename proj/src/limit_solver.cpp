#include "dsf/limit_solver.hpp"

#include <cmath>

#include "dsf/errors.hpp"

namespace dsf {

namespace {

void require_3d(const ProblemConfig& cfg) {
  if (cfg.n != 3) throw ConfigError("grid solvers support n = 3 only (n = " + std::to_string(cfg.n) + ")");
}

SolverParameters linear_parameters(const ProblemConfig& cfg) {
  return SolverParameters{cfg.tol.linear, cfg.tol.max_iterations};
}

// Per Gamma_0 node: effective Robin coefficient and a/(a+cn).
struct BoundaryCoefficients {
  BoundaryField robin;
  BoundaryField ratio;
  BoundaryField trb;
  explicit BoundaryCoefficients(const Grid& g) : robin(g), ratio(g), trb(g) {}
};

BoundaryCoefficients boundary_coefficients(const ProblemConfig& cfg, const Grid& g) {
  const auto c = constants(cfg.n, cfg.c0);
  BoundaryCoefficients bc(g);
  const int m = g.cells();
  for (int j = 1; j < m; ++j)
    for (int i = 1; i < m; ++i) {
      const auto x = g.coord(i, j, 0);
      const double a = cfg.a(x);
      bc.robin.at(i, j) = effective_robin(a, c);
      bc.ratio.at(i, j) = a / (a + c.cn);
      bc.trb.at(i, j) = cfg.b.trace(x);
    }
  return bc;
}

}  // namespace

Grid limit_grid(const ProblemConfig& cfg) {
  require_3d(cfg);
  if (cfg.grid_nodes > 0) return Grid(cfg.grid_nodes - 1);
  return Grid(4 * cfg.periods());
}

ControlProblem limit_problem(const ProblemConfig& cfg, const Grid& grid) {
  require_3d(cfg);
  const auto c = constants(cfg.n, cfg.c0);
  const auto bc = boundary_coefficients(cfg, grid);
  auto sys = assemble_poisson(grid, bc.robin);
  ControlProblem cp(grid);
  cp.matrix = std::move(sys.matrix);
  cp.preconditioner = sys.preconditioner;
  cp.load = load_vector(grid, cfg.f);
  const double h = grid.spacing();
  cp.cost_diag.assign(grid.unknown_count(), 0.0);
  for (std::size_t q = 0; q < grid.gamma0_count(); ++q) {
    const double s = bc.ratio.values[q];
    cp.cost_diag[q] = h * h * c.a2 * bc.trb.values[q] * s * s;
  }
  cp.bform = std::make_shared<BForm>(grid, cfg.b);
  cp.target = ScalarField::sample(grid, [&](double x, double y, double z) { return cfg.u_target(x, y, z); });
  cp.eta = cfg.eta;
  cp.big_n = cfg.big_n;
  cp.linear = linear_parameters(cfg);
  return cp;
}

ScalarField solve_state_limit(const ProblemConfig& cfg, const BoundaryField& v) {
  for (double x : v.values)
    if (!std::isfinite(x)) throw ConfigError("control values must be finite");
  const auto cp = limit_problem(cfg, v.grid);
  return ScalarField::from_unknowns(v.grid, cp.state(v));
}

ScalarField solve_adjoint_limit(const ProblemConfig& cfg, const ScalarField& u0) {
  const auto cp = limit_problem(cfg, u0.grid);
  return ScalarField::from_unknowns(u0.grid, cp.adjoint(u0.restrict_to_unknowns()));
}

LimitSolution solve_coupled_limit(const ProblemConfig& cfg) { return solve_coupled_limit(cfg, limit_grid(cfg)); }

LimitSolution solve_coupled_limit(const ProblemConfig& cfg, const Grid& grid) {
  return solve_coupled_limit(cfg, BoundaryField(grid));
}

LimitSolution solve_coupled_limit(const ProblemConfig& cfg, const BoundaryField& v_start) {
  const Grid& grid = v_start.grid;
  const auto cp = limit_problem(cfg, grid);
  const auto r = minimize(cp, v_start, cfg.tol.optimizer, cfg.tol.max_iterations);
  LimitSolution s(grid);
  s.u0 = ScalarField::from_unknowns(grid, r.u);
  s.p0 = ScalarField::from_unknowns(grid, r.p);
  s.v0 = r.v;
  s.j0_value = r.cost;
  s.iterations = r.iterations;
  s.residuals = r.history;
  return s;
}

double eval_J0(const ProblemConfig& cfg, const BoundaryField& v, const ScalarField& u0) {
  require_same_grid(v.grid, u0.grid, "eval_J0");
  const auto cp = limit_problem(cfg, v.grid);
  return cp.cost(v, u0.restrict_to_unknowns());
}

UncontrolledLimit solve_uncontrolled_limit(const ProblemConfig& cfg) {
  return solve_uncontrolled_limit(cfg, limit_grid(cfg));
}

UncontrolledLimit solve_uncontrolled_limit(const ProblemConfig& cfg, const Grid& grid) {
  require_3d(cfg);
  const auto c = constants(cfg.n, cfg.c0);
  const auto bc = boundary_coefficients(cfg, grid);
  auto sys = assemble_poisson(grid, bc.robin);
  sys.rhs = load_vector(grid, cfg.f);
  sys.params = linear_parameters(cfg);
  UncontrolledLimit out(grid);
  out.u0 = solve(sys);

  const auto u = out.u0.restrict_to_unknowns();
  const BForm laplace(grid, MatrixField::identity(3));
  ScalarField su(grid);
  su.values = laplace.apply(out.u0.values);
  auto rhs = su.restrict_to_unknowns();
  const double h = grid.spacing();
  double boundary = 0.0;
  for (std::size_t q = 0; q < grid.gamma0_count(); ++q) {
    const double s = bc.ratio.values[q];
    const double d = h * h * c.a1 * s * s;
    rhs[q] += d * u[q];
    boundary += d * u[q] * u[q];
  }
  sys.rhs = rhs;
  out.p0_aux = solve(sys);
  out.energy_limit = laplace.energy(out.u0.values) + boundary;
  return out;
}

}  // namespace dsf
