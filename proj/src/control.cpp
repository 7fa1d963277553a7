#include "dsf/control.hpp"

#include <cmath>

#include "dsf/errors.hpp"

namespace dsf {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace

std::vector<double> ControlProblem::solve_linear(std::span<const double> rhs) const {
  std::vector<double> x(rhs.size(), 0.0);
  const auto stats = preconditioner ? pcg(matrix, rhs, x, *preconditioner, linear)
                                    : pcg(matrix, rhs, x, JacobiPreconditioner(matrix), linear);
  ++solves;
  linear_iterations += stats.iterations;
  return x;
}

std::vector<double> ControlProblem::state(const BoundaryField& v) const {
  require_same_grid(grid, v.grid, "state");
  auto rhs = control_load(v);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += load[i];
  return solve_linear(rhs);
}

namespace {

std::vector<double> adjoint_rhs(const ControlProblem& cp, std::span<const double> u, bool with_target) {
  ScalarField w = ScalarField::from_unknowns(cp.grid, u);
  if (with_target)
    for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] -= cp.target.values[i];
  ScalarField sw(cp.grid);
  sw.values = cp.bform->apply(w.values);
  auto rhs = sw.restrict_to_unknowns();
  if (!cp.cost_diag.empty())
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += cp.cost_diag[i] * u[i];
  return rhs;
}

}  // namespace

std::vector<double> ControlProblem::adjoint(std::span<const double> u) const {
  return solve_linear(adjoint_rhs(*this, u, true));
}

double ControlProblem::tracking(std::span<const double> u) const {
  ScalarField w = ScalarField::from_unknowns(grid, u);
  for (std::size_t i = 0; i < w.values.size(); ++i) w.values[i] -= target.values[i];
  double t = bform->energy(w.values);
  if (!cost_diag.empty())
    for (std::size_t i = 0; i < u.size(); ++i) t += cost_diag[i] * u[i] * u[i];
  return t;
}

double ControlProblem::cost(const BoundaryField& v, std::span<const double> u) const {
  const double h = grid.spacing();
  double vv = 0.0;
  for (double x : v.values) vv += x * x;
  return 0.5 * eta * tracking(u) + 0.5 * big_n * h * h * vv;
}

BoundaryField ControlProblem::gradient(const BoundaryField& v, std::span<const double> p) const {
  BoundaryField g(grid);
  for (std::size_t q = 0; q < g.values.size(); ++q) g.values[q] = big_n * v.values[q] + eta * p[q];
  return g;
}

double ControlProblem::optimality_residual(const BoundaryField& v, std::span<const double> p) const {
  double gg = 0.0, pp = 0.0;
  for (std::size_t q = 0; q < v.values.size(); ++q) {
    const double g = big_n * v.values[q] + eta * p[q];
    gg += g * g;
    pp += eta * p[q] * eta * p[q];
  }
  return pp > 0.0 ? std::sqrt(gg / pp) : std::sqrt(gg);
}

ControlResult minimize(const ControlProblem& cp, const BoundaryField& v_start, double tol, int max_iterations) {
  if (!(tol > 0.0)) throw ConfigError("optimizer tolerance must be positive");
  if (!(cp.big_n > 0.0) || !(cp.eta > 0.0)) throw ConfigError("eta and N must be positive");
  const std::size_t ng = cp.grid.gamma0_count();
  ControlResult res(cp.grid);
  res.v = v_start;

  // Linear part of v -> P, used for Hessian products.
  auto p_lin = [&](const std::vector<double>& d) {
    BoundaryField dv(cp.grid);
    dv.values = d;
    const auto du = cp.solve_linear(control_load(dv));
    auto dp = cp.solve_linear(adjoint_rhs(cp, du, false));
    return std::pair{du, dp};
  };

  int total = 0;
  constexpr int kRestarts = 4;
  for (int restart = 0; restart <= kRestarts; ++restart) {
    res.u = cp.state(res.v);
    res.p = cp.adjoint(res.u);
    res.residual = cp.optimality_residual(res.v, res.p);
    if (restart == 0)
      res.history.push_back(res.residual);
    else
      res.history.back() = res.residual;
    if (res.residual <= tol) break;
    if (restart == kRestarts || total >= max_iterations) {
      res.iterations = total;
      throw SolverError("control optimization did not reach the tolerance", res.residual);
    }
    // r = -(N v + eta P), conjugate directions in the Gamma_0 coefficient space.
    std::vector<double> r(ng), d(ng), hd(ng);
    for (std::size_t q = 0; q < ng; ++q) r[q] = -(cp.big_n * res.v.values[q] + cp.eta * res.p[q]);
    d = r;
    double rr = dot(r, r);
    while (total < max_iterations) {
      const auto [du, dp] = p_lin(d);
      for (std::size_t q = 0; q < ng; ++q) hd[q] = cp.big_n * d[q] + cp.eta * dp[q];
      const double dhd = dot(d, hd);
      if (!(dhd > 0.0)) break;
      const double alpha = rr / dhd;
      axpy(alpha, d, res.v.values);
      axpy(alpha, du, res.u);
      axpy(alpha, dp, res.p);
      axpy(-alpha, hd, r);
      ++total;
      const double rr_new = dot(r, r);
      double pp = 0.0;
      for (std::size_t q = 0; q < ng; ++q) pp += cp.eta * res.p[q] * cp.eta * res.p[q];
      const double est = pp > 0.0 ? std::sqrt(rr_new / pp) : std::sqrt(rr_new);
      res.history.push_back(est);
      if (est <= 0.25 * tol) break;
      const double beta = rr_new / rr;
      rr = rr_new;
      for (std::size_t q = 0; q < ng; ++q) d[q] = r[q] + beta * d[q];
    }
  }
  res.iterations = total;
  res.cost = cp.cost(res.v, res.u);
  return res;
}

}  // namespace dsf
