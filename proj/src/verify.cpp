#include "dsf/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "dsf/errors.hpp"
#include "dsf/limit_solver.hpp"
#include "dsf/perforated_solver.hpp"

namespace dsf {

namespace {

// Solves a tridiagonal system in place: lower/diag/upper, rhs -> solution.
void thomas(std::vector<double>& lower, std::vector<double>& diag, std::vector<double>& upper,
            std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const double w = lower[i] / diag[i - 1];
    diag[i] -= w * upper[i - 1];
    rhs[i] -= w * rhs[i - 1];
  }
  rhs[n - 1] /= diag[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] = (rhs[i] - upper[i] * rhs[i + 1]) / diag[i];
}

// int_r0^r1 r^(1-n) dr
double inverse_power_integral(int n, double r0, double r1) {
  return (std::pow(r0, 2 - n) - std::pow(r1, 2 - n)) / (n - 2);
}

int lattice_count(double eps) {
  if (!(eps > 0.0)) throw DomainError("eps must be positive");
  const double m = std::round(1.0 / eps);
  if (std::abs(1.0 / eps - m) > 1e-9 / eps || m < 2) throw DomainError("1/eps must be an integer >= 2");
  return static_cast<int>(m);
}

}  // namespace

double radial_robin_oracle(int n, double c0, double eps, double a_val, int radial_nodes) {
  if (n < 3) throw DomainError("radial oracle needs n >= 3");
  if (radial_nodes < 1000) throw DomainError("radial oracle needs at least 1000 nodes");
  if (!(a_val > 0.0) || !(c0 > 0.0) || !(eps > 0.0)) throw DomainError("radial oracle needs positive data");
  const double alpha = (n - 1.0) / (n - 2.0);
  const double a = c0 * std::pow(eps, alpha);
  const double outer = eps / 4.0;
  if (!(a < outer)) throw DomainError("radial shell is degenerate: particle radius >= eps/4");
  const double robin = a_val * std::pow(eps, -alpha);

  const auto nodes = static_cast<std::size_t>(radial_nodes);
  std::vector<double> r(nodes), k(nodes - 1);
  const double ratio = std::log(outer / a);
  for (std::size_t i = 0; i < nodes; ++i) r[i] = a * std::exp(ratio * static_cast<double>(i) / (nodes - 1));
  r.back() = outer;
  for (std::size_t i = 0; i + 1 < nodes; ++i) k[i] = 1.0 / inverse_power_integral(n, r[i], r[i + 1]);

  // Unknowns u_0 .. u_{N-2}; u_{N-1} = 1.
  const std::size_t m = nodes - 1;
  std::vector<double> lower(m, 0.0), diag(m, 0.0), upper(m, 0.0), rhs(m, 0.0);
  diag[0] = k[0] + std::pow(a, n - 1) * robin;
  upper[0] = -k[0];
  for (std::size_t i = 1; i < m; ++i) {
    lower[i] = -k[i - 1];
    diag[i] = k[i - 1] + k[i];
    if (i + 1 < m) upper[i] = -k[i];
  }
  rhs[m - 1] = k[m - 1];
  thomas(lower, diag, upper, rhs);
  const double u1 = m > 1 ? rhs[1] : 1.0;
  const double flux = constants(n, 1.0).omega_n * k[0] * (u1 - rhs[0]);
  return flux / std::pow(eps, n - 1);
}

double default_test_function(std::span<const double> x) {
  double v = 1.0;
  for (std::size_t d = 0; d + 1 < x.size(); ++d) {
    const double s = (x[d] - 0.5) / 0.4;
    if (std::abs(s) >= 1.0) return 0.0;
    v *= std::exp(-1.0 / (1.0 - s * s));
  }
  const double top = 1.0 - x.back();
  return v * top * top;
}

std::vector<Lemma21Row> lemma21_check(const MatrixField& b, const TestFunction& phi, std::span<const double> eps_list,
                                      double c0) {
  const int n = b.dimension();
  if (n < 3) throw DomainError("lemma check needs n >= 3");
  if (!phi) throw DomainError("test function is empty");
  const auto c = constants(n, c0);
  const int lateral = n - 1;

  // Right side: trapezoid over the face (lattice of `pts` points per axis).
  const int pts = n == 3 ? 1025 : 65;
  double face = 0.0;
  {
    std::vector<int> idx(static_cast<std::size_t>(lateral), 0);
    std::vector<double> x(static_cast<std::size_t>(n), 0.0);
    for (;;) {
      double w = 1.0;
      for (int d = 0; d < lateral; ++d) {
        const int i = idx[static_cast<std::size_t>(d)];
        x[static_cast<std::size_t>(d)] = i / double(pts - 1);
        w *= (i == 0 || i == pts - 1 ? 0.5 : 1.0) / (pts - 1);
      }
      const double v = phi(x);
      if (!std::isfinite(v)) throw DomainError("test function is not finite");
      if (v != 0.0) face += w * b.trace(x) * v;
      int d = 0;
      while (d < lateral && ++idx[static_cast<std::size_t>(d)] == pts) idx[static_cast<std::size_t>(d++)] = 0;
      if (d == lateral) break;
    }
  }
  const double rhs = std::pow(c0, n - 2) * (n - 2) * c.omega_n / n * face;

  std::vector<Lemma21Row> rows;
  for (double eps : eps_list) {
    const int m = lattice_count(eps);
    const double a = c0 * std::pow(eps, (n - 1.0) / (n - 2.0));
    if (!(a < eps / 4.0)) throw DomainError("particle radius must be below eps/4");
    const double shell = std::pow(a, 2 * (n - 2)) * (n - 2) * (n - 2) * c.omega_n *
                         inverse_power_integral(n, a, eps / 4.0);
    double lhs = 0.0;
    std::vector<int> j(static_cast<std::size_t>(lateral), 1);
    std::vector<double> p(static_cast<std::size_t>(n));
    p.back() = eps / 2.0;
    if (m > 1)
      for (;;) {
        for (int d = 0; d < lateral; ++d) p[static_cast<std::size_t>(d)] = eps * j[static_cast<std::size_t>(d)];
        const double v = phi(p);
        if (!std::isfinite(v)) throw DomainError("test function is not finite");
        if (v != 0.0) lhs += shell * b.trace(p) / n * v;
        int d = 0;
        while (d < lateral && ++j[static_cast<std::size_t>(d)] == m) j[static_cast<std::size_t>(d++)] = 1;
        if (d == lateral) break;
      }
    rows.push_back({eps, lhs, rhs, rel_gap(lhs, rhs)});
  }
  return rows;
}

double rel_gap(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::abs(b);
}

GradientCheck gradient_check(SolverKind kind, const ProblemConfig& cfg, int n_dirs, std::uint64_t seed,
                             const ParticleLayer* layer, const BoundaryField* base, double t) {
  if (!(t > 1e-300) || !std::isfinite(t)) throw DomainError("finite-difference step underflows");
  if (n_dirs < 1) throw DomainError("gradient check needs at least one direction");
  const Grid grid = base ? base->grid : (kind == SolverKind::limit ? limit_grid(cfg) : eps_grid(cfg));
  const ControlProblem cp = kind == SolverKind::limit
                                ? limit_problem(cfg, grid)
                                : eps_problem(cfg, layer ? *layer : build_particle_layer(cfg), grid);
  const BoundaryField v = base ? *base : BoundaryField(grid);
  const auto u = cp.state(v);
  const auto g = cp.gradient(v, cp.adjoint(u));
  const double h2 = grid.spacing() * grid.spacing();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  GradientCheck out;
  for (int k = 0; k < n_dirs; ++k) {
    BoundaryField d(grid);
    double norm = 0.0;
    for (double& x : d.values) {
      x = normal(rng);
      norm += h2 * x * x;
    }
    norm = std::sqrt(norm);
    for (double& x : d.values) x /= norm;
    double ad = 0.0;
    for (std::size_t q = 0; q < d.values.size(); ++q) ad += h2 * g.values[q] * d.values[q];
    BoundaryField vp = v, vm = v;
    for (std::size_t q = 0; q < d.values.size(); ++q) {
      vp.values[q] += t * d.values[q];
      vm.values[q] -= t * d.values[q];
    }
    const double fd = (cp.cost(vp, cp.state(vp)) - cp.cost(vm, cp.state(vm))) / (2.0 * t);
    const double scale = std::max(std::abs(ad), std::abs(fd));
    const double err = scale > 0.0 ? std::abs(fd - ad) / scale : 0.0;
    out.max_rel_error = std::max(out.max_rel_error, err);
    out.adjoint_derivative.push_back(ad);
    out.fd_derivative.push_back(fd);
  }
  return out;
}

namespace {

bool decreasing_or_zero(const std::vector<ConvergenceRow>& rows, double ConvergenceRow::*field) {
  bool all_zero = true;
  for (const auto& r : rows) all_zero = all_zero && r.*field == 0.0;
  if (all_zero) return true;
  for (std::size_t i = 1; i < rows.size(); ++i)
    if (!(rows[i].*field < rows[i - 1].*field)) return false;
  return true;
}

ScalarField restrict_nested(const ScalarField& fine, const Grid& coarse) {
  const int r = fine.grid.cells() / coarse.cells();
  ScalarField out(coarse);
  const int m = coarse.cells();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) out.at(i, j, k) = fine.at(i * r, j * r, k * r);
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

bool ConvergenceReport::trend_ok() const { return trend_violation().empty(); }

std::string ConvergenceReport::trend_violation() const {
  if (!decreasing_or_zero(rows, &ConvergenceRow::rel_cost_gap)) return "rel_cost_gap is not strictly decreasing";
  if (!decreasing_or_zero(rows, &ConvergenceRow::rel_energy_gap)) return "rel_energy_gap is not strictly decreasing";
  if (!decreasing_or_zero(rows, &ConvergenceRow::l2_field_gap)) return "l2_field_gap is not strictly decreasing";
  return {};
}

ConvergenceReport convergence_study(const ProblemConfig& cfg, std::vector<double> eps_list, int cells_per_period) {
  if (eps_list.empty()) throw ConfigError("convergence study needs at least one eps");
  if (cells_per_period < 4 || cells_per_period % 2 != 0)
    throw ConfigError("cells per period must be even and >= 4");
  std::sort(eps_list.begin(), eps_list.end(), std::greater<>());
  eps_list.erase(std::unique(eps_list.begin(), eps_list.end()), eps_list.end());
  std::vector<ProblemConfig> cfgs;
  for (double e : eps_list) {
    auto c = with_eps(cfg, e);
    c.grid_nodes = cells_per_period * c.periods() + 1;
    eps_grid(c);
    cfgs.push_back(c);
  }

  ConvergenceReport report;
  const auto t_limit = std::chrono::steady_clock::now();
  const Grid finest = eps_grid(cfgs.back());
  std::optional<LimitSolution> limit;
  std::optional<UncontrolledLimit> energy;
  try {
    limit.emplace(solve_coupled_limit(cfgs.back(), finest));
    energy.emplace(solve_uncontrolled_limit(cfgs.back(), finest));
  } catch (const SolverError& e) {
    report.complete = false;
    report.failure = std::string("limit solve: ") + e.what();
    return report;
  }
  const double limit_seconds = seconds_since(t_limit);

  for (std::size_t r = 0; r < cfgs.size(); ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto& c = cfgs[r];
    const Grid grid = eps_grid(c);
    ConvergenceRow row;
    row.eps = c.eps;
    row.grid = grid.nodes_per_axis();
    try {
      const auto layer = build_particle_layer(c);
      const auto sol = optimize_eps(c, layer, BoundaryField(grid));
      ScalarField u0 = limit->u0;
      double j0 = limit->j0_value, e0 = energy->energy_limit, res0 = limit->residual();
      if (!(grid == finest)) {
        if (finest.cells() % grid.cells() == 0) {
          u0 = restrict_nested(limit->u0, grid);
        } else {
          const auto own = solve_coupled_limit(c, grid);
          u0 = own.u0;
          j0 = own.j0_value;
          res0 = own.residual();
          e0 = solve_uncontrolled_limit(c, grid).energy_limit;
        }
      }
      row.j_eps = sol.j_eps;
      row.j0 = j0;
      row.rel_cost_gap = rel_gap(sol.j_eps, j0);
      row.energy_eps = sol.energy_eps;
      row.energy_limit = e0;
      row.rel_energy_gap = rel_gap(sol.energy_eps, e0);
      ScalarField diff = sol.u_eps;
      for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= u0.values[i];
      const double dn = l2_norm_volume(diff);
      row.l2_field_gap = dn == 0.0 ? 0.0 : dn / l2_norm_volume(u0);
      row.opt_residual_eps = sol.residual();
      row.opt_residual_limit = res0;
      const BForm laplace(grid, MatrixField::identity(3));
      row.h1_u = std::sqrt(laplace.energy(sol.u_eps.values));
      row.h1_p = std::sqrt(laplace.energy(sol.p_eps.values));
    } catch (const SolverError& e) {
      report.complete = false;
      report.failure = "eps = " + format_double(c.eps) + ": " + e.what();
      return report;
    }
    row.seconds = seconds_since(t0) + (r + 1 == cfgs.size() ? limit_seconds : 0.0);
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace dsf
