#include <doctest.h>

#include <Eigen/Sparse>
#include <cmath>
#include <numbers>

#include "brute_force.hpp"
#include "dsf/errors.hpp"
#include "dsf/limit_solver.hpp"
#include "dsf/operators.hpp"
#include "dsf/perforated_solver.hpp"
#include "dsf/verify.hpp"

using namespace dsf;
using namespace dsf::testing;
using std::numbers::pi;

namespace {

ProblemConfig config(double eps, double c0, int cells) {
  ProblemConfig cfg;
  cfg.eps = eps;
  cfg.c0 = c0;
  cfg.grid_nodes = cells + 1;
  validate(cfg);
  return cfg;
}

ParticleLayer one_particle(const ProblemConfig& cfg) {
  return custom_particle_layer(cfg, {{0.5, 0.5, cfg.eps / 2}});
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

// Particle-free Neumann problem solved with a sparse Cholesky factorization.
ScalarField particle_free(const ProblemConfig& cfg, const BoundaryField& v) {
  const Grid& g = v.grid;
  const auto sys = assemble_poisson(g, BoundaryField(g));
  const auto n = static_cast<Eigen::Index>(sys.matrix.rows);
  std::vector<Eigen::Triplet<double>> t;
  for (std::size_t r = 0; r < sys.matrix.rows; ++r)
    for (std::size_t e = sys.matrix.row_ptr[r]; e < sys.matrix.row_ptr[r + 1]; ++e)
      t.emplace_back(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(sys.matrix.col[e]), sys.matrix.val[e]);
  Eigen::SparseMatrix<double> a(n, n);
  a.setFromTriplets(t.begin(), t.end());
  const auto f = load_vector(g, cfg.f);
  const auto c = control_load(v);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) b(i) = f[static_cast<std::size_t>(i)] + c[static_cast<std::size_t>(i)];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(a);
  const Eigen::VectorXd x = ldlt.solve(b);
  return ScalarField::from_unknowns(g, std::span<const double>(x.data(), static_cast<std::size_t>(n)));
}

// Origin value of the Dirichlet Green's function of the 7-point Laplacian on
// a box of m cells per axis, by its sine expansion.
double box_green_center(int m) {
  std::vector<double> s(static_cast<std::size_t>(m)), lam(static_cast<std::size_t>(m));
  for (int k = 1; k < m; ++k) {
    s[static_cast<std::size_t>(k)] = std::pow(std::sin(pi * k / 2.0), 2) * 2.0 / m;
    lam[static_cast<std::size_t>(k)] = 2.0 - 2.0 * std::cos(pi * k / m);
  }
  double g = 0.0;
  for (int a = 1; a < m; a += 2)
    for (int b = 1; b < m; b += 2)
      for (int c = 1; c < m; c += 2) {
        const auto ua = static_cast<std::size_t>(a), ub = static_cast<std::size_t>(b), uc = static_cast<std::size_t>(c);
        g += s[ua] * s[ub] * s[uc] / (lam[ua] + lam[ub] + lam[uc]);
      }
  return g;
}

}  // namespace

TEST_CASE("lattice Green value at the origin") {
  const double g32 = box_green_center(32), g64 = box_green_center(64), g128 = box_green_center(128);
  // Box error behaves like c/m: Richardson extrapolation.
  const double w1 = 2 * g64 - g32, w2 = 2 * g128 - g64;
  MESSAGE("box values " << g32 << " " << g64 << " " << g128 << " extrapolated " << w1 << " " << w2);
  CHECK(std::abs(w2 - kLatticeGreenOrigin) <= 1e-3);
  CHECK(std::abs(w2 - kLatticeGreenOrigin) < std::abs(w1 - kLatticeGreenOrigin));
}

TEST_CASE("grid rules for eps solves") {
  auto cfg = config(0.25, 0.25, 16);
  CHECK(eps_grid(cfg).cells() == 16);
  cfg.grid_nodes = 0;
  CHECK(eps_grid(cfg).cells() == 16);
  cfg.grid_nodes = 9;  // h > eps/4
  CHECK_THROWS_AS(eps_grid(cfg), ConfigError);
  cfg.grid_nodes = 21;  // 20 cells, not a multiple of 2/eps
  CHECK_THROWS_AS(eps_grid(cfg), ConfigError);
  cfg.grid_nodes = 33;  // radius 1/64 above the lattice radius at h = 1/32
  CHECK_THROWS_AS(eps_grid(cfg), ConfigError);
  cfg.c0 = 0.125;
  CHECK(eps_grid(cfg).cells() == 32);
}

TEST_CASE("zero data gives the zero state and no flux") {
  auto cfg = config(0.25, 0.25, 16);
  cfg.f = CoefficientField::constant(0.0);
  const auto layer = build_particle_layer(cfg);
  const auto [u, mono] = solve_state_eps(cfg, layer, BoundaryField(eps_grid(cfg)));
  CHECK(max_abs(u.values) == 0.0);
  CHECK(max_abs(mono.q) == 0.0);
  CHECK(eval_J_eps(cfg, layer, BoundaryField(eps_grid(cfg))) == 0.0);
}

TEST_CASE("monopole closure and single-particle flux") {
  auto cfg = config(0.125, 0.125, 32);
  cfg.f = CoefficientField::constant(0.0);
  const auto layer = one_particle(cfg);
  const Grid g = eps_grid(cfg);
  const auto v = random_control(g, 3);
  const auto [u, mono] = solve_state_eps(cfg, layer, v);
  REQUIRE(mono.q.size() == 1);
  CHECK(mono.closure_residual <= 1e-12);
  const double kappa = effective_robin(1.0, constants(3, cfg.c0)) * cfg.eps * cfg.eps;
  CHECK(mono.q[0] == doctest::Approx(-kappa * mono.U[0]).epsilon(1e-12));
  // A weak sink barely perturbs the particle-free field at its center.
  const double u_pf = particle_free(cfg, v).at(16, 16, 2);
  MESSAGE("q = " << mono.q[0] << ", -kappa u_pf = " << -kappa * u_pf);
  CHECK(std::abs(mono.q[0] + kappa * u_pf) <= 0.02 * std::abs(kappa * u_pf));
}

TEST_CASE("state is affine in the control") {
  const auto cfg = config(0.25, 0.25, 16);
  const auto layer = build_particle_layer(cfg);
  const Grid g = eps_grid(cfg);
  const auto v1 = random_control(g, 1), v2 = random_control(g, 2);
  BoundaryField v12(g);
  for (std::size_t i = 0; i < v12.values.size(); ++i) v12.values[i] = v1.values[i] + v2.values[i];
  const auto u1 = solve_state_eps(cfg, layer, v1).first, u2 = solve_state_eps(cfg, layer, v2).first;
  const auto u12 = solve_state_eps(cfg, layer, v12).first, u0 = solve_state_eps(cfg, layer, BoundaryField(g)).first;
  double worst = 0.0;
  for (std::size_t i = 0; i < u0.values.size(); ++i)
    worst = std::max(worst, std::abs(u12.values[i] - (u1.values[i] + u2.values[i] - u0.values[i])));
  CHECK(worst <= 1e-9 * max_abs(u12.values));
}

TEST_CASE("empty layer reduces to the particle-free problem") {
  auto cfg = config(0.25, 0.25, 16);
  cfg.u_target = CoefficientField::polynomial("x1*x2 - x3", 3);
  cfg.b = MatrixField::parse("const:2,0.5,0,0.5,1,0,0,0,1", 3);
  const auto empty = custom_particle_layer(cfg, {});
  const Grid g = eps_grid(cfg);
  const auto v = random_control(g, 4);
  const auto u = solve_state_eps(cfg, empty, v).first;
  const auto ref = particle_free(cfg, v);
  double worst = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) worst = std::max(worst, std::abs(u.values[i] - ref.values[i]));
  CHECK(worst <= 1e-12 * max_abs(ref.values));

  ScalarField diff(g);
  for (int k = 0; k <= 16; ++k)
    for (int j = 0; j <= 16; ++j)
      for (int i = 0; i <= 16; ++i) {
        const auto x = g.coord(i, j, k);
        diff.at(i, j, k) = u.at(i, j, k) - cfg.u_target(x[0], x[1], x[2]);
      }
  const double semi = weighted_h1_seminorm(g, cfg.b, diff), vn = l2_norm_gamma0(v);
  const double expected = cfg.eta / 2 * semi * semi + cfg.big_n / 2 * vn * vn;
  CHECK(eval_J_eps(cfg, empty, v) == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("one-particle cost is stable under grid refinement") {
  double j[3];
  const int cells[3] = {16, 32, 64};
  for (int r = 0; r < 3; ++r) {
    const auto cfg = config(0.25, 0.0625, cells[r]);
    j[r] = optimize_eps(cfg, one_particle(cfg)).j_eps;
  }
  MESSAGE("J 16/32/64: " << j[0] << " " << j[1] << " " << j[2]);
  CHECK(std::abs(j[2] - j[1]) <= 0.01 * j[2]);
  CHECK(std::abs(j[2] - j[1]) < std::abs(j[1] - j[0]));
}

TEST_CASE("optimal eps control") {
  auto cfg = config(0.25, 0.25, 16);
  cfg.u_target = CoefficientField::polynomial("x3*(1-x1)", 3);
  cfg.a = CoefficientField::polynomial("1 + x1", 3);
  const Grid g = eps_grid(cfg);

  SUBCASE("single particle: dense brute-force oracle") {
    const auto layer = custom_particle_layer(cfg, {{0.5, 0.5, 0.125}});
    const auto sol = optimize_eps(cfg, layer);
    CHECK(relative_l2(sol.v_eps, brute_force_control(eps_problem(cfg, layer, g))) <= 1e-6);
  }
  SUBCASE("lattice: dense brute-force oracle") {
    const auto layer = build_particle_layer(cfg);
    const auto sol = optimize_eps(cfg, layer);
    CHECK(relative_l2(sol.v_eps, brute_force_control(eps_problem(cfg, layer, g))) <= 1e-6);
  }
  SUBCASE("v = -(eta/N) P on every Gamma_0 node") {
    const auto sol = optimize_eps(cfg, build_particle_layer(cfg));
    CHECK(sol.residual() <= cfg.tol.optimizer);
    const auto trace = BoundaryField::trace(sol.p_eps);
    double worst = 0.0;
    for (std::size_t q = 0; q < trace.values.size(); ++q)
      worst = std::max(worst, std::abs(sol.v_eps.values[q] + cfg.eta / cfg.big_n * trace.values[q]));
    CHECK(worst <= 1e-8 * max_abs(sol.v_eps.values));
  }
  SUBCASE("minimality and uniqueness") {
    const auto layer = build_particle_layer(cfg);
    const auto sol = optimize_eps(cfg, layer);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(eval_J_eps(cfg, layer, random_control(g, 50 + s, 0.05)) >= sol.j_eps);
    CHECK(relative_l2(optimize_eps(cfg, layer, random_control(g, 8)).v_eps, sol.v_eps) <= 1e-8);
  }
  SUBCASE("adjoint gradient against central differences") {
    const auto one = custom_particle_layer(cfg, {{0.5, 0.5, 0.125}});
    CHECK(gradient_check(SolverKind::eps, cfg, 5, 11, &one).max_rel_error <= 1e-4);
    const auto base = random_control(g, 12);
    CHECK(gradient_check(SolverKind::eps, cfg, 5, 13, nullptr, &base).max_rel_error <= 1e-4);
  }
  SUBCASE("large control cost suppresses the control") {
    const auto layer = build_particle_layer(cfg);
    const double v1 = l2_norm_gamma0(optimize_eps(cfg, layer).v_eps);
    auto heavy = cfg;
    heavy.big_n *= 1e6;
    const double v2 = l2_norm_gamma0(optimize_eps(heavy, layer).v_eps);
    CHECK(v1 > 0.0);
    CHECK(v2 <= 2e-6 * v1);
  }
}

TEST_CASE("optimal states stay bounded as eps decreases") {
  ProblemConfig cfg;
  double h1_u[2], h1_p[2];
  const double eps[2] = {0.125, 0.0625};
  for (int r = 0; r < 2; ++r) {
    const auto c = with_eps(cfg, eps[r]);
    const auto sol = optimize_eps(c, build_particle_layer(c));
    const MatrixField id = MatrixField::identity(3);
    h1_u[r] = weighted_h1_seminorm(sol.u_eps.grid, id, sol.u_eps);
    h1_p[r] = weighted_h1_seminorm(sol.p_eps.grid, id, sol.p_eps);
  }
  MESSAGE("H1 u: " << h1_u[0] << " " << h1_u[1] << ", H1 p: " << h1_p[0] << " " << h1_p[1]);
  CHECK(h1_u[1] <= 1.5 * h1_u[0]);
  CHECK(h1_p[1] <= 1.5 * h1_p[0]);
}

TEST_CASE("eps energy mode") {
  auto cfg = config(0.25, 0.25, 16);
  const auto layer = build_particle_layer(cfg);
  auto zero = cfg;
  zero.f = CoefficientField::constant(0.0);
  CHECK(energy_eps(zero, layer) == 0.0);
  const double e1 = energy_eps(cfg, layer);
  auto doubled = cfg;
  doubled.f = CoefficientField::constant(2.0);
  CHECK(e1 > 0.0);
  CHECK(energy_eps(doubled, layer) == doctest::Approx(4 * e1).epsilon(1e-10));
}
