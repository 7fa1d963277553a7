#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dsf/errors.hpp"
#include "dsf/fast_poisson.hpp"
#include "dsf/operators.hpp"

using namespace dsf;
using std::numbers::pi;

namespace {

double sine_bubble(double x, double y, double z) { return std::sin(pi * x) * std::sin(pi * y) * z * (1 - z); }

double l2_error(const ScalarField& u, const std::function<double(double, double, double)>& exact) {
  ScalarField e = u;
  const int m = u.grid.cells();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const auto x = u.grid.coord(i, j, k);
        e.at(i, j, k) -= exact(x[0], x[1], x[2]);
      }
  return l2_norm_volume(e);
}

// Dirichlet data on every face: Gamma_0 is closed with a stiff Robin penalty.
double dirichlet_error(int cells) {
  const Grid g(cells);
  auto sys = assemble_poisson(g, BoundaryField(g, 1e12));
  const auto f = ScalarField::sample(g, [](double x, double y, double z) {
    return std::sin(pi * x) * std::sin(pi * y) * (2 * pi * pi * z * (1 - z) + 2);
  });
  sys.rhs = load_vector(f);
  sys.params.rel_tol = 1e-13;
  return l2_error(solve(sys), sine_bubble);
}

// u = sin(pi x) sin(pi y) cos(pi z / 2), Robin sigma on Gamma_0 with data sigma u.
double robin_error(int cells, double sigma) {
  const Grid g(cells);
  auto exact = [](double x, double y, double z) { return std::sin(pi * x) * std::sin(pi * y) * std::cos(pi * z / 2); };
  auto sys = assemble_poisson(g, BoundaryField(g, sigma));
  auto rhs = load_vector(ScalarField::sample(g, [&](double x, double y, double z) { return 2.25 * pi * pi * exact(x, y, z); }));
  const auto v = BoundaryField::sample(g, [&](double x, double y) { return sigma * exact(x, y, 0.0); });
  const auto c = control_load(v);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] += c[i];
  sys.rhs = rhs;
  sys.params.rel_tol = 1e-13;
  return l2_error(solve(sys), exact);
}

}  // namespace

TEST_CASE("grid numbering and classification") {
  const Grid g(8);
  CHECK(g.node_count() == 729);
  CHECK(g.unknown_count() == 49 * 8);
  CHECK(g.gamma0_count() == 49);
  CHECK(g.spacing() * g.cells() == 1.0);
  CHECK(g.kind(0, 4, 4) == NodeKind::gamma1);
  CHECK(g.kind(4, 4, 8) == NodeKind::gamma1);
  CHECK(g.kind(0, 4, 0) == NodeKind::gamma1);  // bottom-face edge
  CHECK(g.kind(4, 4, 0) == NodeKind::gamma0);
  CHECK(g.kind(4, 4, 3) == NodeKind::interior);
  for (std::size_t u = 0; u < g.unknown_count(); ++u) {
    const auto [i, j, k] = g.unknown_to_ijk(u);
    CHECK(g.unknown(i, j, k) == u);
    CHECK(g.kind(i, j, k) != NodeKind::gamma1);
    CHECK((u < g.gamma0_count()) == (k == 0));
  }
}

TEST_CASE("quadrature is exact for constants and linear functions") {
  for (int m : {2, 7, 16}) {
    const Grid g(m);
    CHECK(integrate_volume(ScalarField(g, 1.0)) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(integrate_volume(g, [](double x, double y, double z) { return x + 2 * y + 3 * z; }) ==
          doctest::Approx(3.0).epsilon(1e-14));
    CHECK(integrate_gamma0(g, [](double, double) { return 1.0; }) == doctest::Approx(1.0).epsilon(1e-14));
  }
  const Grid a(4), b(8);
  CHECK_THROWS_AS(integrate_volume(ScalarField(a), ScalarField(b)), AssemblyError);
}

TEST_CASE("zero data gives the zero solution") {
  const Grid g(8);
  auto sys = assemble_poisson(g, BoundaryField(g));
  const auto u = solve(sys);
  for (double v : u.values) CHECK(v == 0.0);
}

TEST_CASE("negative Robin coefficient is rejected") {
  const Grid g(4);
  BoundaryField r(g, 1.0);
  r.values[3] = -0.5;
  CHECK_THROWS_AS(assemble_poisson(g, r), AssemblyError);
}

TEST_CASE("operator is symmetric") {
  const Grid g(6);
  const auto r = BoundaryField::sample(g, [](double x, double y) { return 1 + x * y; });
  const auto sys = assemble_poisson(g, r);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> dist(-1, 1);
  const std::size_t n = sys.matrix.rows;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> x(n), y(n), ax(n), ay(n);
    for (auto& v : x) v = dist(rng);
    for (auto& v : y) v = dist(rng);
    sys.matrix.multiply(x, ax);
    sys.matrix.multiply(y, ay);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < n; ++i) {
      a += ax[i] * y[i];
      b += x[i] * ay[i];
    }
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
  }
}

TEST_CASE("one-dimensional Robin profile is reproduced at nodes") {
  const double sigma = 3.0;
  const Grid g(16);
  auto profile = [&](double z) { return (sigma * z + 1) / (sigma + 1); };
  const auto lift = ScalarField::sample(g, [&](double, double, double z) { return profile(z); });
  auto sys = assemble_poisson(g, BoundaryField(g, sigma), &lift);
  sys.params.rel_tol = 1e-14;
  const auto u = solve(sys);
  double worst = 0;
  for (int k = 0; k <= 16; ++k)
    for (int j = 0; j <= 16; ++j)
      for (int i = 0; i <= 16; ++i) worst = std::max(worst, std::abs(u.at(i, j, k) - profile(k / 16.0)));
  CHECK(worst <= 1e-10);
}

TEST_CASE("manufactured Dirichlet solution converges at second order") {
  const double e32 = dirichlet_error(32), e64 = dirichlet_error(64);
  MESSAGE("Dirichlet L2 errors " << e32 << " " << e64 << " ratio " << e32 / e64);
  CHECK(e32 / e64 >= 3.6);
  CHECK(e32 / e64 <= 4.4);
}

TEST_CASE("manufactured Robin solution converges at second order") {
  const double e16 = robin_error(16, 2.0), e32 = robin_error(32, 2.0);
  MESSAGE("Robin L2 errors " << e16 << " " << e32 << " ratio " << e16 / e32);
  CHECK(e16 / e32 >= 3.5);
  CHECK(e16 / e32 <= 4.5);
}

TEST_CASE("spectral preconditioner inverts the constant-coefficient operator") {
  const Grid g(12);
  const auto sys = assemble_poisson(g, BoundaryField(g, 2.5));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> dist(-1, 1);
  std::vector<double> x(sys.matrix.rows), b(x.size()), z(x.size());
  for (auto& v : x) v = dist(rng);
  sys.matrix.multiply(x, b);
  sys.preconditioner->apply(b, z);
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(z[i] - x[i]));
  CHECK(worst <= 1e-12);
}

TEST_CASE("solve handles identity systems and invalid tolerances") {
  const auto id = CsrMatrix::identity(5);
  std::vector<double> b{1, -2, 3, 0.5, 7}, x(5, 0.0);
  pcg(id, b, x, JacobiPreconditioner(id), SolverParameters{});
  for (int i = 0; i < 5; ++i) CHECK(x[i] == doctest::Approx(b[i]));
  CHECK_THROWS_AS(pcg(id, b, x, JacobiPreconditioner(id), SolverParameters{0.0, 10}), ConfigError);

  const Grid g(16);
  auto sys = assemble_poisson(g, BoundaryField(g, 1.0));
  sys.rhs = load_vector(g, CoefficientField::constant(1.0));
  sys.preconditioner.reset();
  sys.params = SolverParameters{1e-12, 2};
  CHECK_THROWS_AS(solve(sys), SolverError);
}

TEST_CASE("B-weighted right-hand side") {
  const Grid g(8);
  const auto u = ScalarField::sample(g, sine_bubble);
  const auto id = MatrixField::identity(3);

  // Constants are in the kernel.
  for (double v : assemble_divBgrad_rhs(g, id, ScalarField(g, 3.0))) CHECK(std::abs(v) <= 1e-13);

  // B = I matches the Poisson operator on unknown rows (Dirichlet lift moved to the left).
  auto sys = assemble_poisson(g, BoundaryField(g), &u);
  const auto uu = u.restrict_to_unknowns();
  std::vector<double> au(uu.size());
  sys.matrix.multiply(uu, au);
  const auto rhs = assemble_divBgrad_rhs(g, id, u);
  double worst = 0;
  for (std::size_t i = 0; i < au.size(); ++i) worst = std::max(worst, std::abs(au[i] - sys.rhs[i] - rhs[i]));
  CHECK(worst <= 1e-12);

  // Linear in B; the general cell path agrees with the isotropic stencil.
  const auto two = assemble_divBgrad_rhs(g, MatrixField::identity(3, 2.0), u);
  const auto general = assemble_divBgrad_rhs(g, MatrixField::parse("poly:1;0;0;0;1;0;0;0;1", 3), u);
  for (std::size_t i = 0; i < rhs.size(); ++i) {
    CHECK(two[i] == doctest::Approx(2 * rhs[i]).epsilon(1e-14));
    CHECK(std::abs(general[i] - rhs[i]) <= 1e-13);
  }

  CHECK_THROWS_AS(BForm(g, MatrixField::parse("poly:1;x1;0;0;1;0;0;0;1", 3)), AssemblyError);
}

TEST_CASE("anisotropic B form is symmetric positive semidefinite") {
  const Grid g(5);
  const BForm form(g, MatrixField::parse("poly:2+x1;0.5;0.3*x2;0.5;1;-0.2;0.3*x2;-0.2;1.5", 3));
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> dist(-1, 1);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x(g.node_count()), y(g.node_count());
    for (auto& v : x) v = dist(rng);
    for (auto& v : y) v = dist(rng);
    const auto bx = form.apply(x), by = form.apply(y);
    double a = 0, b = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      a += bx[i] * y[i];
      b += x[i] * by[i];
    }
    CHECK(std::abs(a - b) <= 1e-12 * std::abs(a));
    CHECK(form.energy(x) > 0.0);
  }
  // Linear fields: B grad w . grad w exactly.
  const auto w = ScalarField::sample(g, [](double x, double y, double z) { return x - 2 * y + z; });
  const auto exact = [](double x, double y) {
    const double gx = 1, gy = -2, gz = 1;
    const double b11 = 2 + x, b12 = 0.5, b13 = 0.3 * y, b22 = 1, b23 = -0.2, b33 = 1.5;
    return b11 * gx * gx + b22 * gy * gy + b33 * gz * gz + 2 * (b12 * gx * gy + b13 * gx * gz + b23 * gy * gz);
  };
  // Integrand is linear in x, y, so its cell-center value integrates exactly.
  CHECK(form.energy(w.values) == doctest::Approx(exact(0.5, 0.5)).epsilon(1e-13));
}

TEST_CASE("weighted H1 seminorm") {
  const Grid g(8);
  const auto z = ScalarField::sample(g, [](double, double, double z) { return z; });
  CHECK(weighted_h1_seminorm(g, MatrixField::identity(3), z) == doctest::Approx(1.0).epsilon(1e-14));

  // int |grad u|^2 = 1/12 + pi^2/60 for the sine bubble.
  const double exact = 1.0 / 12 + pi * pi / 60;
  double prev = 1.0;
  for (int m : {16, 32, 64}) {
    const Grid gm(m);
    const double s = weighted_h1_seminorm(gm, MatrixField::identity(3), ScalarField::sample(gm, sine_bubble));
    const double err = std::abs(s * s - exact) / exact;
    CHECK(err < prev / 3.5);
    prev = err;
  }
  CHECK(prev <= 1e-3);
  CHECK_THROWS_AS(weighted_h1_seminorm(Grid(4), MatrixField::identity(3), ScalarField(Grid(8))), AssemblyError);
}
