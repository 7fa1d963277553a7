#include "dsf/core_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dsf/errors.hpp"

namespace dsf {

namespace {

constexpr double kIntegerTolerance = 1e-9;

int lattice_periods(double eps) {
  if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps must be positive");
  const double inv = 1.0 / eps;
  const double m = std::round(inv);
  if (std::abs(inv - m) > kIntegerTolerance * inv)
    throw ConfigError("1/eps must be an integer (eps = " + format_double(eps) + ")");
  if (m < 4) throw ConfigError("1/eps must be at least 4 (eps = " + format_double(eps) + ")");
  return static_cast<int>(m);
}

void check_margin(const ProblemConfig& cfg, double eps) {
  const double radius = cfg.c0 * std::pow(eps, cfg.alpha());
  if (!(radius < eps / 8.0))
    throw ConfigError("particle radius c0*eps^alpha = " + format_double(radius) +
                      " must be < eps/8 = " + format_double(eps / 8.0));
}

// Calls fn(x) on a lattice with `points` nodes per axis over the closed box.
template <class Fn>
void for_each_lattice_point(int n, int points, Fn&& fn) {
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  std::vector<double> x(static_cast<std::size_t>(n));
  for (;;) {
    for (int d = 0; d < n; ++d) x[static_cast<std::size_t>(d)] = idx[static_cast<std::size_t>(d)] / double(points - 1);
    fn(std::span<const double>(x));
    int d = 0;
    while (d < n && ++idx[static_cast<std::size_t>(d)] == points) idx[static_cast<std::size_t>(d++)] = 0;
    if (d == n) return;
  }
}

}  // namespace

double ProblemConfig::particle_radius() const { return c0 * std::pow(eps, alpha()); }

int ProblemConfig::periods() const { return lattice_periods(eps); }

void validate(const ProblemConfig& cfg) {
  if (cfg.n < 3) throw ConfigError("unsupported dimension n = " + std::to_string(cfg.n) + " (need n >= 3)");
  if (!(cfg.c0 > 0.0)) throw ConfigError("c0 must be positive");
  if (!(cfg.eta > 0.0)) throw ConfigError("eta must be positive");
  if (!(cfg.big_n > 0.0)) throw ConfigError("bigN must be positive");
  if (!(cfg.tol.linear > 0.0)) throw ConfigError("tol_linear must be positive");
  if (!(cfg.tol.optimizer > 0.0)) throw ConfigError("tol_opt must be positive");
  if (cfg.tol.max_iterations < 1) throw ConfigError("max_iter must be positive");
  if (cfg.grid_nodes != 0 && cfg.grid_nodes < 3) throw ConfigError("grid_nodes must be 0 or >= 3");
  if (cfg.b.dimension() != cfg.n) throw ConfigError("field.B dimension does not match n");
  lattice_periods(cfg.eps);
  check_margin(cfg, cfg.eps);
  for (double e : cfg.sweep) {
    lattice_periods(e);
    check_margin(cfg, e);
  }

  // a >= a0 > 0 at particle centers and on Gamma_0 nodes.
  const auto layer = build_particle_layer(cfg);
  for (std::size_t j = 0; j < layer.count(); ++j) {
    const double v = cfg.a(layer.center(j));
    if (!(v > 0.0)) throw ConfigError("field.a must be >= a0 > 0 (value " + format_double(v) + " at a particle center)");
  }
  const int m = cfg.periods();
  const int nodes = cfg.grid_nodes > 0 ? cfg.grid_nodes : 4 * m + 1;
  const int face_points = cfg.n == 3 ? nodes : 9;
  std::vector<double> x(static_cast<std::size_t>(cfg.n), 0.0);
  for_each_lattice_point(cfg.n - 1, face_points, [&](std::span<const double> xh) {
    for (int d = 0; d < cfg.n - 1; ++d) x[static_cast<std::size_t>(d)] = xh[static_cast<std::size_t>(d)];
    x.back() = 0.0;
    const double v = cfg.a(x);
    if (!(v > 0.0)) throw ConfigError("field.a must be >= a0 > 0 (value " + format_double(v) + " on Gamma_0)");
  });

  for_each_lattice_point(cfg.n, 9, [&](std::span<const double> p) {
    if (cfg.b.asymmetry(p) > 1e-12) throw ConfigError("field.B is not symmetric");
    const auto [lo, hi] = cfg.b.eigen_bounds(p);
    if (!(lo > 0.0) || !std::isfinite(hi)) throw ConfigError("field.B is not uniformly positive definite");
    for (const auto* field : {&cfg.f, &cfg.u_target})
      if (!std::isfinite((*field)(p))) throw ConfigError("field value is not finite");
  });
}

ProblemConfig with_eps(const ProblemConfig& cfg, double eps) {
  ProblemConfig out = cfg;
  out.eps = eps;
  lattice_periods(eps);
  check_margin(out, eps);
  return out;
}

HomogConstants constants(int n, double c0) {
  if (n < 3) throw DomainError("unsupported dimension n = " + std::to_string(n) + " (need n >= 3)");
  if (!(c0 > 0.0)) throw DomainError("c0 must be positive");
  // omega_n = 2 pi omega_{n-2} / (n - 2), omega_1 = 2, omega_2 = 2 pi.
  double omega = (n % 2 == 1) ? 2.0 : 2.0 * std::numbers::pi;
  for (int k = (n % 2 == 1) ? 3 : 4; k <= n; k += 2) omega *= 2.0 * std::numbers::pi / (k - 2);
  HomogConstants c;
  c.n = n;
  c.c0 = c0;
  c.omega_n = omega;
  c.a1 = (n - 2) * std::pow(c0, n - 2) * omega;
  c.a2 = c.a1 / n;
  c.cn = (n - 2) / c0;
  return c;
}

double effective_robin(double a_val, const HomogConstants& c) {
  if (!(a_val > 0.0)) throw DomainError("Robin exchange coefficient a must be positive");
  return c.a1 * a_val / (a_val + c.cn);
}

double strange_term_coeff(double a_val, double trb_val, const HomogConstants& c) {
  if (!(a_val > 0.0)) throw DomainError("Robin exchange coefficient a must be positive");
  const double s = a_val / (a_val + c.cn);
  return c.a2 * trb_val * s * s;
}

ParticleLayer build_particle_layer(const ProblemConfig& cfg) {
  if (cfg.n < 3) throw ConfigError("unsupported dimension n = " + std::to_string(cfg.n));
  const int m = lattice_periods(cfg.eps);
  check_margin(cfg, cfg.eps);
  ParticleLayer layer;
  layer.n = cfg.n;
  layer.eps = cfg.eps;
  layer.radius = cfg.particle_radius();
  layer.probe_radius = cfg.eps / 4.0;
  const int lateral = cfg.n - 1;
  std::size_t count = 1;
  for (int d = 0; d < lateral; ++d) count *= static_cast<std::size_t>(m - 1);
  layer.coords.reserve(count * static_cast<std::size_t>(cfg.n));
  std::vector<int> j(static_cast<std::size_t>(lateral), 1);
  for (std::size_t p = 0; p < count; ++p) {
    for (int d = 0; d < lateral; ++d) layer.coords.push_back(cfg.eps * j[static_cast<std::size_t>(d)]);
    layer.coords.push_back(cfg.eps / 2.0);
    int d = 0;
    while (d < lateral && ++j[static_cast<std::size_t>(d)] == m) j[static_cast<std::size_t>(d++)] = 1;
  }
  return layer;
}

ParticleLayer custom_particle_layer(const ProblemConfig& cfg,
                                    const std::vector<std::array<double, 3>>& centers) {
  if (cfg.n != 3) throw ConfigError("custom particle layers require n = 3");
  lattice_periods(cfg.eps);
  check_margin(cfg, cfg.eps);
  ParticleLayer layer;
  layer.n = 3;
  layer.eps = cfg.eps;
  layer.radius = cfg.particle_radius();
  layer.probe_radius = cfg.eps / 4.0;
  const double r = layer.probe_radius;
  for (std::size_t i = 0; i < centers.size(); ++i) {
    const auto& c = centers[i];
    for (double x : c)
      if (!(x - r > 0.0 && x + r < 1.0)) throw ConfigError("probe ball of a particle leaves the box");
    for (std::size_t k = 0; k < i; ++k) {
      const auto& o = centers[k];
      const double d = std::hypot(c[0] - o[0], c[1] - o[1], c[2] - o[2]);
      if (!(d > 2.0 * r)) throw ConfigError("probe balls of two particles overlap");
    }
    layer.coords.insert(layer.coords.end(), c.begin(), c.end());
  }
  return layer;
}

double capacity_function(double r, const ProblemConfig& cfg) {
  const double a = cfg.particle_radius();
  const double outer = cfg.eps / 4.0;
  const double slack = 1e-12 * outer;
  if (r < a - slack || r > outer + slack)
    throw DomainError("capacity_function: r = " + format_double(r) + " outside the shell [" +
                      format_double(a) + ", " + format_double(outer) + "]");
  const double p = 2.0 - cfg.n;
  return (std::pow(r, p) - std::pow(outer, p)) / (std::pow(a, p) - std::pow(outer, p));
}

}  // namespace dsf
