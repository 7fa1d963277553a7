#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "dsf/fields.hpp"

namespace dsf {

/// Linear-solve and optimizer controls.
struct Tolerances {
  double linear = 1e-12;     // relative residual of every elliptic solve
  double optimizer = 1e-10;  // relative optimality residual ||N v + eta P|| / ||eta P||
  int max_iterations = 2000;

  friend bool operator==(const Tolerances&, const Tolerances&) = default;
};

/// One instance of the boundary-control problem on the unit box.
///
/// Gamma_0 is the bottom face {x_n = 0}; the other faces form Gamma_1
/// (homogeneous Dirichlet). Particles sit in the layer 0 < x_n < eps with
/// radius c0 * eps^alpha and Robin factor eps^-gamma, alpha = gamma =
/// (n-1)/(n-2).
struct ProblemConfig {
  int n = 3;
  double eps = 0.125;
  double c0 = 0.5;
  double eta = 1.0;
  double big_n = 1.0;
  int grid_nodes = 0;  // nodes per axis; 0 derives h = eps/4 for eps-solves
  Tolerances tol;
  std::vector<double> sweep{0.125, 0.0625, 0.03125};

  CoefficientField f = CoefficientField::constant(1.0);
  CoefficientField a = CoefficientField::constant(1.0);
  CoefficientField u_target = CoefficientField::constant(0.0);
  MatrixField b = MatrixField::identity(3);

  double alpha() const { return (n - 1.0) / (n - 2.0); }
  double gamma() const { return alpha(); }
  double particle_radius() const;
  /// 1/eps; throws ConfigError unless it is an integer >= 4.
  int periods() const;

  friend bool operator==(const ProblemConfig&, const ProblemConfig&) = default;
};

/// Enforces every invariant of ProblemConfig (dimension, lattice period,
/// radius margin, positivity of a, symmetry and ellipticity of B).
void validate(const ProblemConfig& cfg);

/// Same checks for a different eps (used for sweeps).
ProblemConfig with_eps(const ProblemConfig& cfg, double eps);

struct HomogConstants {
  int n = 3;
  double c0 = 1.0;
  double omega_n = 0.0;  // surface area of the unit sphere in R^n
  double a1 = 0.0;       // (n-2) c0^(n-2) omega_n
  double a2 = 0.0;       // a1 / n
  double cn = 0.0;       // (n-2) / c0
};

HomogConstants constants(int n, double c0);

/// Effective Robin coefficient of the limit state problem, a1 a / (a + cn).
double effective_robin(double a_val, const HomogConstants& c);

/// Coefficient a2 trB a^2 / (a + cn)^2 coupling u0 into the limit adjoint.
double strange_term_coeff(double a_val, double trb_val, const HomogConstants& c);

/// Lattice of particle centers eps (j_1, ..., j_{n-1}, 1/2), j_i = 1..m-1.
struct ParticleLayer {
  int n = 3;
  double eps = 0.0;
  double radius = 0.0;
  double probe_radius = 0.0;
  std::vector<double> coords;  // n values per particle

  std::size_t count() const { return n == 0 ? 0 : coords.size() / static_cast<std::size_t>(n); }
  std::span<const double> center(std::size_t j) const {
    return {coords.data() + j * static_cast<std::size_t>(n), static_cast<std::size_t>(n)};
  }
};

ParticleLayer build_particle_layer(const ProblemConfig& cfg);

/// Layer with explicitly placed particles (n = 3); radius and probe radius
/// follow cfg. Probe balls must be disjoint and inside the box.
ParticleLayer custom_particle_layer(const ProblemConfig& cfg,
                                    const std::vector<std::array<double, 3>>& centers);

/// Radial capacity profile w(r) in the shell a_eps <= r <= eps/4.
double capacity_function(double r, const ProblemConfig& cfg);

}  // namespace dsf
