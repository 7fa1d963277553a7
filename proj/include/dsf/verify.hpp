#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dsf/core_model.hpp"
#include "dsf/fields.hpp"
#include "dsf/grid.hpp"

namespace dsf {

/// Flux into one Robin sphere of radius c0 eps^alpha inside the shell
/// r <= eps/4 with far value 1, normalized by eps^(n-1). Solved on a
/// geometric radial mesh with exact flux weights, independently of the
/// grid solvers. Tends to effective_robin(a_val) as eps -> 0.
double radial_robin_oracle(int n, double c0, double eps, double a_val, int radial_nodes);

struct Lemma21Row {
  double eps = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;  // |lhs - rhs| / |rhs|, 0 when both vanish
};

using TestFunction = std::function<double(std::span<const double>)>;

/// Smooth bump in the lateral variables times (1 - x_n)^2.
double default_test_function(std::span<const double> x);

/// Shell sum of the capacity energy density against phi versus its
/// Gamma_0 limit (c0^(n-2) (n-2) omega_n / n) int trB phi.
std::vector<Lemma21Row> lemma21_check(const MatrixField& b, const TestFunction& phi, std::span<const double> eps_list,
                                      double c0 = 0.5);

enum class SolverKind { limit, eps };

struct GradientCheck {
  double max_rel_error = 0.0;
  std::vector<double> adjoint_derivative;
  std::vector<double> fd_derivative;
};

/// Central differences (step t) of the discrete cost against the adjoint
/// gradient for n_dirs random unit directions at the control `base` (zero
/// when absent). The eps kind uses `layer` when given, else the lattice of cfg.
GradientCheck gradient_check(SolverKind kind, const ProblemConfig& cfg, int n_dirs, std::uint64_t seed,
                             const ParticleLayer* layer = nullptr, const BoundaryField* base = nullptr,
                             double t = 1e-4);

struct ConvergenceRow {
  double eps = 0.0;
  int grid = 0;  // nodes per axis
  double j_eps = 0.0;
  double j0 = 0.0;
  double rel_cost_gap = 0.0;
  double energy_eps = 0.0;
  double energy_limit = 0.0;
  double rel_energy_gap = 0.0;
  double l2_field_gap = 0.0;
  double opt_residual_eps = 0.0;
  double opt_residual_limit = 0.0;
  double seconds = 0.0;
  // Discrete H1 seminorms of the optimal state and adjoint.
  double h1_u = 0.0;
  double h1_p = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;
  bool complete = true;
  std::string failure;

  /// Cost, energy and field gaps strictly decreasing (or identically zero).
  bool trend_ok() const;
  /// Which trend failed, empty when trend_ok().
  std::string trend_violation() const;
};

/// |a - b| / |b|, 0 when a == b.
double rel_gap(double a, double b);

/// For each eps (sorted decreasing): optimal eps control and energy-mode
/// solve on a grid with cells_per_period / eps cells. The limit problems are
/// solved once on the finest grid and sampled onto the nested coarse grids.
ConvergenceReport convergence_study(const ProblemConfig& cfg, std::vector<double> eps_list, int cells_per_period = 4);

}  // namespace dsf
