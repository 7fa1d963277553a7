#pragma once

#include <vector>

#include "dsf/control.hpp"
#include "dsf/core_model.hpp"

namespace dsf {

/// Grid for limit solves: grid_nodes - 1 cells, or 4/eps cells when unset.
Grid limit_grid(const ProblemConfig& cfg);

/// Discrete limit control problem on `grid`: Robin coefficient
/// effective_robin(a) on Gamma_0 and the strange term
/// strange_term_coeff(a, trB) in the cost and the adjoint.
ControlProblem limit_problem(const ProblemConfig& cfg, const Grid& grid);

struct LimitSolution {
  ScalarField u0;
  ScalarField p0;
  BoundaryField v0;
  double j0_value = 0.0;
  int iterations = 0;
  std::vector<double> residuals;  // optimality residual per iteration
  double residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
  explicit LimitSolution(const Grid& g) : u0(g), p0(g), v0(g) {}
};

/// -Lap u0 = f, du0/dnu + effective_robin(a) u0 = v on Gamma_0, u0 = 0 on Gamma_1.
ScalarField solve_state_limit(const ProblemConfig& cfg, const BoundaryField& v);

/// Adjoint with the B-weighted source and the strange-term coupling on Gamma_0.
ScalarField solve_adjoint_limit(const ProblemConfig& cfg, const ScalarField& u0);

/// Optimal control by reduced conjugate gradients.
LimitSolution solve_coupled_limit(const ProblemConfig& cfg);
LimitSolution solve_coupled_limit(const ProblemConfig& cfg, const Grid& grid);
LimitSolution solve_coupled_limit(const ProblemConfig& cfg, const BoundaryField& v_start);

/// J0(v) = eta/2 int B grad(u0-uT).grad(u0-uT) + N/2 int v^2
///       + eta/2 int_Gamma0 strange_term_coeff(a, trB) u0^2.
double eval_J0(const ProblemConfig& cfg, const BoundaryField& v, const ScalarField& u0);

struct UncontrolledLimit {
  ScalarField u0;
  ScalarField p0_aux;
  double energy_limit = 0.0;
  explicit UncontrolledLimit(const Grid& g) : u0(g), p0_aux(g) {}
};

/// Energy mode: v = 0, B = I, uT = 0. energy = int |grad u0|^2 + a1 int (a/(a+cn))^2 u0^2.
UncontrolledLimit solve_uncontrolled_limit(const ProblemConfig& cfg);
UncontrolledLimit solve_uncontrolled_limit(const ProblemConfig& cfg, const Grid& grid);

}  // namespace dsf
