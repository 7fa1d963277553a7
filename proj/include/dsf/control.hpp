#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dsf/operators.hpp"

namespace dsf {

/// Discrete boundary-control problem shared by the limit and eps solvers.
///
///   K u = load + h^2 E v                     (state, E injects Gamma_0)
///   J(v) = eta/2 [(u-uT)' S_B (u-uT) + u' D u] + N/2 h^2 |v|^2
///   K P = S_B (u - uT) + D u                 (adjoint)
///
/// K is symmetric, so the reduced gradient in L^2(Gamma_0) is N v + eta P.
struct ControlProblem {
  Grid grid;
  CsrMatrix matrix;
  std::shared_ptr<const Preconditioner> preconditioner;
  std::vector<double> load;       // unknown rows
  std::vector<double> cost_diag;  // D on unknown rows; empty means zero
  std::shared_ptr<const BForm> bform;
  ScalarField target;
  double eta = 1.0;
  double big_n = 1.0;
  SolverParameters linear;

  explicit ControlProblem(const Grid& g) : grid(g), target(g) {}

  std::vector<double> solve_linear(std::span<const double> rhs) const;
  /// Unknown-row state for control v.
  std::vector<double> state(const BoundaryField& v) const;
  /// Unknown-row adjoint for a state.
  std::vector<double> adjoint(std::span<const double> u) const;
  /// (u-uT)' S_B (u-uT) + u' D u.
  double tracking(std::span<const double> u) const;
  double cost(const BoundaryField& v, std::span<const double> u) const;
  /// N v + eta P on Gamma_0.
  BoundaryField gradient(const BoundaryField& v, std::span<const double> p) const;

  /// ||N v + eta P|| / ||eta P|| (or ||N v + eta P|| when P vanishes).
  double optimality_residual(const BoundaryField& v, std::span<const double> p) const;

  /// Linear solves performed so far (diagnostic).
  mutable long solves = 0;
  mutable long linear_iterations = 0;
};

struct ControlResult {
  BoundaryField v;
  std::vector<double> u;  // unknown rows
  std::vector<double> p;
  double cost = 0.0;
  int iterations = 0;
  double residual = 0.0;
  std::vector<double> history;  // optimality residual per iteration
  explicit ControlResult(const Grid& g) : v(g) {}
};

/// Reduced conjugate gradients on J from the starting control v_start.
/// Throws SolverError (with the best residual) when max_iterations is hit.
ControlResult minimize(const ControlProblem& problem, const BoundaryField& v_start, double tol,
                       int max_iterations);

}  // namespace dsf
