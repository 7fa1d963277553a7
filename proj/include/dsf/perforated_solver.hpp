#pragma once

#include <utility>
#include <vector>

#include "dsf/control.hpp"
#include "dsf/core_model.hpp"

namespace dsf {

/// Origin value of the lattice Green's function of the unit 7-point
/// Laplacian on Z^3 (Watson's integral divided by 6).
inline constexpr double kLatticeGreenOrigin = 0.252731009858663003026;

/// Grid for eps-solves: grid_nodes - 1 cells, or 4/eps cells when unset.
/// The cell count must be a multiple of 2/eps (particle centers on nodes)
/// and at least 4/eps (h <= eps/4); the particle radius must stay below the
/// effective lattice radius h / (4 pi kLatticeGreenOrigin).
Grid eps_grid(const ProblemConfig& cfg);

struct MonopoleState {
  std::vector<double> q;  // net flux absorbed by each particle
  std::vector<double> U;  // background field at each particle, self field removed
  int iterations = 0;     // linear iterations of the state solve
  double closure_residual = 0.0;  // max_j |q_j + sigma_j eps^(n-1) U_j| / max_j |q_j|
};

/// Particle data bound to a grid.
///
/// Each particle is a point sink at its grid node p with flux q = -kappa U,
/// kappa = effective_robin(a) eps^(n-1). The node value carries the lattice
/// self field, u_p = U + q W/h, so q = -tau u_p with tau = kappa/(1 - kappa W/h).
struct ParticleCoupling {
  std::vector<std::size_t> unknown;  // unknown index of each particle node
  std::vector<double> kappa;
  std::vector<double> tau;
  std::vector<double> energy_coeff;  // (trB/3)(1/(4 pi a_eps) - W/h)
};

ParticleCoupling couple_particles(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid);

/// Discrete eps control problem: Neumann control on Gamma_0, particle sinks
/// eliminated into the operator, near-particle energy in the cost diagonal.
ControlProblem eps_problem(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid);

std::pair<ScalarField, MonopoleState> solve_state_eps(const ProblemConfig& cfg, const ParticleLayer& layer,
                                                      const BoundaryField& v);

double eval_J_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const BoundaryField& v);

struct EpsSolution {
  ScalarField u_eps;
  MonopoleState monopoles;
  ScalarField p_eps;
  BoundaryField v_eps;
  double j_eps = 0.0;
  double energy_eps = 0.0;
  int iterations = 0;
  std::vector<double> residuals;
  double residual() const { return residuals.empty() ? 0.0 : residuals.back(); }
  explicit EpsSolution(const Grid& g) : u_eps(g), p_eps(g), v_eps(g) {}
};

EpsSolution optimize_eps(const ProblemConfig& cfg, const ParticleLayer& layer);
EpsSolution optimize_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const BoundaryField& v_start);

/// Energy mode: v = 0, B = I, uT = 0; grid energy plus near-particle corrections.
double energy_eps(const ProblemConfig& cfg, const ParticleLayer& layer);
double energy_eps(const ProblemConfig& cfg, const ParticleLayer& layer, const Grid& grid);

}  // namespace dsf
