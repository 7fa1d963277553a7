#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "dsf/control.hpp"

namespace dsf::testing {

// Minimizer of the discrete cost assembled densely from forward solves with
// every Gamma_0 basis control. Uses no adjoint solves.
inline BoundaryField brute_force_control(const ControlProblem& cp) {
  const Grid& g = cp.grid;
  const auto ng = static_cast<Eigen::Index>(g.gamma0_count());
  const double h2 = g.spacing() * g.spacing();

  auto full = [&](const std::vector<double>& u) { return ScalarField::from_unknowns(g, u).values; };
  auto apply_q = [&](const std::vector<double>& u_full, const std::vector<double>& u_unknown) {
    auto y = cp.bform->apply(u_full);
    ScalarField f(g);
    f.values = y;
    auto r = f.restrict_to_unknowns();
    if (!cp.cost_diag.empty())
      for (std::size_t i = 0; i < r.size(); ++i) r[i] += cp.cost_diag[i] * u_unknown[i];
    return r;
  };

  std::vector<std::vector<double>> theta(static_cast<std::size_t>(ng));
  for (Eigen::Index j = 0; j < ng; ++j) {
    BoundaryField e(g);
    e.values[static_cast<std::size_t>(j)] = 1.0;
    theta[static_cast<std::size_t>(j)] = cp.solve_linear(control_load(e));
  }
  std::vector<std::vector<double>> q_theta(theta.size());
  for (std::size_t j = 0; j < theta.size(); ++j) q_theta[j] = apply_q(full(theta[j]), theta[j]);

  const auto u0 = cp.state(BoundaryField(g));
  auto w = full(u0);
  for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cp.target.values[i];
  const auto q_u0 = apply_q(w, u0);

  Eigen::MatrixXd h(ng, ng);
  Eigen::VectorXd b(ng);
  for (Eigen::Index i = 0; i < ng; ++i) {
    const auto& ti = theta[static_cast<std::size_t>(i)];
    double gi = 0.0;
    for (std::size_t k = 0; k < ti.size(); ++k) gi += ti[k] * q_u0[k];
    b(i) = -cp.eta * gi;
    for (Eigen::Index j = 0; j <= i; ++j) {
      const auto& qj = q_theta[static_cast<std::size_t>(j)];
      double s = 0.0;
      for (std::size_t k = 0; k < ti.size(); ++k) s += ti[k] * qj[k];
      h(i, j) = h(j, i) = cp.eta * s + (i == j ? cp.big_n * h2 : 0.0);
    }
  }
  const Eigen::VectorXd v = h.llt().solve(b);
  BoundaryField out(g);
  for (Eigen::Index i = 0; i < ng; ++i) out.values[static_cast<std::size_t>(i)] = v(i);
  return out;
}

inline double relative_l2(const BoundaryField& a, const BoundaryField& b) {
  double d = 0.0, n = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    d += (a.values[i] - b.values[i]) * (a.values[i] - b.values[i]);
    n += b.values[i] * b.values[i];
  }
  return n > 0.0 ? std::sqrt(d / n) : std::sqrt(d);
}

inline BoundaryField random_control(const Grid& g, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, scale);
  BoundaryField v(g);
  for (double& x : v.values) x = normal(rng);
  return v;
}

}  // namespace dsf::testing
