#pragma once

#include <memory>
#include <span>
#include <vector>

#include "dsf/fields.hpp"
#include "dsf/sparse.hpp"

namespace dsf {

/// -Laplace with Robin coefficient `robin` on Gamma_0 and Dirichlet data on
/// Gamma_1 (zero unless `dirichlet` is given). Node-centered finite volumes:
/// the 7-point stencil scaled by h^3 in the interior, half cells on Gamma_0,
/// Robin mass h^2 sigma. The matrix is symmetric positive definite; rhs holds
/// the Dirichlet lift only. The preconditioner is the spectral inverse of the
/// operator with the mean Robin coefficient.
LinearSystem assemble_poisson(const Grid& grid, const BoundaryField& robin,
                              const ScalarField* dirichlet = nullptr);

/// Discrete form (w, z) -> int B grad w . grad z on a grid.
///
/// Cell-wise: diagonal entries of B weight the four edge differences of the
/// cell along each axis, off-diagonal entries weight products of
/// cell-averaged differences. B is frozen at cell centers. For B = I the
/// form equals the stiffness of assemble_poisson.
class BForm {
 public:
  BForm(const Grid& grid, const MatrixField& b);

  const Grid& grid() const { return grid_; }
  /// S_B w on every node.
  std::vector<double> apply(std::span<const double> w) const;
  double energy(std::span<const double> w) const;

 private:
  void cell_apply(std::span<const double> w, std::span<double> y) const;
  Grid grid_;
  bool constant_isotropic_ = false;
  double scale_ = 1.0;
  std::vector<double> cells_;  // b11 b22 b33 b12 b13 b23 per cell
};

/// Weak-form right-hand side of div(B grad w): S_B w at the unknown rows.
std::vector<double> assemble_divBgrad_rhs(const Grid& grid, const MatrixField& b, const ScalarField& w);

/// sqrt(int B grad w . grad w).
double weighted_h1_seminorm(const Grid& grid, const MatrixField& b, const ScalarField& w);

/// Lumped-mass load int f phi_i at the unknown rows.
std::vector<double> load_vector(const Grid& grid, const CoefficientField& f);
std::vector<double> load_vector(const ScalarField& f);

/// Boundary mass applied to a control: h^2 v at the Gamma_0 unknowns, zero elsewhere.
std::vector<double> control_load(const BoundaryField& v);

}  // namespace dsf
