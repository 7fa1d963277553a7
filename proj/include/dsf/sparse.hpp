#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "dsf/grid.hpp"

namespace dsf {

/// Compressed-row sparse matrix.
struct CsrMatrix {
  std::size_t rows = 0;
  std::vector<std::size_t> row_ptr{0};
  std::vector<std::uint32_t> col;
  std::vector<double> val;

  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> diagonal() const;
  /// Adds `value` to an existing diagonal entry.
  void add_to_diagonal(std::size_t row, double value);
  static CsrMatrix identity(std::size_t n);
};

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const CsrMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  std::vector<double> inv_diag_;
};

struct SolverParameters {
  double rel_tol = 1e-10;
  int max_iterations = 2000;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Preconditioned conjugate gradients with sequential reductions. Stops at
/// ||b - Ax|| <= rel_tol ||b||; throws SolverError when iterations run out.
/// `x` holds the initial guess on entry.
SolveStats pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
               const Preconditioner& m, const SolverParameters& params);

/// Dirichlet-eliminated grid system over the unknown nodes.
struct LinearSystem {
  Grid grid;
  CsrMatrix matrix;
  std::vector<double> rhs;
  ScalarField dirichlet;  // values used on Gamma_1 nodes
  SolverParameters params;
  std::shared_ptr<const Preconditioner> preconditioner;  // Jacobi when null

  explicit LinearSystem(const Grid& g) : grid(g), dirichlet(g) {}
};

ScalarField solve(const LinearSystem& sys, SolveStats* stats = nullptr);

}  // namespace dsf
