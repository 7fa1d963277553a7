#pragma once

#include <memory>
#include <vector>

#include "dsf/sparse.hpp"

namespace dsf {

/// Exact inverse of the constant-coefficient grid operator
///
///   L + diag(layer_shift[k] on every node of layer k),
///
/// where L is the 7-point stiffness with Dirichlet lateral and top faces and
/// a natural (half-cell) bottom row. Sine transforms diagonalize the lateral
/// directions; each lateral mode leaves a tridiagonal solve in x3. Used as a
/// PCG preconditioner for variable Robin data and particle absorption.
class SpectralPreconditioner final : public Preconditioner {
 public:
  SpectralPreconditioner(const Grid& grid, std::vector<double> layer_shift);
  ~SpectralPreconditioner() override;
  SpectralPreconditioner(const SpectralPreconditioner&) = delete;
  SpectralPreconditioner& operator=(const SpectralPreconditioner&) = delete;

  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  Grid grid_;
  std::vector<double> inv_pivot_;  // [layer][mode]
  void* plan_ = nullptr;           // fftw_plan
};

}  // namespace dsf
