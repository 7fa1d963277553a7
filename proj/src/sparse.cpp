#include "dsf/sparse.hpp"

#include <cmath>

#include "dsf/errors.hpp"
#include "dsf/parallel.hpp"

namespace dsf {

void CsrMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const auto n = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (std::ptrdiff_t r = 0; r < n; ++r) {
    double s = 0.0;
    for (std::size_t p = row_ptr[static_cast<std::size_t>(r)]; p < row_ptr[static_cast<std::size_t>(r) + 1]; ++p)
      s += val[p] * x[col[p]];
    y[static_cast<std::size_t>(r)] = s;
  }
}

std::vector<double> CsrMatrix::diagonal() const {
  std::vector<double> d(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = row_ptr[r]; p < row_ptr[r + 1]; ++p)
      if (col[p] == r) d[r] += val[p];
  return d;
}

void CsrMatrix::add_to_diagonal(std::size_t row, double value) {
  for (std::size_t p = row_ptr[row]; p < row_ptr[row + 1]; ++p)
    if (col[p] == row) {
      val[p] += value;
      return;
    }
  throw AssemblyError("add_to_diagonal: row has no diagonal entry");
}

CsrMatrix CsrMatrix::identity(std::size_t n) {
  CsrMatrix a;
  a.rows = n;
  a.row_ptr.resize(n + 1);
  a.col.resize(n);
  a.val.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    a.row_ptr[i + 1] = i + 1;
    a.col[i] = static_cast<std::uint32_t>(i);
  }
  return a;
}

JacobiPreconditioner::JacobiPreconditioner(const CsrMatrix& a) : inv_diag_(a.diagonal()) {
  for (double& d : inv_diag_) {
    if (!(d > 0.0)) throw AssemblyError("Jacobi preconditioner needs a positive diagonal");
    d = 1.0 / d;
  }
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) z[i] = inv_diag_[i] * r[i];
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SolveStats pcg(const CsrMatrix& a, std::span<const double> b, std::span<double> x,
               const Preconditioner& m, const SolverParameters& params) {
  if (!(params.rel_tol > 0.0)) throw ConfigError("linear solver tolerance must be positive");
  if (params.max_iterations < 1) throw ConfigError("linear solver needs max_iterations >= 1");
  const std::size_t n = a.rows;
  if (b.size() != n || x.size() != n) throw AssemblyError("pcg: vector length does not match the matrix");

  SolveStats stats;
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  std::vector<double> r(n), z(n), p(n), q(n);
  a.multiply(x, q);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - q[i];
  double rnorm = std::sqrt(dot(r, r));
  stats.relative_residual = rnorm / bnorm;
  if (stats.relative_residual <= params.rel_tol) return stats;

  m.apply(r, z);
  p = z;
  double rz = dot(r, z);
  while (stats.iterations < params.max_iterations) {
    a.multiply(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++stats.iterations;
    rnorm = std::sqrt(dot(r, r));
    stats.relative_residual = rnorm / bnorm;
    if (stats.relative_residual <= params.rel_tol) return stats;
    m.apply(r, z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  throw SolverError("conjugate gradients did not converge in " + std::to_string(params.max_iterations) +
                        " iterations",
                    stats.relative_residual);
}

ScalarField solve(const LinearSystem& sys, SolveStats* stats) {
  std::vector<double> x(sys.matrix.rows, 0.0);
  SolveStats s;
  if (sys.preconditioner) {
    s = pcg(sys.matrix, sys.rhs, x, *sys.preconditioner, sys.params);
  } else {
    JacobiPreconditioner jac(sys.matrix);
    s = pcg(sys.matrix, sys.rhs, x, jac, sys.params);
  }
  if (stats) *stats = s;
  return ScalarField::from_unknowns(sys.grid, x, &sys.dirichlet);
}

}  // namespace dsf
