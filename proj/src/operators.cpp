#include "dsf/operators.hpp"

#include <algorithm>
#include <cmath>

#include "dsf/errors.hpp"
#include "dsf/fast_poisson.hpp"
#include "dsf/parallel.hpp"

namespace dsf {

namespace {

// Cells sharing an edge along `axis` at node (i,j,k), times h/4.
double edge_weight(const Grid& g, int axis, int i, int j, int k) {
  const int m = g.cells();
  auto count = [m](int c) { return (c > 0 ? 1 : 0) + (c < m ? 1 : 0); };
  int n = 1;
  if (axis != 0) n *= count(i);
  if (axis != 1) n *= count(j);
  if (axis != 2) n *= count(k);
  return g.spacing() * n / 4.0;
}

}  // namespace

LinearSystem assemble_poisson(const Grid& grid, const BoundaryField& robin, const ScalarField* dirichlet) {
  require_same_grid(grid, robin.grid, "assemble_poisson");
  if (dirichlet) require_same_grid(grid, dirichlet->grid, "assemble_poisson");
  double mean_robin = 0.0;
  for (double s : robin.values) {
    if (!(s >= 0.0) || !std::isfinite(s)) throw AssemblyError("Robin coefficient must be finite and >= 0");
    mean_robin += s;
  }
  if (!robin.values.empty()) mean_robin /= static_cast<double>(robin.values.size());

  const int m = grid.cells();
  const double h = grid.spacing();
  LinearSystem sys(grid);
  if (dirichlet) sys.dirichlet = *dirichlet;
  const std::size_t n = grid.unknown_count();
  CsrMatrix& a = sys.matrix;
  a.rows = n;
  a.row_ptr.assign(n + 1, 0);
  a.col.reserve(7 * n);
  a.val.reserve(7 * n);
  sys.rhs.assign(n, 0.0);

  static constexpr int offsets[6][3] = {{0, 0, -1}, {0, -1, 0}, {-1, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  for (std::size_t row = 0; row < n; ++row) {
    const auto [i, j, k] = grid.unknown_to_ijk(row);
    double diag = 0.0;
    std::size_t diag_pos = 0;
    for (int e = 0; e < 6; ++e) {
      const int ni = i + offsets[e][0], nj = j + offsets[e][1], nk = k + offsets[e][2];
      if (nk < 0) continue;
      const int axis = offsets[e][0] != 0 ? 0 : (offsets[e][1] != 0 ? 1 : 2);
      // Edge weight is evaluated at the lower end along the axis.
      const int li = std::min(i, ni), lj = std::min(j, nj), lk = std::min(k, nk);
      const double w = edge_weight(grid, axis, li, lj, lk);
      diag += w;
      if (e == 3) {
        diag_pos = a.col.size();
        a.col.push_back(static_cast<std::uint32_t>(row));
        a.val.push_back(0.0);
      }
      if (grid.kind(ni, nj, nk) == NodeKind::gamma1) {
        if (dirichlet) sys.rhs[row] += w * dirichlet->at(ni, nj, nk);
      } else {
        a.col.push_back(static_cast<std::uint32_t>(grid.unknown(ni, nj, nk)));
        a.val.push_back(-w);
      }
    }
    if (k == 0) diag += h * h * robin.at(i, j);
    a.val[diag_pos] = diag;
    a.row_ptr[row + 1] = a.col.size();
  }

  std::vector<double> shift(static_cast<std::size_t>(m), 0.0);
  shift[0] = h * h * mean_robin;
  sys.preconditioner = std::make_shared<SpectralPreconditioner>(grid, std::move(shift));
  return sys;
}

BForm::BForm(const Grid& grid, const MatrixField& b) : grid_(grid) {
  if (b.dimension() != 3) throw AssemblyError("BForm: grid operators require n = 3");
  if (b.is_constant() && b.is_isotropic()) {
    constant_isotropic_ = true;
    const std::array<double, 3> origin{0.0, 0.0, 0.0};
    scale_ = b.trace(origin) / 3.0;
    return;
  }
  const int m = grid.cells();
  const double h = grid.spacing();
  cells_.resize(static_cast<std::size_t>(m) * m * m * 6);
  std::array<double, 9> e{};
  std::size_t p = 0;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i) {
        const std::array<double, 3> x{(i + 0.5) * h, (j + 0.5) * h, (k + 0.5) * h};
        b.evaluate(x, e);
        const double tol = 1e-12 * (std::abs(e[0]) + std::abs(e[4]) + std::abs(e[8]));
        if (std::abs(e[1] - e[3]) > tol || std::abs(e[2] - e[6]) > tol || std::abs(e[5] - e[7]) > tol)
          throw AssemblyError("matrix field B is not symmetric at a cell center");
        cells_[p++] = e[0];
        cells_[p++] = e[4];
        cells_[p++] = e[8];
        cells_[p++] = e[1];
        cells_[p++] = e[2];
        cells_[p++] = e[5];
      }
}

void BForm::cell_apply(std::span<const double> w, std::span<double> y) const {
  const int m = grid_.cells();
  const double h = grid_.spacing();
  const double h2 = h * h;
  std::size_t p = 0;
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i, p += 6) {
        const double* b = cells_.data() + p;
        std::size_t idx[8];
        double v[8];
        for (int c = 0; c < 8; ++c) {
          idx[c] = grid_.node(i + (c & 1), j + ((c >> 1) & 1), k + ((c >> 2) & 1));
          v[c] = w[idx[c]];
        }
        double g[3] = {0.0, 0.0, 0.0};
        double yl[8] = {};
        for (int axis = 0; axis < 3; ++axis) {
          const int bit = 1 << axis;
          for (int c = 0; c < 8; ++c) {
            if (c & bit) continue;
            const double d = (v[c | bit] - v[c]) / h;
            g[axis] += 0.25 * d;
            const double t = 0.25 * b[axis] * d * h2;
            yl[c | bit] += t;
            yl[c] -= t;
          }
        }
        // Off-diagonal pairs (0,1), (0,2), (1,2) stored as b12, b13, b23.
        static constexpr int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
        for (int q = 0; q < 3; ++q) {
          const double bkl = b[3 + q];
          if (bkl == 0.0) continue;
          const int k0 = pairs[q][0], k1 = pairs[q][1];
          for (int c = 0; c < 8; ++c) {
            const double s0 = (c >> k0) & 1 ? 1.0 : -1.0;
            const double s1 = (c >> k1) & 1 ? 1.0 : -1.0;
            yl[c] += 0.25 * h2 * bkl * (s0 * g[k1] + s1 * g[k0]);
          }
        }
        for (int c = 0; c < 8; ++c) y[idx[c]] += yl[c];
      }
}

std::vector<double> BForm::apply(std::span<const double> w) const {
  if (w.size() != grid_.node_count()) throw AssemblyError("BForm: vector length does not match the grid");
  std::vector<double> y(w.size(), 0.0);
  if (!constant_isotropic_) {
    cell_apply(w, y);
    return y;
  }
  const int m = grid_.cells();
#pragma omp parallel for num_threads(thread_count()) schedule(static)
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const double c = w[grid_.node(i, j, k)];
        double s = 0.0;
        if (i > 0) s += edge_weight(grid_, 0, i - 1, j, k) * (c - w[grid_.node(i - 1, j, k)]);
        if (i < m) s += edge_weight(grid_, 0, i, j, k) * (c - w[grid_.node(i + 1, j, k)]);
        if (j > 0) s += edge_weight(grid_, 1, i, j - 1, k) * (c - w[grid_.node(i, j - 1, k)]);
        if (j < m) s += edge_weight(grid_, 1, i, j, k) * (c - w[grid_.node(i, j + 1, k)]);
        if (k > 0) s += edge_weight(grid_, 2, i, j, k - 1) * (c - w[grid_.node(i, j, k - 1)]);
        if (k < m) s += edge_weight(grid_, 2, i, j, k) * (c - w[grid_.node(i, j, k + 1)]);
        y[grid_.node(i, j, k)] = scale_ * s;
      }
  return y;
}

double BForm::energy(std::span<const double> w) const {
  const auto y = apply(w);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * y[i];
  return s;
}

std::vector<double> assemble_divBgrad_rhs(const Grid& grid, const MatrixField& b, const ScalarField& w) {
  require_same_grid(grid, w.grid, "assemble_divBgrad_rhs");
  BForm form(grid, b);
  ScalarField y(grid);
  y.values = form.apply(w.values);
  return y.restrict_to_unknowns();
}

double weighted_h1_seminorm(const Grid& grid, const MatrixField& b, const ScalarField& w) {
  require_same_grid(grid, w.grid, "weighted_h1_seminorm");
  return std::sqrt(std::max(0.0, BForm(grid, b).energy(w.values)));
}

std::vector<double> load_vector(const Grid& grid, const CoefficientField& f) {
  if (f.is_constant()) return load_vector(ScalarField(grid, f.constant_value()));
  return load_vector(ScalarField::sample(grid, [&](double x, double y, double z) { return f(x, y, z); }));
}

std::vector<double> load_vector(const ScalarField& f) {
  const Grid& g = f.grid;
  std::vector<double> b(g.unknown_count());
  for (std::size_t u = 0; u < b.size(); ++u) {
    const auto [i, j, k] = g.unknown_to_ijk(u);
    b[u] = g.volume_weight(i, j, k) * f.at(i, j, k);
  }
  return b;
}

std::vector<double> control_load(const BoundaryField& v) {
  const Grid& g = v.grid;
  const double h = g.spacing();
  std::vector<double> b(g.unknown_count(), 0.0);
  for (std::size_t q = 0; q < v.values.size(); ++q) b[q] = h * h * v.values[q];
  return b;
}

}  // namespace dsf
