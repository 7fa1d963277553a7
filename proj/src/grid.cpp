#include "dsf/grid.hpp"

#include <cmath>
#include <string>

#include "dsf/errors.hpp"

namespace dsf {

Grid::Grid(int cells) : cells_(cells) {
  if (cells < 2) throw ConfigError("grid needs at least 2 cells per axis");
}

std::size_t Grid::node_count() const {
  const auto m = static_cast<std::size_t>(cells_ + 1);
  return m * m * m;
}

std::size_t Grid::unknown_count() const {
  const auto m = static_cast<std::size_t>(cells_ - 1);
  return m * m * static_cast<std::size_t>(cells_);
}

std::size_t Grid::gamma0_count() const {
  const auto m = static_cast<std::size_t>(cells_ - 1);
  return m * m;
}

std::array<int, 3> Grid::unknown_to_ijk(std::size_t u) const {
  const auto m = static_cast<std::size_t>(cells_ - 1);
  const int i = static_cast<int>(u % m) + 1;
  const int j = static_cast<int>((u / m) % m) + 1;
  const int k = static_cast<int>(u / (m * m));
  return {i, j, k};
}

NodeKind Grid::kind(int i, int j, int k) const {
  if (i == 0 || j == 0 || i == cells_ || j == cells_ || k == cells_) return NodeKind::gamma1;
  return k == 0 ? NodeKind::gamma0 : NodeKind::interior;
}

double Grid::volume_weight(int i, int j, int k) const {
  const double h = spacing();
  double w = h * h * h;
  for (int c : {i, j, k})
    if (c == 0 || c == cells_) w *= 0.5;
  return w;
}

double Grid::face_weight(int i, int j) const {
  const double h = spacing();
  double w = h * h;
  for (int c : {i, j})
    if (c == 0 || c == cells_) w *= 0.5;
  return w;
}

ScalarField ScalarField::sample(const Grid& g, const std::function<double(double, double, double)>& fn) {
  ScalarField s(g);
  const int m = g.cells();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) {
        const auto x = g.coord(i, j, k);
        s.at(i, j, k) = fn(x[0], x[1], x[2]);
      }
  return s;
}

std::vector<double> ScalarField::restrict_to_unknowns() const {
  std::vector<double> u(grid.unknown_count());
  const int m = grid.cells();
  std::size_t p = 0;
  for (int k = 0; k < m; ++k)
    for (int j = 1; j < m; ++j)
      for (int i = 1; i < m; ++i) u[p++] = at(i, j, k);
  return u;
}

ScalarField ScalarField::from_unknowns(const Grid& g, std::span<const double> u, const ScalarField* boundary) {
  if (u.size() != g.unknown_count()) throw AssemblyError("unknown vector length does not match the grid");
  ScalarField s = boundary ? *boundary : ScalarField(g);
  const int m = g.cells();
  std::size_t p = 0;
  for (int k = 0; k < m; ++k)
    for (int j = 1; j < m; ++j)
      for (int i = 1; i < m; ++i) s.at(i, j, k) = u[p++];
  return s;
}

BoundaryField BoundaryField::sample(const Grid& g, const std::function<double(double, double)>& fn) {
  BoundaryField b(g);
  const int m = g.cells();
  const double h = g.spacing();
  for (int j = 1; j < m; ++j)
    for (int i = 1; i < m; ++i) b.at(i, j) = fn(i * h, j * h);
  return b;
}

BoundaryField BoundaryField::trace(const ScalarField& u) {
  BoundaryField b(u.grid);
  const int m = u.grid.cells();
  for (int j = 1; j < m; ++j)
    for (int i = 1; i < m; ++i) b.at(i, j) = u.at(i, j, 0);
  return b;
}

void require_same_grid(const Grid& a, const Grid& b, const char* what) {
  if (!(a == b))
    throw AssemblyError(std::string(what) + ": grid mismatch (" + std::to_string(a.cells()) + " vs " +
                        std::to_string(b.cells()) + " cells)");
}

double integrate_volume(const ScalarField& w) {
  const Grid& g = w.grid;
  const int m = g.cells();
  double s = 0.0;
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) s += g.volume_weight(i, j, k) * w.at(i, j, k);
  return s;
}

double integrate_volume(const ScalarField& w, const ScalarField& z) {
  require_same_grid(w.grid, z.grid, "integrate_volume");
  const Grid& g = w.grid;
  const int m = g.cells();
  double s = 0.0;
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) s += g.volume_weight(i, j, k) * w.at(i, j, k) * z.at(i, j, k);
  return s;
}

double integrate_volume(const Grid& g, const std::function<double(double, double, double)>& fn) {
  return integrate_volume(ScalarField::sample(g, fn));
}

double integrate_gamma0(const Grid& g, std::span<const double> face_values) {
  const int m = g.cells();
  if (face_values.size() != static_cast<std::size_t>((m + 1) * (m + 1)))
    throw AssemblyError("integrate_gamma0: face vector length does not match the grid");
  double s = 0.0;
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) s += g.face_weight(i, j) * face_values[static_cast<std::size_t>(j * (m + 1) + i)];
  return s;
}

double integrate_gamma0(const Grid& g, const std::function<double(double, double)>& fn) {
  const int m = g.cells();
  const double h = g.spacing();
  std::vector<double> face(static_cast<std::size_t>((m + 1) * (m + 1)));
  for (int j = 0; j <= m; ++j)
    for (int i = 0; i <= m; ++i) face[static_cast<std::size_t>(j * (m + 1) + i)] = fn(i * h, j * h);
  return integrate_gamma0(g, face);
}

double integrate_gamma0(const BoundaryField& v) {
  const double h = v.grid.spacing();
  double s = 0.0;
  for (double x : v.values) s += x;
  return s * h * h;
}

double integrate_gamma0(const BoundaryField& v, const BoundaryField& w) {
  require_same_grid(v.grid, w.grid, "integrate_gamma0");
  const double h = v.grid.spacing();
  double s = 0.0;
  for (std::size_t i = 0; i < v.values.size(); ++i) s += v.values[i] * w.values[i];
  return s * h * h;
}

double l2_norm_gamma0(const BoundaryField& v) { return std::sqrt(integrate_gamma0(v, v)); }

double l2_norm_volume(const ScalarField& w) { return std::sqrt(integrate_volume(w, w)); }

}  // namespace dsf
