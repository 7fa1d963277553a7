#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace dsf {

enum class NodeKind { interior, gamma0, gamma1 };

/// Uniform node grid on the unit cube with `cells` cells per axis.
///
/// Unknowns are all nodes off Gamma_1: k = 0..cells-1 and i, j =
/// 1..cells-1, numbered layer by layer from the bottom face, so the first
/// (cells-1)^2 unknowns are exactly the Gamma_0 nodes. Edges and corners of
/// the bottom face belong to Gamma_1.
class Grid {
 public:
  explicit Grid(int cells);

  int cells() const { return cells_; }
  int nodes_per_axis() const { return cells_ + 1; }
  double spacing() const { return 1.0 / cells_; }

  std::size_t node_count() const;
  std::size_t unknown_count() const;
  std::size_t gamma0_count() const;

  std::size_t node(int i, int j, int k) const {
    const auto m = static_cast<std::size_t>(cells_ + 1);
    return (static_cast<std::size_t>(k) * m + static_cast<std::size_t>(j)) * m + static_cast<std::size_t>(i);
  }
  std::size_t unknown(int i, int j, int k) const {
    const auto m = static_cast<std::size_t>(cells_ - 1);
    return (static_cast<std::size_t>(k) * m + static_cast<std::size_t>(j - 1)) * m + static_cast<std::size_t>(i - 1);
  }
  std::array<int, 3> unknown_to_ijk(std::size_t u) const;
  std::array<double, 3> coord(int i, int j, int k) const {
    const double h = spacing();
    return {i * h, j * h, k * h};
  }
  NodeKind kind(int i, int j, int k) const;

  /// Trapezoid weights (exact for multilinear integrands).
  double volume_weight(int i, int j, int k) const;
  double face_weight(int i, int j) const;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  int cells_;
};

/// Nodal values on every grid node.
struct ScalarField {
  Grid grid;
  std::vector<double> values;

  explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), values(g.node_count(), fill) {}
  static ScalarField sample(const Grid& g, const std::function<double(double, double, double)>& fn);

  double& at(int i, int j, int k) { return values[grid.node(i, j, k)]; }
  double at(int i, int j, int k) const { return values[grid.node(i, j, k)]; }

  /// Values at the unknown nodes, in unknown order.
  std::vector<double> restrict_to_unknowns() const;
  /// Inverse of restrict_to_unknowns; Gamma_1 nodes take `boundary`'s values (or zero).
  static ScalarField from_unknowns(const Grid& g, std::span<const double> u, const ScalarField* boundary = nullptr);
};

/// Values on the Gamma_0 nodes (interior of the bottom face), i fastest.
struct BoundaryField {
  Grid grid;
  std::vector<double> values;

  explicit BoundaryField(const Grid& g, double fill = 0.0) : grid(g), values(g.gamma0_count(), fill) {}
  static BoundaryField sample(const Grid& g, const std::function<double(double, double)>& fn);

  double& at(int i, int j) { return values[grid.unknown(i, j, 0)]; }
  double at(int i, int j) const { return values[grid.unknown(i, j, 0)]; }
  /// Trace of a nodal field on Gamma_0.
  static BoundaryField trace(const ScalarField& u);
};

// Quadrature (composite trapezoid on nodes).
double integrate_volume(const ScalarField& w);
double integrate_volume(const ScalarField& w, const ScalarField& z);
double integrate_volume(const Grid& g, const std::function<double(double, double, double)>& fn);
/// Integral over the whole bottom face of a function given on all (cells+1)^2 face nodes.
double integrate_gamma0(const Grid& g, std::span<const double> face_values);
double integrate_gamma0(const Grid& g, const std::function<double(double, double)>& fn);
/// Boundary fields vanish on the face edges (they are Gamma_1 nodes).
double integrate_gamma0(const BoundaryField& v);
double integrate_gamma0(const BoundaryField& v, const BoundaryField& w);
double l2_norm_gamma0(const BoundaryField& v);
double l2_norm_volume(const ScalarField& w);

void require_same_grid(const Grid& a, const Grid& b, const char* what);

}  // namespace dsf
