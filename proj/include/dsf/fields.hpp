#pragma once

#include <array>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dsf/expression.hpp"

namespace dsf {

/// Values on a uniform lattice over the closed unit box, interpolated
/// multilinearly. `components` values are stored per lattice point.
struct SampleTable {
  std::vector<int> points_per_axis;
  int components = 1;
  std::vector<double> values;  // x1 fastest, components innermost

  static std::shared_ptr<const SampleTable> load(const std::string& path, int dimension);
  double interpolate(std::span<const double> x, int component) const;
};

/// Scalar coefficient x -> value on the unit box: constant, polynomial, or
/// interpolated samples. Evaluation is deterministic and total on the box.
class CoefficientField {
 public:
  enum class Rule { constant, polynomial, samples };

  CoefficientField() = default;
  static CoefficientField constant(double value);
  static CoefficientField polynomial(const std::string& expression, int dimension);
  static CoefficientField sampled(std::shared_ptr<const SampleTable> table, std::string path,
                                  int component = 0);

  /// Parses `const:<v>`, `poly:<expr>` or `samples:<path>`. Relative sample
  /// paths are resolved against `base_dir`.
  static CoefficientField parse(const std::string& spec, int dimension,
                                const std::string& base_dir = "");

  double operator()(std::span<const double> x) const;
  double operator()(double x1, double x2, double x3) const {
    const std::array<double, 3> p{x1, x2, x3};
    return (*this)(p);
  }

  Rule rule() const { return rule_; }
  bool is_constant() const { return rule_ == Rule::constant; }
  double constant_value() const { return value_; }
  std::string to_string() const;

  friend bool operator==(const CoefficientField& a, const CoefficientField& b) {
    return a.to_string() == b.to_string();
  }

 private:
  Rule rule_ = Rule::constant;
  double value_ = 0.0;
  std::shared_ptr<const Polynomial> poly_;
  std::shared_ptr<const SampleTable> table_;
  std::string path_;
  int component_ = 0;
};

/// Symmetric n x n matrix field B(x). Either a scalar field times the
/// identity, or n*n component fields in row-major order.
class MatrixField {
 public:
  MatrixField() : entries_{CoefficientField::constant(1.0)} {}
  static MatrixField identity(int n, double scale = 1.0);
  static MatrixField isotropic(int n, CoefficientField scale);
  static MatrixField full(int n, std::vector<CoefficientField> entries);

  /// `const:v`, `const:b11,b12,...`, `poly:e`, `poly:e11;e12;...`, `samples:path`.
  static MatrixField parse(const std::string& spec, int dimension, const std::string& base_dir = "");

  int dimension() const { return n_; }
  bool is_isotropic() const { return entries_.size() == 1; }
  bool is_constant() const;

  /// Row-major n*n entries at x.
  void evaluate(std::span<const double> x, std::span<double> out) const;
  double trace(std::span<const double> x) const;
  /// Largest |b_ij - b_ji| at x.
  double asymmetry(std::span<const double> x) const;
  /// Smallest and largest eigenvalue of the symmetric part at x.
  std::array<double, 2> eigen_bounds(std::span<const double> x) const;

  std::string to_string() const;
  friend bool operator==(const MatrixField& a, const MatrixField& b) {
    return a.n_ == b.n_ && a.to_string() == b.to_string();
  }

 private:
  int n_ = 3;
  std::vector<CoefficientField> entries_;
  std::string samples_path_;  // set when all entries come from one sample file
};

/// Formats with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace dsf
