#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace dsf {

/// Polynomial expression in the coordinates x1..xn.
///
/// Grammar: sums and products of numbers, variables `x1`..`xn` and
/// parenthesized subexpressions, unary minus, integer powers `^k` (k >= 0)
/// and division by variable-free subexpressions. Anything that would leave
/// the polynomial ring is rejected at parse time.
class Polynomial {
 public:
  static Polynomial parse(const std::string& text, int dimension);

  double operator()(std::span<const double> x) const;
  const std::string& text() const { return text_; }
  int dimension() const { return dimension_; }
  bool depends_on_coordinates() const;

  struct Node;

 private:
  std::string text_;
  int dimension_ = 0;
  std::shared_ptr<const Node> root_;
};

}  // namespace dsf
