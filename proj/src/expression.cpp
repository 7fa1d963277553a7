#include "dsf/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "dsf/errors.hpp"

namespace dsf {

struct Polynomial::Node {
  enum class Kind { number, variable, add, sub, mul, div, neg, pow };
  Kind kind = Kind::number;
  double value = 0.0;
  int index = 0;  // variable index or integer exponent
  std::shared_ptr<const Node> lhs, rhs;

  double eval(std::span<const double> x) const {
    switch (kind) {
      case Kind::number: return value;
      case Kind::variable: return x[index];
      case Kind::add: return lhs->eval(x) + rhs->eval(x);
      case Kind::sub: return lhs->eval(x) - rhs->eval(x);
      case Kind::mul: return lhs->eval(x) * rhs->eval(x);
      case Kind::div: return lhs->eval(x) / rhs->eval(x);
      case Kind::neg: return -lhs->eval(x);
      case Kind::pow: {
        const double b = lhs->eval(x);
        double r = 1.0;
        for (int i = 0; i < index; ++i) r *= b;
        return r;
      }
    }
    return 0.0;
  }

  bool has_variable() const {
    if (kind == Kind::variable) return true;
    return (lhs && lhs->has_variable()) || (rhs && rhs->has_variable());
  }
};

namespace {

using NodePtr = std::shared_ptr<const Polynomial::Node>;
using Kind = Polynomial::Node::Kind;

class Parser {
 public:
  Parser(const std::string& text, int dim) : s_(text), dim_(dim) {}

  NodePtr parse() {
    auto n = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("polynomial '" + s_ + "': " + msg + " at offset " + std::to_string(pos_));
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  static NodePtr binary(Kind k, NodePtr a, NodePtr b) {
    auto n = std::make_shared<Polynomial::Node>();
    n->kind = k;
    n->lhs = std::move(a);
    n->rhs = std::move(b);
    return n;
  }

  NodePtr expr() {
    auto n = term();
    for (;;) {
      if (accept('+')) n = binary(Kind::add, n, term());
      else if (accept('-')) n = binary(Kind::sub, n, term());
      else return n;
    }
  }

  NodePtr term() {
    auto n = power();
    for (;;) {
      if (accept('*')) {
        n = binary(Kind::mul, n, power());
      } else if (accept('/')) {
        auto d = power();
        if (d->has_variable()) fail("division by a coordinate-dependent term");
        const double origin[1] = {0.0};
        const double dv = d->eval(std::span<const double>(origin, 0));
        if (dv == 0.0 || !std::isfinite(dv)) fail("division by zero");
        n = binary(Kind::div, n, d);
      } else {
        return n;
      }
    }
  }

  NodePtr power() {
    auto base = unary();
    if (!accept('^')) return base;
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) fail("exponent must be a non-negative integer");
    auto n = std::make_shared<Polynomial::Node>();
    n->kind = Kind::pow;
    n->index = std::atoi(s_.substr(start, pos_ - start).c_str());
    n->lhs = std::move(base);
    return n;
  }

  NodePtr unary() {
    if (accept('-')) {
      auto n = std::make_shared<Polynomial::Node>();
      n->kind = Kind::neg;
      n->lhs = unary();
      return n;
    }
    if (accept('+')) return unary();
    return primary();
  }

  NodePtr primary() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    if (accept('(')) {
      auto n = expr();
      if (!accept(')')) fail("missing ')'");
      return n;
    }
    const char c = s_[pos_];
    if (c == 'x') {
      ++pos_;
      const std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      if (start == pos_) fail("variable needs an index");
      const int idx = std::atoi(s_.substr(start, pos_ - start).c_str());
      if (idx < 1 || idx > dim_) fail("variable x" + std::to_string(idx) + " out of range");
      auto n = std::make_shared<Polynomial::Node>();
      n->kind = Kind::variable;
      n->index = idx - 1;
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double v = std::strtod(begin, &end);
      if (end == begin) fail("malformed number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Polynomial::Node>();
      n->kind = Kind::number;
      n->value = v;
      return n;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  const std::string& s_;
  int dim_;
  std::size_t pos_ = 0;
};

}  // namespace

Polynomial Polynomial::parse(const std::string& text, int dimension) {
  Polynomial p;
  p.text_ = text;
  p.dimension_ = dimension;
  p.root_ = Parser(text, dimension).parse();
  return p;
}

double Polynomial::operator()(std::span<const double> x) const { return root_->eval(x); }

bool Polynomial::depends_on_coordinates() const { return root_->has_variable(); }

}  // namespace dsf
