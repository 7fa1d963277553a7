#include "dsf/fields.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsf/errors.hpp"

namespace dsf {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep)) out.push_back(trim(cur));
  return out;
}

double parse_number(const std::string& s) {
  const std::string t = trim(s);
  if (t.empty()) throw ConfigError("empty numeric value");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || !std::isfinite(v))
    throw ConfigError("malformed number '" + t + "'");
  return v;
}

std::string resolve(const std::string& path, const std::string& base_dir) {
  std::filesystem::path p(path);
  if (p.is_relative() && !base_dir.empty()) return (std::filesystem::path(base_dir) / p).string();
  return path;
}

}  // namespace

std::shared_ptr<const SampleTable> SampleTable::load(const std::string& path, int dimension) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open sample file '" + path + "'");
  auto t = std::make_shared<SampleTable>();
  t->points_per_axis.resize(static_cast<std::size_t>(dimension));
  std::size_t total = 1;
  for (auto& m : t->points_per_axis) {
    if (!(in >> m) || m < 2) throw ConfigError("sample file '" + path + "': bad lattice header");
    total *= static_cast<std::size_t>(m);
  }
  if (!(in >> t->components) || t->components < 1)
    throw ConfigError("sample file '" + path + "': bad component count");
  total *= static_cast<std::size_t>(t->components);
  t->values.reserve(total);
  double v;
  while (in >> v) {
    if (!std::isfinite(v)) throw ConfigError("sample file '" + path + "': non-finite value");
    t->values.push_back(v);
  }
  if (!in.eof()) throw ConfigError("sample file '" + path + "': malformed value");
  if (t->values.size() != total)
    throw ConfigError("sample file '" + path + "': expected " + std::to_string(total) +
                      " values, found " + std::to_string(t->values.size()));
  return t;
}

double SampleTable::interpolate(std::span<const double> x, int component) const {
  const std::size_t dim = points_per_axis.size();
  std::vector<std::size_t> lo(dim);
  std::vector<double> frac(dim);
  for (std::size_t d = 0; d < dim; ++d) {
    const int m = points_per_axis[d];
    const double s = std::clamp(x[d], 0.0, 1.0) * (m - 1);
    std::size_t i = static_cast<std::size_t>(std::floor(s));
    if (i >= static_cast<std::size_t>(m - 1)) i = static_cast<std::size_t>(m - 2);
    lo[d] = i;
    frac[d] = s - static_cast<double>(i);
  }
  double result = 0.0;
  for (std::size_t corner = 0; corner < (std::size_t{1} << dim); ++corner) {
    double w = 1.0;
    std::size_t flat = 0, stride = 1;
    for (std::size_t d = 0; d < dim; ++d) {
      const bool up = (corner >> d) & 1u;
      w *= up ? frac[d] : 1.0 - frac[d];
      flat += (lo[d] + (up ? 1 : 0)) * stride;
      stride *= static_cast<std::size_t>(points_per_axis[d]);
    }
    if (w != 0.0) result += w * values[flat * static_cast<std::size_t>(components) + component];
  }
  return result;
}

CoefficientField CoefficientField::constant(double value) {
  if (!std::isfinite(value)) throw ConfigError("constant field value must be finite");
  CoefficientField f;
  f.rule_ = Rule::constant;
  f.value_ = value;
  f.poly_.reset();
  return f;
}

CoefficientField CoefficientField::polynomial(const std::string& expression, int dimension) {
  CoefficientField f;
  f.rule_ = Rule::polynomial;
  f.poly_ = std::make_shared<const Polynomial>(Polynomial::parse(expression, dimension));
  return f;
}

CoefficientField CoefficientField::sampled(std::shared_ptr<const SampleTable> table, std::string path,
                                           int component) {
  CoefficientField f;
  f.rule_ = Rule::samples;
  f.table_ = std::move(table);
  f.path_ = std::move(path);
  f.component_ = component;
  return f;
}

CoefficientField CoefficientField::parse(const std::string& spec, int dimension,
                                         const std::string& base_dir) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("field value '" + spec + "' must be const:<v>, poly:<expr> or samples:<path>");
  const std::string rule = trim(spec.substr(0, colon));
  const std::string body = trim(spec.substr(colon + 1));
  if (rule == "const") return constant(parse_number(body));
  if (rule == "poly") return polynomial(body, dimension);
  if (rule == "samples") {
    auto table = SampleTable::load(resolve(body, base_dir), dimension);
    if (table->components != 1)
      throw ConfigError("scalar field sample file '" + body + "' must have one component");
    return sampled(std::move(table), body);
  }
  throw ConfigError("unknown field rule '" + rule + "'");
}

double CoefficientField::operator()(std::span<const double> x) const {
  switch (rule_) {
    case Rule::constant: return value_;
    case Rule::polynomial: return (*poly_)(x);
    case Rule::samples: return table_->interpolate(x, component_);
  }
  return 0.0;
}

std::string CoefficientField::to_string() const {
  switch (rule_) {
    case Rule::constant: return "const:" + format_double(value_);
    case Rule::polynomial: return "poly:" + poly_->text();
    case Rule::samples: return "samples:" + path_;
  }
  return {};
}

MatrixField MatrixField::identity(int n, double scale) {
  return isotropic(n, CoefficientField::constant(scale));
}

MatrixField MatrixField::isotropic(int n, CoefficientField scale) {
  MatrixField m;
  m.n_ = n;
  m.entries_ = {std::move(scale)};
  return m;
}

MatrixField MatrixField::full(int n, std::vector<CoefficientField> entries) {
  if (entries.size() != static_cast<std::size_t>(n * n))
    throw ConfigError("matrix field needs " + std::to_string(n * n) + " entries");
  MatrixField m;
  m.n_ = n;
  m.entries_ = std::move(entries);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const auto& a = m.entries_[static_cast<std::size_t>(i * n + j)];
      const auto& b = m.entries_[static_cast<std::size_t>(j * n + i)];
      if (a.is_constant() && b.is_constant() && a.constant_value() != b.constant_value())
        throw ConfigError("matrix field B is not symmetric");
    }
  return m;
}

MatrixField MatrixField::parse(const std::string& spec, int dimension, const std::string& base_dir) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw ConfigError("matrix field value '" + spec + "' lacks a rule");
  const std::string rule = trim(spec.substr(0, colon));
  const std::string body = trim(spec.substr(colon + 1));
  if (rule == "const") {
    const auto parts = split(body, ',');
    if (parts.size() == 1) return isotropic(dimension, CoefficientField::constant(parse_number(parts[0])));
    std::vector<CoefficientField> e;
    for (const auto& p : parts) e.push_back(CoefficientField::constant(parse_number(p)));
    return full(dimension, std::move(e));
  }
  if (rule == "poly") {
    const auto parts = split(body, ';');
    if (parts.size() == 1) return isotropic(dimension, CoefficientField::polynomial(parts[0], dimension));
    std::vector<CoefficientField> e;
    for (const auto& p : parts) e.push_back(CoefficientField::polynomial(p, dimension));
    return full(dimension, std::move(e));
  }
  if (rule == "samples") {
    auto table = SampleTable::load(resolve(body, base_dir), dimension);
    MatrixField m;
    m.n_ = dimension;
    m.samples_path_ = body;
    m.entries_.clear();
    if (table->components == 1) {
      m.entries_ = {CoefficientField::sampled(table, body, 0)};
    } else if (table->components == dimension * dimension) {
      for (int c = 0; c < table->components; ++c) m.entries_.push_back(CoefficientField::sampled(table, body, c));
    } else {
      throw ConfigError("matrix sample file '" + body + "' must have 1 or n*n components");
    }
    return m;
  }
  throw ConfigError("unknown matrix field rule '" + rule + "'");
}

bool MatrixField::is_constant() const {
  return std::all_of(entries_.begin(), entries_.end(), [](const auto& e) { return e.is_constant(); });
}

void MatrixField::evaluate(std::span<const double> x, std::span<double> out) const {
  const auto n = static_cast<std::size_t>(n_);
  if (is_isotropic()) {
    const double s = entries_[0](x);
    for (std::size_t i = 0; i < n * n; ++i) out[i] = 0.0;
    for (std::size_t i = 0; i < n; ++i) out[i * n + i] = s;
    return;
  }
  for (std::size_t i = 0; i < n * n; ++i) out[i] = entries_[i](x);
}

double MatrixField::trace(std::span<const double> x) const {
  if (is_isotropic()) return n_ * entries_[0](x);
  double t = 0.0;
  for (int i = 0; i < n_; ++i) t += entries_[static_cast<std::size_t>(i * n_ + i)](x);
  return t;
}

double MatrixField::asymmetry(std::span<const double> x) const {
  if (is_isotropic()) return 0.0;
  std::vector<double> b(static_cast<std::size_t>(n_ * n_));
  evaluate(x, b);
  double worst = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int j = i + 1; j < n_; ++j)
      worst = std::max(worst, std::abs(b[static_cast<std::size_t>(i * n_ + j)] -
                                       b[static_cast<std::size_t>(j * n_ + i)]));
  return worst;
}

std::array<double, 2> MatrixField::eigen_bounds(std::span<const double> x) const {
  if (is_isotropic()) {
    const double s = entries_[0](x);
    return {s, s};
  }
  std::vector<double> b(static_cast<std::size_t>(n_ * n_));
  evaluate(x, b);
  Eigen::MatrixXd m = Eigen::Map<Eigen::MatrixXd>(b.data(), n_, n_);
  m = 0.5 * (m + m.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
  return {es.eigenvalues().minCoeff(), es.eigenvalues().maxCoeff()};
}

std::string MatrixField::to_string() const {
  if (!samples_path_.empty()) return "samples:" + samples_path_;
  if (is_isotropic()) return entries_[0].to_string();
  const bool consts = is_constant();
  std::string out = consts ? "const:" : "poly:";
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (i) out += consts ? "," : ";";
    const auto& e = entries_[i];
    out += consts ? format_double(e.constant_value())
                  : (e.is_constant() ? format_double(e.constant_value()) : e.to_string().substr(5));
  }
  return out;
}

}  // namespace dsf
