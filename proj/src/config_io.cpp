#include "dsf/config_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

#include "dsf/errors.hpp"

namespace dsf {

namespace {

constexpr std::array kKeys = {"n",          "eps",     "c0",      "eta",     "bigN",     "grid_nodes", "tol_linear",
                              "tol_opt",    "max_iter", "sweep",  "field.a", "field.f", "field.uT",   "field.B"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  std::string where;  // "line N" or "--set"
};

double to_double(const Entry& e, const std::string& key) {
  double v = 0.0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v))
    throw ConfigError(e.where + ": " + key + " expects a number, got '" + e.value + "'");
  return v;
}

int to_int(const Entry& e, const std::string& key) {
  int v = 0;
  const char* first = e.value.data();
  const char* last = first + e.value.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ConfigError(e.where + ": " + key + " expects an integer, got '" + e.value + "'");
  return v;
}

std::vector<double> to_list(const Entry& e, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(Entry{trim(item), e.where}, key));
  if (out.empty()) throw ConfigError(e.where + ": " + key + " expects a comma-separated list");
  return out;
}

// First occurrence of `word` not embedded in a longer identifier.
std::size_t find_word(const std::string& text, const std::string& word) {
  auto ident = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; };
  for (auto pos = text.find(word); pos != std::string::npos; pos = text.find(word, pos + 1)) {
    const bool left = pos == 0 || !ident(text[pos - 1]);
    const bool right = pos + word.size() == text.size() || !ident(text[pos + word.size()]);
    if (left && right) return pos;
  }
  return std::string::npos;
}

}  // namespace

ProblemConfig parse_config(const std::string& text, const std::vector<std::pair<std::string, std::string>>& overrides,
                           const std::string& base_dir) {
  std::map<std::string, Entry> entries;
  auto known = [](const std::string& k) { return std::find(kKeys.begin(), kKeys.end(), k) != kKeys.end(); };

  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string where = "line " + std::to_string(number);
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    const std::string key = trim(body.substr(0, eq));
    if (!known(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    if (entries.count(key)) throw ConfigError(where + ": duplicate key '" + key + "'");
    entries[key] = Entry{trim(body.substr(eq + 1)), where};
  }
  for (const auto& [key, value] : overrides) {
    if (!known(key)) throw ConfigError("--set: unknown key '" + key + "'");
    entries[key] = Entry{trim(value), "--set " + key};
  }

  ProblemConfig cfg;
  auto get = [&](const char* key) -> const Entry* {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second;
  };
  if (const auto* e = get("n")) {
    cfg.n = to_int(*e, "n");
    if (cfg.n < 3) throw ConfigError(e->where + ": unsupported dimension n = " + std::to_string(cfg.n) + " (need n >= 3)");
    cfg.b = MatrixField::identity(cfg.n);
  }
  if (const auto* e = get("eps")) cfg.eps = to_double(*e, "eps");
  if (const auto* e = get("c0")) cfg.c0 = to_double(*e, "c0");
  if (const auto* e = get("eta")) cfg.eta = to_double(*e, "eta");
  if (const auto* e = get("bigN")) cfg.big_n = to_double(*e, "bigN");
  if (const auto* e = get("grid_nodes")) cfg.grid_nodes = to_int(*e, "grid_nodes");
  if (const auto* e = get("tol_linear")) cfg.tol.linear = to_double(*e, "tol_linear");
  if (const auto* e = get("tol_opt")) cfg.tol.optimizer = to_double(*e, "tol_opt");
  if (const auto* e = get("max_iter")) cfg.tol.max_iterations = to_int(*e, "max_iter");
  if (const auto* e = get("sweep")) cfg.sweep = to_list(*e, "sweep");

  auto scalar_field = [&](const char* key, CoefficientField& target) {
    if (const auto* e = get(key)) {
      try {
        target = CoefficientField::parse(e->value, cfg.n, base_dir);
      } catch (const std::exception& ex) {
        throw ConfigError(e->where + ": " + key + ": " + ex.what());
      }
    }
  };
  scalar_field("field.a", cfg.a);
  scalar_field("field.f", cfg.f);
  scalar_field("field.uT", cfg.u_target);
  if (const auto* e = get("field.B")) {
    try {
      cfg.b = MatrixField::parse(e->value, cfg.n, base_dir);
    } catch (const std::exception& ex) {
      throw ConfigError(e->where + ": field.B: " + ex.what());
    }
  }

  try {
    validate(cfg);
  } catch (const ConfigError& ex) {
    // Attribute the violation to the key named earliest in the message.
    const std::string msg = ex.what();
    std::size_t best = std::string::npos;
    const Entry* culprit = nullptr;
    for (const auto& [key, entry] : entries) {
      const std::size_t pos = find_word(msg, key);
      if (pos < best) {
        best = pos;
        culprit = &entry;
      }
    }
    throw ConfigError((culprit ? culprit->where : std::string("config")) + ": " + msg);
  }
  return cfg;
}

std::string serialize_config(const ProblemConfig& cfg) {
  std::ostringstream out;
  out << "n = " << cfg.n << "\n";
  out << "eps = " << format_double(cfg.eps) << "\n";
  out << "c0 = " << format_double(cfg.c0) << "\n";
  out << "eta = " << format_double(cfg.eta) << "\n";
  out << "bigN = " << format_double(cfg.big_n) << "\n";
  out << "grid_nodes = " << cfg.grid_nodes << "\n";
  out << "tol_linear = " << format_double(cfg.tol.linear) << "\n";
  out << "tol_opt = " << format_double(cfg.tol.optimizer) << "\n";
  out << "max_iter = " << cfg.tol.max_iterations << "\n";
  out << "sweep = ";
  for (std::size_t i = 0; i < cfg.sweep.size(); ++i) out << (i ? "," : "") << format_double(cfg.sweep[i]);
  out << "\n";
  out << "field.a = " << cfg.a.to_string() << "\n";
  out << "field.f = " << cfg.f.to_string() << "\n";
  out << "field.uT = " << cfg.u_target.to_string() << "\n";
  out << "field.B = " << cfg.b.to_string() << "\n";
  return out.str();
}

}  // namespace dsf
