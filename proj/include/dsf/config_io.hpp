#pragma once

#include <string>
#include <utility>
#include <vector>

#include "dsf/core_model.hpp"

namespace dsf {

/// Parses `key = value` lines (`#` starts a comment) and validates the
/// result. Keys: n, eps, c0, eta, bigN, grid_nodes, tol_linear, tol_opt,
/// max_iter, sweep, field.a, field.f, field.uT, field.B. `overrides` replace
/// file values. Errors are ConfigError prefixed with the offending line.
/// Relative sample paths resolve against base_dir.
ProblemConfig parse_config(const std::string& text,
                           const std::vector<std::pair<std::string, std::string>>& overrides = {},
                           const std::string& base_dir = "");

/// Text that parse_config maps back to an equal config.
std::string serialize_config(const ProblemConfig& cfg);

}  // namespace dsf
