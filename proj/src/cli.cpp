#include "dsf/cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "dsf/config_io.hpp"
#include "dsf/errors.hpp"
#include "dsf/limit_solver.hpp"
#include "dsf/perforated_solver.hpp"
#include "dsf/verify.hpp"

namespace dsf {

namespace {

namespace fs = std::filesystem;

struct RunConfig {
  std::string subcommand;
  std::string config_path;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  bool timing = false;
};

class CsvWriter {
 public:
  CsvWriter(const fs::path& path, const std::string& header) : file_(path, std::ios::binary) {
    if (!file_) throw ConfigError("cannot write " + path.string());
    file_ << header << '\n';
  }
  template <class... T>
  void row(const T&... values) {
    bool first = true;
    ((file_ << (first ? "" : ",") << cell(values), first = false), ...);
    file_ << '\n';
  }

 private:
  static std::string cell(double v) { return format_double(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(std::size_t v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  static std::string cell(const char* v) { return v; }
  std::ofstream file_;
};

void write_field(const fs::path& path, const ScalarField& u) {
  CsvWriter csv(path, "i,j,k,value");
  const int m = u.grid.cells();
  for (int k = 0; k <= m; ++k)
    for (int j = 0; j <= m; ++j)
      for (int i = 0; i <= m; ++i) csv.row(i, j, k, u.at(i, j, k));
}

void write_boundary(const fs::path& path, const BoundaryField& v) {
  CsvWriter csv(path, "i,j,k,value");
  const int m = v.grid.cells();
  for (int j = 1; j < m; ++j)
    for (int i = 1; i < m; ++i) csv.row(i, j, 0, v.at(i, j));
}

void write_history(const fs::path& path, const std::vector<double>& history) {
  CsvWriter csv(path, "iteration,residual");
  for (std::size_t i = 0; i < history.size(); ++i) csv.row(i, history[i]);
}

void write_monopoles(const fs::path& path, const ParticleLayer& layer, const MonopoleState& s) {
  CsvWriter csv(path, "j,x1,x2,x3,q,U");
  for (std::size_t j = 0; j < layer.count(); ++j) {
    const auto c = layer.center(j);
    csv.row(j, c[0], c[1], c[2], s.q[j], s.U[j]);
  }
}

// Key-value summary echoed to the console and summary.txt.
class Summary {
 public:
  void add(const std::string& key, const std::string& value) { text_ << key << ": " << value << '\n'; }
  void add(const std::string& key, double value) { add(key, format_double(value)); }
  void add(const std::string& key, int value) { add(key, std::to_string(value)); }
  void flush(const fs::path& dir, std::ostream& out) const {
    out << text_.str();
    std::ofstream file(dir / "summary.txt", std::ios::binary);
    file << text_.str();
  }

 private:
  std::ostringstream text_;
};

ProblemConfig load_config(const RunConfig& rc) {
  std::string text;
  std::string base_dir;
  if (!rc.config_path.empty()) {
    std::ifstream in(rc.config_path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + rc.config_path);
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    base_dir = fs::path(rc.config_path).parent_path().string();
  }
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& kv : rc.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    overrides.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return parse_config(text, overrides, base_dir);
}

int cmd_solve_limit(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  const Grid g = limit_grid(cfg);
  const BoundaryField v(g);
  const auto u0 = solve_state_limit(cfg, v);
  const auto p0 = solve_adjoint_limit(cfg, u0);
  write_field(out / "u0.csv", u0);
  write_field(out / "p0.csv", p0);
  s.add("grid_nodes", g.nodes_per_axis());
  s.add("J0(v=0)", eval_J0(cfg, v, u0));
  s.add("l2_norm_u0", l2_norm_volume(u0));
  return kExitOk;
}

int cmd_solve_eps(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  const Grid g = eps_grid(cfg);
  const auto layer = build_particle_layer(cfg);
  const BoundaryField v(g);
  const auto [u, mono] = solve_state_eps(cfg, layer, v);
  write_field(out / "u_eps.csv", u);
  write_monopoles(out / "monopoles.csv", layer, mono);
  s.add("grid_nodes", g.nodes_per_axis());
  s.add("particles", static_cast<int>(layer.count()));
  s.add("closure_residual", mono.closure_residual);
  s.add("J_eps(v=0)", eval_J_eps(cfg, layer, v));
  return kExitOk;
}

int cmd_optimize_limit(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  const auto sol = solve_coupled_limit(cfg);
  write_field(out / "u0.csv", sol.u0);
  write_field(out / "p0.csv", sol.p0);
  write_boundary(out / "v0.csv", sol.v0);
  write_history(out / "history.csv", sol.residuals);
  s.add("grid_nodes", sol.u0.grid.nodes_per_axis());
  s.add("J0", sol.j0_value);
  s.add("iterations", sol.iterations);
  s.add("optimality_residual", sol.residual());
  return kExitOk;
}

int cmd_optimize_eps(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  const auto layer = build_particle_layer(cfg);
  const auto sol = optimize_eps(cfg, layer);
  write_field(out / "u_eps.csv", sol.u_eps);
  write_field(out / "p_eps.csv", sol.p_eps);
  write_boundary(out / "v_eps.csv", sol.v_eps);
  write_monopoles(out / "monopoles.csv", layer, sol.monopoles);
  write_history(out / "history.csv", sol.residuals);
  s.add("grid_nodes", sol.u_eps.grid.nodes_per_axis());
  s.add("particles", static_cast<int>(layer.count()));
  s.add("J_eps", sol.j_eps);
  s.add("energy_eps", sol.energy_eps);
  s.add("iterations", sol.iterations);
  s.add("optimality_residual", sol.residual());
  s.add("closure_residual", sol.monopoles.closure_residual);
  return kExitOk;
}

int cmd_energy_study(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  std::vector<double> sweep = cfg.sweep;
  std::sort(sweep.begin(), sweep.end(), std::greater<>());
  const auto finest_cfg = with_eps(cfg, sweep.back());
  const Grid finest = eps_grid(finest_cfg);
  const auto limit = solve_uncontrolled_limit(finest_cfg, finest);
  const auto f = ScalarField::sample(finest, [&](double x, double y, double z) { return cfg.f(x, y, z); });
  const double fp = integrate_volume(f, limit.p0_aux);
  CsvWriter csv(out / "energy.csv", "eps,grid,energy_eps,energy_limit,rel_energy_gap");
  for (double eps : sweep) {
    const auto c = with_eps(cfg, eps);
    const Grid g = eps_grid(c);
    const double e = energy_eps(c, build_particle_layer(c), g);
    csv.row(eps, g.nodes_per_axis(), e, limit.energy_limit, rel_gap(e, limit.energy_limit));
  }
  s.add("energy_limit", limit.energy_limit);
  s.add("int_f_P0", fp);
  s.add("identity_gap", rel_gap(fp, limit.energy_limit));
  return kExitOk;
}

int cmd_converge(const ProblemConfig& cfg, const fs::path& out, Summary& s, bool timing) {
  const auto report = convergence_study(cfg, cfg.sweep);
  CsvWriter csv(out / "convergence.csv",
                "eps,grid,J_eps,J0,rel_cost_gap,energy_eps,energy_limit,rel_energy_gap,l2_field_gap,"
                "opt_residual_eps,opt_residual_limit,seconds");
  for (const auto& r : report.rows)
    csv.row(r.eps, r.grid, r.j_eps, r.j0, r.rel_cost_gap, r.energy_eps, r.energy_limit, r.rel_energy_gap,
            r.l2_field_gap, r.opt_residual_eps, r.opt_residual_limit, timing ? r.seconds : 0.0);
  s.add("rows", static_cast<int>(report.rows.size()));
  for (const auto& r : report.rows)
    s.add("eps=" + format_double(r.eps), "rel_cost_gap " + format_double(r.rel_cost_gap) + ", rel_energy_gap " +
                                             format_double(r.rel_energy_gap) + ", l2_field_gap " +
                                             format_double(r.l2_field_gap));
  if (!report.complete) {
    s.add("status", "incomplete: " + report.failure);
    return kExitSolver;
  }
  if (!report.trend_ok()) {
    s.add("status", "trend violation: " + report.trend_violation());
    return kExitTrend;
  }
  s.add("status", "gaps decreasing");
  return kExitOk;
}

int cmd_verify_cell(const ProblemConfig& cfg, const fs::path& out, Summary& s) {
  const auto c = constants(cfg.n, cfg.c0);
  std::vector<double> center(static_cast<std::size_t>(cfg.n), 0.5);
  center.back() = 0.0;
  const double a = cfg.a(center);
  const double target = effective_robin(a, c);
  {
    CsvWriter csv(out / "cell.csv", "eps,oracle,effective_robin,rel_gap");
    for (double eps : {1e-2, 1e-3, 1e-4}) {
      const double v = radial_robin_oracle(cfg.n, cfg.c0, eps, a, 10000);
      csv.row(eps, v, target, rel_gap(v, target));
      if (eps == 1e-4) s.add("oracle_gap_at_1e-4", rel_gap(v, target));
    }
  }
  const std::vector<double> eps_list{1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64};
  CsvWriter csv(out / "lemma21.csv", "eps,lhs,rhs,gap");
  for (const auto& r : lemma21_check(cfg.b, default_test_function, eps_list, cfg.c0)) {
    csv.row(r.eps, r.lhs, r.rhs, r.gap);
    if (r.eps == eps_list.back()) s.add("lemma21_gap_at_1/64", r.gap);
  }
  s.add("effective_robin", target);
  return kExitOk;
}

int cmd_verify_gradient(const ProblemConfig& cfg, const fs::path& out, Summary& s, std::uint64_t seed) {
  CsvWriter csv(out / "gradient.csv", "solver,direction,adjoint,finite_difference,rel_error");
  for (const auto kind : {SolverKind::limit, SolverKind::eps}) {
    const auto r = gradient_check(kind, cfg, 5, seed);
    const char* name = kind == SolverKind::limit ? "limit" : "eps";
    for (std::size_t d = 0; d < r.adjoint_derivative.size(); ++d) {
      const double ad = r.adjoint_derivative[d], fd = r.fd_derivative[d];
      const double scale = std::max(std::abs(ad), std::abs(fd));
      csv.row(name, d, ad, fd, scale > 0.0 ? std::abs(ad - fd) / scale : 0.0);
    }
    s.add(std::string("max_rel_error_") + name, r.max_rel_error);
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig rc;
  CLI::App app{"Boundary control with a layer of critically sized Robin particles"};
  app.name("dsf");
  app.add_option("subcommand", rc.subcommand, "Operation to run")
      ->required()
      ->check(CLI::IsMember({"solve-limit", "solve-eps", "optimize-limit", "optimize-eps", "energy-study", "converge",
                             "verify-cell", "verify-gradient"}));
  app.add_option("--config", rc.config_path, "Problem config file (key = value lines)");
  app.add_option("--out", rc.out_dir, "Output directory");
  app.add_option("--set", rc.overrides, "Override a config key (key=value), repeatable")->take_all();
  app.add_option("--seed", rc.seed, "Seed for randomized checks");
  app.add_flag("--timing", rc.timing, "Report wall time in convergence.csv (otherwise 0)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << app.help();
    return kExitConfig;
  }

  try {
    const ProblemConfig cfg = load_config(rc);
    const fs::path dir(rc.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (!fs::is_directory(dir)) throw ConfigError("output directory " + rc.out_dir + " is not writable");
    Summary s;
    s.add("command", rc.subcommand);
    int code = kExitOk;
    if (rc.subcommand == "solve-limit") code = cmd_solve_limit(cfg, dir, s);
    else if (rc.subcommand == "solve-eps") code = cmd_solve_eps(cfg, dir, s);
    else if (rc.subcommand == "optimize-limit") code = cmd_optimize_limit(cfg, dir, s);
    else if (rc.subcommand == "optimize-eps") code = cmd_optimize_eps(cfg, dir, s);
    else if (rc.subcommand == "energy-study") code = cmd_energy_study(cfg, dir, s);
    else if (rc.subcommand == "converge") code = cmd_converge(cfg, dir, s, rc.timing);
    else if (rc.subcommand == "verify-cell") code = cmd_verify_cell(cfg, dir, s);
    else code = cmd_verify_gradient(cfg, dir, s, rc.seed);
    s.flush(dir, out);
    return code;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kExitSolver;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const AssemblyError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace dsf
