#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "dsf/cli.hpp"
#include "dsf/config_io.hpp"
#include "dsf/errors.hpp"

using namespace dsf;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(DSF_TEST_TMP) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run_cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string summary_value(const std::string& summary, const std::string& key) {
  std::istringstream in(summary);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ": ", 0) == 0) return line.substr(key.size() + 2);
  return {};
}

}  // namespace

TEST_CASE("config parsing examples") {
  const auto cfg = parse_config("n=3\neps=0.125\nc0=0.5\n");
  CHECK(build_particle_layer(cfg).count() == 49);

  CHECK_THROWS_WITH_AS(parse_config("eps=0.3"), doctest::Contains("1/eps must be an integer"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("field.a=const:-1"), doctest::Contains("a0 > 0"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("# header\nfoo = 1\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("eta = 1\neta = 2\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_WITH_AS(parse_config("eta = abc"), doctest::Contains("line 1"), ConfigError);
  CHECK_THROWS_AS(parse_config("", {{"bogus", "1"}}), ConfigError);
  CHECK(parse_config("eta = 1", {{"eta", "3"}}).eta == 3.0);
}

TEST_CASE("config round trip") {
  const std::vector<std::string> texts = {
      "",
      "n = 3\neps = 0.0625\nc0 = 0.25\neta = 2.5\nbigN = 0.1\ngrid_nodes = 65\n",
      "field.a = poly:1 + x1*x2\nfield.f = poly:x3^2 - 0.5*x1\nfield.uT = const:0.25\n",
      "field.B = const:2,0.5,0,0.5,1,0,0,0,3\ntol_linear = 1e-11\ntol_opt = 1e-9\nmax_iter = 300\n",
      "field.B = poly:1+x1;0;0;0;1;0;0;0;2\nsweep = 0.125,0.0625\n",
  };
  for (const auto& t : texts) {
    const auto cfg = parse_config(t);
    CHECK(parse_config(serialize_config(cfg)) == cfg);
  }
}

TEST_CASE("sample-file fields resolve against the config directory") {
  const auto dir = scratch("samples");
  {
    std::ofstream s(dir / "a.txt");
    s << "2 2 2 1\n";
    for (int i = 0; i < 8; ++i) s << 1.0 + 0.125 * i << "\n";
  }
  const auto cfg = parse_config("field.a = samples:a.txt\n", {}, dir.string());
  CHECK(cfg.a(1.0, 1.0, 1.0) == doctest::Approx(1.875));
  CHECK(parse_config(serialize_config(cfg), {}, dir.string()) == cfg);
  CHECK_THROWS_AS(parse_config("field.a = samples:missing.txt\n", {}, dir.string()), ConfigError);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  CHECK(run_cli({}).code == kExitConfig);
  CHECK(run_cli({"no-such-command"}).code == kExitConfig);
  CHECK(run_cli({"solve-limit", "--config", (dir / "missing.cfg").string(), "--out", dir.string()}).code ==
        kExitConfig);
  CHECK(run_cli({"solve-limit", "--set", "unknown=1", "--out", dir.string()}).code == kExitConfig);

  const auto margin = run_cli({"solve-eps", "--set", "eps=0.25", "--set", "c0=1", "--out", dir.string()});
  CHECK(margin.code == kExitConfig);
  CHECK(margin.err.find("particle radius") != std::string::npos);

  const auto stuck = run_cli({"optimize-limit", "--set", "grid_nodes=17", "--set", "max_iter=1", "--out",
                              dir.string()});
  CHECK(stuck.code == kExitSolver);
}

TEST_CASE("optimize-limit with zero data reports J0 = 0") {
  const auto dir = scratch("zero");
  const auto r = run_cli({"optimize-limit", "--set", "field.f=const:0", "--set", "field.uT=const:0", "--set",
                          "grid_nodes=17", "--out", dir.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(summary_value(r.out, "J0") == "0");
  CHECK(slurp(dir / "summary.txt") == r.out);
  for (const char* f : {"u0.csv", "p0.csv", "v0.csv", "history.csv"}) CHECK(fs::exists(dir / f));
}

TEST_CASE("field dumps use the node schema") {
  const auto dir = scratch("dumps");
  const auto cfg_path = dir / "problem.cfg";
  {
    std::ofstream c(cfg_path);
    c << "# coarse instance\neps = 0.25\nc0 = 0.25\ngrid_nodes = 17\n";
  }
  REQUIRE(run_cli({"solve-eps", "--config", cfg_path.string(), "--out", dir.string()}).code == kExitOk);
  const auto u = slurp(dir / "u_eps.csv");
  CHECK(u.rfind("i,j,k,value\n", 0) == 0);
  CHECK(u.find('\r') == std::string::npos);
  CHECK(std::count(u.begin(), u.end(), '\n') == 1 + 17 * 17 * 17);
  const auto m = slurp(dir / "monopoles.csv");
  CHECK(std::count(m.begin(), m.end(), '\n') == 1 + 9);
}

TEST_CASE("converge writes the schema and is deterministic") {
  const auto a = scratch("conv_a"), b = scratch("conv_b");
  const std::vector<std::string> common = {"converge", "--set", "sweep=0.125,0.0625", "--seed", "7"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"--out", a.string()});
  args_b.insert(args_b.end(), {"--out", b.string()});
  REQUIRE(run_cli(args_a).code == kExitOk);
  REQUIRE(run_cli(args_b).code == kExitOk);
  const auto csv = slurp(a / "convergence.csv");
  CHECK(csv == slurp(b / "convergence.csv"));
  std::istringstream in(csv);
  std::string header, row;
  std::getline(in, header);
  CHECK(header ==
        "eps,grid,J_eps,J0,rel_cost_gap,energy_eps,energy_limit,rel_energy_gap,l2_field_gap,opt_residual_eps,"
        "opt_residual_limit,seconds");
  int rows = 0;
  while (std::getline(in, row)) {
    ++rows;
    CHECK(row.substr(row.rfind(',') + 1) == "0");
  }
  CHECK(rows == 2);
}

TEST_CASE("verify commands") {
  const auto dir = scratch("verify");
  const auto cell = run_cli({"verify-cell", "--out", dir.string()});
  REQUIRE(cell.code == kExitOk);
  CHECK(std::stod(summary_value(cell.out, "oracle_gap_at_1e-4")) <= 1e-3);
  CHECK(fs::exists(dir / "cell.csv"));
  CHECK(fs::exists(dir / "lemma21.csv"));

  const auto grad = run_cli({"verify-gradient", "--set", "eps=0.25", "--set", "c0=0.25", "--set", "grid_nodes=17",
                             "--seed", "3", "--out", dir.string()});
  REQUIRE(grad.code == kExitOk);
  CHECK(fs::exists(dir / "gradient.csv"));
}
