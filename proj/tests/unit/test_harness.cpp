#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "flowq/errors.hpp"
#include "flowq/harness/config.hpp"
#include "flowq/harness/csv.hpp"
#include "flowq/harness/runners.hpp"
#include "flowq/harness/sweep.hpp"

using namespace flowq;
using namespace flowq::harness;
namespace fs = std::filesystem;

namespace {

std::string config_path(const std::string& name) { return std::string(FLOWQ_CONFIG_DIR) + "/" + name; }

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("flowq_test_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t column(const CsvTable& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header().size(); ++i)
    if (t.header()[i] == name) return i;
  FAIL("missing column " << name);
  return 0;
}

double as_double(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&c)) return static_cast<double>(*i);
  if (const auto* u = std::get_if<std::uint64_t>(&c)) return static_cast<double>(*u);
  FAIL("cell is not numeric");
  return 0.0;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(FLOWQ_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

}  // namespace

TEST_CASE("exact amplitude estimation from the shipped config") {
  const ExperimentConfig cfg = load_config(config_path("qae_exact.json"));
  CHECK(cfg.algorithm == "qae");
  const RunResult r = run_algorithm(cfg.algorithm, cfg.params, cfg.seed, true);
  CHECK(r.metrics["a_hat"].get<double>() == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(r.metrics["n_phase"].get<int>() == 3);
  CHECK(r.violations.empty());
}

TEST_CASE("uniform lattice Boltzmann field has zero deviation") {
  const ExperimentConfig cfg = load_config(config_path("qlbm_uniform.json"));
  const RunResult r = run_algorithm(cfg.algorithm, cfg.params, cfg.seed, true);
  const std::vector<std::string> expected = {"step", "site", "phi_quantum", "phi_classical", "delta"};
  CHECK(r.data.header() == expected);
  REQUIRE(r.data.rows() > 0);
  const std::size_t d = column(r.data, "delta");
  for (std::size_t i = 0; i < r.data.rows(); ++i) CHECK(std::abs(as_double(r.data.row(i)[d])) <= 1e-12);
  CHECK(r.violations.empty());
}

TEST_CASE("malformed configs are schema errors") {
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"algorithm": "qae"})")), SchemaError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"schema_version": 1, "algorithm": "warp"})")), SchemaError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"schema_version": 2, "algorithm": "qae"})")), SchemaError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"schema_version": 1, "algorithm": "qae", "colour": 1})")), SchemaError);
  CHECK_THROWS_AS(parse_config(Json::parse(R"({"schema_version": 1, "algorithm": "qae", "seed": "x"})")), SchemaError);
  CHECK_THROWS_AS(load_config(config_path("does_not_exist.json")), SchemaError);

  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{\"schema_version\": 1, \"algorithm\": ";
  CHECK_THROWS_AS(load_config((dir / "bad.json").string()), SchemaError);

  ExperimentConfig cfg = load_config(config_path("qae_exact.json"));
  cfg.params["n_phase"] = "three";
  cfg.out_dir = (dir / "out").string();
  std::ostringstream log;
  CHECK(execute(cfg, log) == kExitSchema);
  CHECK(log.str().find("schema error") != std::string::npos);
}

TEST_CASE("unknown parameter keys are rejected") {
  Params p(Json::parse(R"({"a": 0.5, "typo": 1})"), "qae");
  CHECK(p.number("a", std::nullopt, 0.0, 1.0) == 0.5);
  CHECK_THROWS_AS(p.finish(), SchemaError);

  Params range(Json::parse(R"({"a": 1.5})"), "qae");
  CHECK_THROWS_AS(range.number("a", std::nullopt, 0.0, 1.0), SchemaError);

  Params missing(Json::object(), "qae");
  CHECK_THROWS_AS(missing.integer("n_phase", std::nullopt, 1, 20), SchemaError);
  CHECK(missing.integer("n_phase", 4, 1, 20) == 4);
  CHECK_NOTHROW(missing.finish());

  CHECK_THROWS_AS(run_algorithm("qae", Json::parse(R"({"a": 0.5, "n_phase": 3, "extra": true})"), 0, true), SchemaError);
}

TEST_CASE("config round trip") {
  const ExperimentConfig cfg = load_config(config_path("qlbm_hill.json"));
  const ExperimentConfig back = parse_config(config_to_json(cfg));
  CHECK(back.algorithm == cfg.algorithm);
  CHECK(back.seed == cfg.seed);
  CHECK(back.params == cfg.params);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(back.oracle_check == cfg.oracle_check);
}

TEST_CASE("phase-register sweep tightens the error") {
  const ExperimentConfig cfg = load_config(config_path("sweep_qae.json"));
  const RunResult r = run_algorithm(cfg.algorithm, cfg.params, cfg.seed, true);
  CHECK(r.violations.empty());
  const std::size_t n = column(r.data, "n_phase");
  const std::size_t e = column(r.data, "error");
  const std::size_t s = column(r.data, "seed");
  const std::size_t pt = column(r.data, "point");
  REQUIRE(r.data.rows() == 20);

  std::map<int, double> worst;
  for (std::size_t i = 0; i < r.data.rows(); ++i) {
    const auto& row = r.data.row(i);
    CHECK(as_double(row[s]) == static_cast<double>(cfg.seed + i));
    CHECK(as_double(row[pt]) == static_cast<double>(i));
    const int m = static_cast<int>(as_double(row[n]));
    const double err = as_double(row[e]);
    // One-sided exact-mode resolution of the phase grid.
    CHECK(err <= std::acos(-1.0) / std::ldexp(1.0, m) + 1e-12);
    worst[m] = std::max(worst[m], err);
  }
  REQUIRE(worst.size() == 5);
  double prev = worst.begin()->second;
  for (const auto& [m, err] : worst) {
    CHECK(err <= prev * 1.1 + 1e-12);
    prev = err;
  }
  CHECK(worst.rbegin()->second < worst.begin()->second);
}

TEST_CASE("sweep grids") {
  const auto points = expand_grid(Json::parse(R"({"b": [1, 2], "a": [10, 20, 30]})"), 100);
  REQUIRE(points.size() == 6);
  CHECK(points[0] == Json::parse(R"({"a": 10, "b": 1})"));
  CHECK(points[1] == Json::parse(R"({"a": 10, "b": 2})"));
  CHECK(points[5] == Json::parse(R"({"a": 30, "b": 2})"));
  CHECK_THROWS_AS(expand_grid(Json::parse(R"({"a": [1, 2, 3], "b": [1, 2]})"), 5), SchemaError);

  const Json empty = Json::parse(R"({"algorithm": "qae", "base": {"a": 0.5, "mode": "exact"}, "grid": {"n_phase": []}})");
  const RunResult r = run_sweep(empty, 3, true);
  CHECK(r.data.rows() == 0);
  const std::string csv = r.data.str();
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 1);
  CHECK(csv.rfind("point,seed,n_phase", 0) == 0);

  const Json capped =
      Json::parse(R"({"algorithm": "qae", "base": {"mode": "exact"}, "grid": {"n_phase": [3, 4], "a": [0.1, 0.2]}, "max_points": 3})");
  CHECK_THROWS_AS(run_sweep(capped, 0, true), SchemaError);
}

TEST_CASE("csv formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(1.0) == "1");
  CHECK(format_number(-0.375) == "-0.375");
  CHECK(format_number(1e300) == "1.0000000000000001e+300");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-INFINITY) == "-inf");
  CHECK(format_cell(Cell{}).empty());
  CHECK(format_cell(Cell{std::int64_t{-3}}) == "-3");
  CHECK(format_cell(Cell{std::string("x")}) == "x");

  CsvTable t({"name", "value"});
  t.add_row({std::string("a,b"), 1.5});
  t.add_row({std::string("say \"hi\""), Cell{}});
  CHECK(t.str() == "name,value\n\"a,b\",1.5\n\"say \"\"hi\"\"\",\n");
  CHECK_THROWS_AS(t.add_row({1.0}), InvalidArgument);
}

TEST_CASE("repeated runs write identical reports") {
  const fs::path dir = scratch("repeat");
  ExperimentConfig cfg = load_config(config_path("qlbm_hill.json"));
  std::ostringstream log;
  cfg.out_dir = (dir / "one").string();
  REQUIRE(execute(cfg, log) == kExitOk);
  cfg.out_dir = (dir / "two").string();
  REQUIRE(execute(cfg, log) == kExitOk);
  CHECK(slurp(dir / "one" / "report.json") == slurp(dir / "two" / "report.json"));
  CHECK(slurp(dir / "one" / "data.csv") == slurp(dir / "two" / "data.csv"));
  CHECK(fs::exists(dir / "one" / "metadata.json"));
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string qae = config_path("qae_exact.json");
  CHECK(run_cli("qae --config " + qae + " --out " + (dir / "ok").string()) == kExitOk);
  CHECK(fs::exists(dir / "ok" / "report.json"));
  CHECK(run_cli("run --config " + qae + " --out " + (dir / "run").string()) == kExitOk);
  CHECK(run_cli("qlbm --config " + qae + " --out " + (dir / "bad").string()) == kExitSchema);
  CHECK_FALSE(fs::exists(dir / "bad"));
  CHECK(run_cli("qae --config " + (dir / "missing.json").string()) == kExitSchema);
  CHECK(run_cli("qae") == kExitSchema);
  CHECK(run_cli("--version") == kExitOk);
}
