#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "occupact/commands.hpp"
#include "occupact/config.hpp"
#include "occupact/error.hpp"

using namespace occupact;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = 0;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("occupact_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("key=value parsing") {
  const auto kv = parse_key_values("# comment\np1 = 0.8\n\nt=30 # trailing\nmedian_U = 7\n");
  CHECK(kv.at("p1") == "0.8");
  CHECK(kv.at("t") == "30");
  CHECK(kv.at("median_U") == "7");
  CHECK_THROWS_AS(parse_key_values("bogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("p1 = 1\np1 = 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_key_values("p1\n"), ConfigError);
  try {
    parse_key_values("t = 1\nwhat = 2\n", "run.cfg");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("run.cfg:2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_config_file("/nonexistent/occupact.cfg"), IoError);
}

TEST_CASE("config resolution") {
  const auto def = resolve_config({}, {}, CommandKind::Density);
  CHECK(def.t() == 30.0);
  CHECK(def.p1() == 0.9);
  CHECK(def.states[0].source == "median");
  CHECK(def.states[0].value == 7.0);

  const auto table = resolve_config({}, {}, CommandKind::Table);
  CHECK(table.t_values == std::vector<double>{30.0, 60.0});
  CHECK(table.p1_values.size() == 7);

  CHECK_THROWS_AS(resolve_config({}, {{"t", "30,60"}}, CommandKind::Density), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"p1", ""}}, CommandKind::Table), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"p1", "0"}}, CommandKind::Density), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"median_U", "7"}, {"c_U", "1.7"}}, CommandKind::Density), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"rate_S", "-1"}}, CommandKind::Density), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"cost", "1,2"}}, CommandKind::Density), ConfigError);
  CHECK_THROWS_AS(resolve_config({}, {{"target", "X"}}, CommandKind::Density), ConfigError);

  // An override of a state's parameter replaces the file's definition of it.
  const auto mixed = resolve_config({{"median_S", "0.5"}, {"p1", "0.7"}}, {{"c_S", "0.1"}}, CommandKind::Density);
  CHECK(mixed.states[1].source == "c");
  CHECK(mixed.p1() == 0.7);

  const auto low = resolve_config({}, {{"n_max", "2"}}, CommandKind::Check);
  CHECK(low.series.n_min == 2);
  CHECK(low.series.n_max == 2);
}

TEST_CASE("sidecar paths") {
  CHECK(sidecar_path("runs/a.csv", "atoms.json") == "runs/a.atoms.json");
  CHECK(sidecar_path("out", "lines.csv") == "out.lines.csv");
}

TEST_CASE("bad parameters exit with code 2") {
  auto r = run({"density", "--p1", "1.5"});
  CHECK(r.code == kExitConfig);
  CHECK(r.err.find("p1") != std::string::npos);
  CHECK(run({"table", "--p1", ""}).code == kExitConfig);
  CHECK(run({"density", "--no-such-flag"}).code == kExitConfig);
  CHECK(run({}).code == kExitConfig);
}

TEST_CASE("unwritable output exits with code 3 and writes nothing") {
  const std::string target = "/nonexistent_dir_for_occupact/out.csv";
  const auto r = run({"density", "--out", target});
  CHECK(r.code == kExitIo);
  CHECK_FALSE(fs::exists(target));
}

TEST_CASE("density command") {
  TempDir dir;
  const auto csv = dir.file("dens.csv");
  const auto r = run({"density", "--out", csv});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() == 1501);
  CHECK(rows[0] == "s,j,target,density,converged");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double s = std::stod(rows[i].substr(0, rows[i].find(',')));
    CHECK(s > 0.0);
    CHECK(s < 30.0);
  }
  const auto atoms = nlohmann::json::parse(slurp(dir.file("dens.atoms.json")))["atoms"];
  REQUIRE(atoms.size() == 3);
  CHECK(std::abs(atoms[0]["probability"].get<double>() - 0.280) < 2e-3);
  CHECK(atoms[1]["probability"].get<double>() == 0.0);
  CHECK(std::abs(atoms[2]["probability"].get<double>() - 0.004) < 1e-3);
}

TEST_CASE("joint command stays inside the simplex") {
  TempDir dir;
  const auto csv = dir.file("joint.csv");
  REQUIRE(run({"joint", "--out", csv, "--set", "joint_points=40"}).code == kExitOk);
  const auto rows = lines_of(slurp(csv));
  REQUIRE(rows.size() > 1);
  CHECK(rows[0] == "u,v,j,density,converged");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    std::istringstream in(rows[i]);
    std::string u, v;
    std::getline(in, u, ',');
    std::getline(in, v, ',');
    CHECK(std::stod(u) + std::stod(v) < 30.0);
  }
  CHECK(fs::exists(dir.file("joint.lines.csv")));
  const auto summary = nlohmann::json::parse(slurp(dir.file("joint.summary.json")));
  CHECK(std::abs(summary["total_mass"].get<double>() - 1.0) < 2e-3);
}

TEST_CASE("table command") {
  const auto r = run({"table", "--t", "30", "--p1", "0.99"});
  REQUIRE(r.code == kExitOk);
  const auto rows = lines_of(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == "t,p1,E_S,Var_S,E_L,Var_L,E_C,Var_C,rho");
  std::vector<double> f;
  std::istringstream in(rows[1]);
  for (std::string cell; std::getline(in, cell, ',');) f.push_back(std::stod(cell));
  REQUIRE(f.size() == 9);
  CHECK(std::abs(f[4] - 0.03) < 0.005);
  CHECK(std::abs(f[8] - (-0.009)) < 0.0005);
}

TEST_CASE("simulate command is reproducible and reads config files") {
  TempDir dir;
  const auto cfg = dir.file("expo.cfg");
  std::ofstream(cfg) << "dist_U = exponential\nrate_U = 1\ndist_S = exponential\nrate_S = 2\n"
                        "dist_L = exponential\nrate_L = 0.5\np1 = 0.7\nt = 10\nreps = 5000\nseed = 3\n";
  const auto a = dir.file("a.json"), b = dir.file("b.json");
  REQUIRE(run({"simulate", "--config", cfg, "--format", "json", "--out", a}).code == kExitOk);
  REQUIRE(run({"simulate", "--config", cfg, "--format", "json", "--out", b}).code == kExitOk);
  // Only the recorded output path differs between the two runs.
  auto doc = nlohmann::json::parse(slurp(a));
  auto other = nlohmann::json::parse(slurp(b));
  doc["config"].erase("out");
  other["config"].erase("out");
  CHECK(doc == other);
  CHECK(slurp(dir.file("a.joint.csv")) == slurp(dir.file("b.joint.csv")));
  CHECK(doc["reps"].get<int>() == 5000);
  CHECK(doc["t"].get<double>() == 10.0);
  CHECK(fs::exists(dir.file("a.marginal.csv")));
  CHECK(fs::exists(dir.file("a.joint.csv")));
}

TEST_CASE("check command") {
  const auto bad = run({"check", "--set", "n_max=2", "--reps", "2000"});
  CHECK(bad.code == kExitCheckFailed);
  CHECK(bad.out.find("FAIL  marginal total mass") != std::string::npos);

  const auto good = run({"check"});
  CHECK(good.code == kExitOk);
  CHECK(good.out.find("FAIL") == std::string::npos);
}
