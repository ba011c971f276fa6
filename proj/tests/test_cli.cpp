#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

int runCli(const std::string& args) {
  std::string cmd = std::string(MAGCONN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct TempDir {
  fs::path path;
  TempDir(const std::string& tag) : path(fs::temp_directory_path() / ("magconn_" + tag)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("suites run green and write reports") {
  TempDir dir("suite");
  CHECK(runCli("tensors --system kahler-t4 --samples 40 --out-dir " + dir.path.string()) == 0);
  CHECK(fs::exists(dir.path / "tensors.json"));
  CHECK(fs::exists(dir.path / "tensors.csv"));
  std::string js = slurp(dir.path / "tensors.json");
  CHECK(js.find("\"checks_passed\": 4") != std::string::npos);
}

TEST_CASE("exit codes") {
  TempDir dir("exit");
  SUBCASE("unknown subcommand is a parse error") {
    CHECK(runCli("frobnicate") == 2);
  }
  SUBCASE("unknown system rejected") {
    CHECK(runCli("tensors --system moebius --out-dir " + dir.path.string()) == 2);
  }
  SUBCASE("missing subcommand") { CHECK(runCli("--seed 1") == 2); }
}

TEST_CASE("tomo sweep and pinching table") {
  TempDir dir("tables");
  CHECK(runCli("tomo --max-m 8 --max-n 8 --out-dir " + dir.path.string()) == 0);
  CHECK(fs::exists(dir.path / "tomo_table.csv"));
  std::string csv = slurp(dir.path / "tomo_table.csv");
  CHECK(csv.find("m,n,alpha,beta,gamma,C") != std::string::npos);

  CHECK(runCli("pinching --n 3 --n-high 12 --out-dir " + dir.path.string()) == 0);
  std::string table = slurp(dir.path / "pinching_table.csv");
  CHECK(table.find("U(3)") != std::string::npos);
  CHECK(table.find("G2") != std::string::npos);
}

TEST_CASE("deterministic given the seed: byte-identical CSV") {
  TempDir dirA("detA"), dirB("detB");
  std::string args = "brackets --system nonclosed-t3 --points 20 --seed 99 --out-dir ";
  CHECK(runCli(args + dirA.path.string()) == 0);
  CHECK(runCli(args + dirB.path.string()) == 0);
  CHECK(slurp(dirA.path / "brackets.csv") == slurp(dirB.path / "brackets.csv"));
}

TEST_CASE("TOML config drives a run and unknown keys are rejected") {
  TempDir dir("toml");
  {
    std::ofstream cfg(dir.path / "run.toml");
    cfg << "out-dir = \"" << dir.path.string() << "\"\n";
    cfg << "seed = 7\n\n[pestov]\ngrid = 16\ncount = 1\ndegree = 3\n";
  }
  CHECK(runCli("pestov --config " + (dir.path / "run.toml").string()) == 0);
  CHECK(fs::exists(dir.path / "pestov.json"));

  {
    std::ofstream cfg(dir.path / "bad.toml");
    cfg << "not-an-option = 3\n";
  }
  CHECK(runCli("pestov --config " + (dir.path / "bad.toml").string()) == 2);
}
