#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "splab/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "splab_cli_test";

int run(const std::string& args) {
  const std::string cmd = std::string(SPLAB_CLI) + " " + args + " > " + (kWork / "stdout.txt").string() + " 2> " +
                          (kWork / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE("config errors exit with code 2 and name the field") {
  Workdir w;
  CHECK(run("linear --n 1 --out_dir " + (kWork / "o").string()) == 2);
  CHECK(slurp(kWork / "stderr.txt").find("element count n must be >= 2") != std::string::npos);
  CHECK(run("linear --set no_such_key=3") == 2);
  CHECK(run("linear --dt -1") == 2);
  CHECK(run("frobnicate") == 2);
  {
    std::ofstream cfg(kWork / "bad.cfg");
    cfg << "r_max = -3\n";
  }
  CHECK(run("linear --config " + (kWork / "bad.cfg").string()) == 2);
  CHECK(slurp(kWork / "stderr.txt").find("r_max") != std::string::npos);
}

TEST_CASE("validate passes on defaults") {
  Workdir w;
  CHECK(run("validate --out_dir " + (kWork / "o").string()) == 0);
  const std::string out = slurp(kWork / "stdout.txt");
  CHECK(out.find("FAIL") == std::string::npos);
  CHECK(out.find("4 of 4 checks passed") != std::string::npos);
  CHECK(fs::exists(kWork / "o" / "validate" / "manifest_validate.json"));
}

TEST_CASE("continue-gamma then sweep-E yields a monotone branch-0 curve") {
  Workdir w;
  const std::string out = " --out_dir " + (kWork / "o").string();
  REQUIRE(run("continue-gamma --branch 0" + out) == 0);
  REQUIRE(run("sweep-E --branch 0" + out) == 0);
  const splab::CsvTable t = splab::read_csv(kWork / "o" / "sweep-E" / "branch_b0.csv", splab::kBranchSchema);
  CHECK(t.columns == std::vector<std::string>{"branch", "gamma", "E", "mass", "n_nodes", "residual"});
  REQUIRE(t.rows.size() > 10);
  for (std::size_t k = 1; k < t.rows.size(); ++k) {
    CHECK(std::stod(t.rows[k][2]) > std::stod(t.rows[k - 1][2]));
    CHECK(std::stod(t.rows[k][3]) > std::stod(t.rows[k - 1][3]));
  }
  // the γ = 1 profile from continue-gamma was reused
  CHECK(slurp(kWork / "o" / "sweep-E" / "manifest_sweep-E.json").find("profile_b0_gamma1.csv") != std::string::npos);
}

TEST_CASE("identical configs give byte-identical CSV files") {
  Workdir w;
  REQUIRE(run("linear --n 800 --out_dir " + (kWork / "a").string()) == 0);
  REQUIRE(run("linear --n 800 --out_dir " + (kWork / "b").string()) == 0);
  for (const char* f : {"linear.csv", "profile_linear0.csv", "profile_linear3.csv"})
    CHECK(slurp(kWork / "a" / "linear" / f) == slurp(kWork / "b" / "linear" / f));
  CHECK(slurp(kWork / "a" / "linear" / "linear.csv").rfind("# schema=linear@", 0) == 0);
}

TEST_CASE("output directory from the environment, flag wins") {
  Workdir w;
  const std::string env = "SPLAB_OUT_DIR=" + (kWork / "env").string() + " ";
  const std::string cmd = env + SPLAB_CLI + " linear --n 400 > /dev/null";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(kWork / "env" / "linear" / "linear.csv"));
  const std::string cmd2 = env + SPLAB_CLI + " linear --n 400 --out_dir " + (kWork / "flag").string() + " > /dev/null";
  CHECK(std::system(cmd2.c_str()) == 0);
  CHECK(fs::exists(kWork / "flag" / "linear" / "linear.csv"));
}
