#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "dcone/experiment.hpp"

namespace fs = std::filesystem;

namespace {

std::string binary() {
  const char* bin = std::getenv("DCONELAB_BIN");
  REQUIRE(bin != nullptr);
  return bin;
}

fs::path fresh_dir(const std::string& tag) {
  static int counter = 0;
  const fs::path dir =
      fs::temp_directory_path() / ("dconelab_cli_" + tag + "_" +
                                   std::to_string(::getpid()) + "_" +
                                   std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string& args, const fs::path& capture) {
  const std::string cmd = binary() + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path);
  out << body;
}

}  // namespace

TEST_CASE("cli exit codes") {
  const fs::path dir = fresh_dir("codes");

  SECTION("paper-default profile validates with exit 0") {
    write_file(dir / "cfg.json", R"({"profile": "paper-default"})");
    REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                    (dir / "out0").string() + " validate-profile",
                dir / "log0.txt") == 0);
  }
  SECTION("pure sine profile exits 1 and names the violated condition") {
    write_file(dir / "sine.json", R"({"profile": {"cos": [0], "sin": [1]}})");
    REQUIRE(run("--config " + (dir / "sine.json").string() + " --out " +
                    (dir / "out1").string() + " validate-profile",
                dir / "log1.txt") == 1);
    REQUIRE(slurp(dir / "log1.txt").find("beta + beta''") != std::string::npos);
  }
  SECTION("malformed config exits 2") {
    write_file(dir / "broken.json", "{this is not json");
    REQUIRE(run("--config " + (dir / "broken.json").string() + " validate-profile",
                dir / "log2.txt") == 2);
    write_file(dir / "badkey.json", R"({"no_such_key": 1})");
    REQUIRE(run("--config " + (dir / "badkey.json").string() + " validate-profile",
                dir / "log3.txt") == 2);
  }
  SECTION("missing subcommand is a usage error") {
    write_file(dir / "cfg.json", R"({})");
    REQUIRE(run("--config " + (dir / "cfg.json").string(), dir / "log4.txt") == 2);
  }
}

TEST_CASE("cli ansatz sweep determinism") {
  const fs::path dir = fresh_dir("ansatz");
  write_file(dir / "cfg.json", R"({
    "p": 2.5,
    "h_schedule": [0.0625, 0.03125, 0.015625]
  })");
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "a").string() + " ansatz-sweep",
              dir / "loga.txt") == 0);
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "b").string() + " --threads 2 ansatz-sweep",
              dir / "logb.txt") == 0);
  REQUIRE(slurp(dir / "a" / "ansatz_sweep.csv") ==
          slurp(dir / "b" / "ansatz_sweep.csv"));
  REQUIRE(slurp(dir / "loga.txt").find("fitted slope") != std::string::npos);
}

TEST_CASE("cli minimize sweep determinism and resume artifacts") {
  const fs::path dir = fresh_dir("sweep");
  write_file(dir / "cfg.json", R"({
    "p": 2.5,
    "h_schedule": [0.1, 0.05],
    "grid": {"Nr": 16, "n_theta": 32, "grading_ratio": 1.0, "r_min": 0.03},
    "minimizer": {"max_iters": 50},
    "seed": 3
  })");
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "a").string() + " minimize-sweep",
              dir / "loga.txt") <= 1);
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "b").string() + " minimize-sweep",
              dir / "logb.txt") <= 1);
  REQUIRE(slurp(dir / "a" / "scaling_report.csv") ==
          slurp(dir / "b" / "scaling_report.csv"));
  REQUIRE(fs::exists(dir / "a" / "run_manifest.json"));
  REQUIRE(fs::exists(dir / "a" / "minimize_log_000.csv"));

  // rerunning over a completed directory reuses the persisted entries
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "a").string() + " minimize-sweep",
              dir / "logc.txt") <= 1);
  REQUIRE(slurp(dir / "logc.txt").find("resuming after 2 persisted entries") !=
          std::string::npos);
  REQUIRE(slurp(dir / "a" / "scaling_report.csv") ==
          slurp(dir / "b" / "scaling_report.csv"));
}

TEST_CASE("cli degree map and exponents") {
  const fs::path dir = fresh_dir("degree");
  write_file(dir / "cfg.json", R"({
    "degree": {"resolution": 60, "samples": 512}
  })");
  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "d").string() + " degree-map",
              dir / "logd.txt") == 0);
  REQUIRE(slurp(dir / "logd.txt").find("rel_err") != std::string::npos);
  REQUIRE(fs::exists(dir / "d" / "degree_field.csv"));

  REQUIRE(run("--config " + (dir / "cfg.json").string() + " --out " +
                  (dir / "e").string() + " exponents",
              dir / "loge.txt") == 0);
  REQUIRE(fs::exists(dir / "e" / "exponents.json"));
}
