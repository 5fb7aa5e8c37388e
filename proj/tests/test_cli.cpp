#include "ltm/errors.hpp"
#include "ltm/io.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace ltm;
namespace fs = std::filesystem;

namespace {

struct Run {
  int rc = -1;
  std::string out;
};

Run run_cli(const std::string& args) {
  const std::string cmd = std::string(LTM_CLI_PATH) + " " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  while (std::fgets(buf, sizeof buf, p)) r.out += buf;
  const int status = pclose(p);
  r.rc = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("ltm_cli_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("classify prints the branch label") {
  const auto r = run_cli("classify --point 0.5,0.5");
  CHECK(r.rc == 0);
  CHECK(r.out.find("j=2 k=2 n=3") != std::string::npos);
}

TEST_CASE("rational orbit closes the 3-cycle") {
  const auto r = run_cli("orbit --backend rational --point 1/2,1/2 --map H --steps 3");
  CHECK(r.rc == 0);
  CHECK(r.out.find("1 3/2 1/2") != std::string::npos);
  CHECK(r.out.find("2 1/2 3/2") != std::string::npos);
  CHECK(r.out.find("3 1/2 1/2") != std::string::npos);
}

TEST_CASE("configuration errors exit with code 4") {
  CHECK(run_cli("classify --point 0.5,0.5 --no-such-flag").rc == 4);
  const auto dir = scratch("badcfg");
  fs::create_directories(dir);
  std::ofstream(dir / "bad.cfg") << "p0 = 0\np1 = 0\n";
  CHECK(run_cli("classify --point 0.5,0.5 --spec-file " + (dir / "bad.cfg").string()).rc == 4);
  std::ofstream(dir / "typo.cfg") << "sampels = 10\n";
  CHECK(run_cli("classify --point 0.5,0.5 --spec-file " + (dir / "typo.cfg").string()).rc == 4);
  CHECK(run_cli("orbit --point 1.5,1.5").rc == 4);
  fs::remove_all(dir);
}

TEST_CASE("correlate writes a CSV with a sidecar, reproducibly") {
  const auto d1 = scratch("corr1"), d2 = scratch("corr2");
  const std::string common = "correlate --map H --n-max 60 --ensemble 20000 --seed 9 --out ";
  REQUIRE(run_cli(common + d1.string()).rc == 0);
  REQUIRE(run_cli(common + d2.string()).rc == 0);
  const std::string a = slurp(d1 / "corr_H.csv");
  CHECK(a == slurp(d2 / "corr_H.csv"));

  std::istringstream lines(a);
  std::string line;
  int rows = 0;
  std::getline(lines, line);
  CHECK(line == "n,C_n,stderr,n_eff\r");
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 60);

  const auto meta = nlohmann::json::parse(slurp(d1 / "corr_H.csv.json"));
  CHECK(meta["seed"] == 9);
  CHECK(meta["ensemble"] == 20000);
  CHECK(meta["experiment"].is_string());
  CHECK(meta["spec"]["p1"] == "1");
  fs::remove_all(d1);
  fs::remove_all(d2);
}

TEST_CASE("config text parsing") {
  const auto cfg = parse_config_text(
      "# a run\n"
      "p1 = 1\n"
      "samples = 1e5   # scientific counts allowed\n"
      "n-max = 40\n"
      "backend = rational\n"
      "threads = auto\n");
  CHECK(cfg.samples == 100000);
  CHECK(cfg.n_max == 40);
  CHECK(cfg.backend == Backend::Rational);
  CHECK(cfg.threads == 0);
  CHECK_THROWS_AS(parse_config_text("seed = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("seed\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("samples = 1.5e0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("q0 = 1\nq1 = 1/2\n"), ConfigError);
  const auto j = to_json(cfg);
  CHECK(j["backend"] == "rational");
  CHECK(j["threads"] == "auto");
}

TEST_CASE("CSV field escaping") {
  CHECK(csv_escape("plain") == "plain");
  CHECK(csv_escape("a,b") == "\"a,b\"");
  CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
  CHECK(csv_number(0.25) == "0.25");
}
