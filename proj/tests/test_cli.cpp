#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "erasure/cli.hpp"

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace erasure;

namespace {

struct Outcome {
  int status = -1;
  std::string output;  // stdout and stderr combined
};

Outcome run_cli(const std::string& args) {
  const char* exe = std::getenv("ERASURE_CLI");
  REQUIRE_MESSAGE(exe != nullptr, "ERASURE_CLI must point at the erasure_cli binary");
  const std::string cmd = std::string(exe) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  Outcome o;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) o.output.append(buf, n);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config text parsing") {
  const RunConfig c = parse_config_text(
      "# sweep of the ISS rate\n"
      "command = iss\n"
      "model.gamma1=0.3   # weak level\n"
      "\n"
      "seed=7\n"
      "tol=1e-9\n"
      "jobs=2\n"
      "sweep.name=iss.N\n"
      "sweep.start=1\n"
      "sweep.stop=4\n"
      "sweep.points=4\n");
  CHECK(c.command == "iss");
  CHECK(c.values.at("model.gamma1") == "0.3");
  CHECK(c.seed == 7);
  CHECK(c.tol.value() == 1e-9);
  CHECK(c.jobs == 2);
  REQUIRE(c.sweep.has_value());
  CHECK(c.sweep->values() == std::vector<double>{1, 2, 3, 4});
  CHECK(c.sweep->column() == "N");

  CHECK_THROWS_AS(parse_config_text("command=iss\nnot a pair\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep.name=iss.N\nsweep.start=1\nsweep.stop=2\nsweep.points=0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("sweep.name=iss.N\nsweep.start=1\nsweep.stop=2\nsweep.scale=cubic\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("tol=-1\n"), ConfigError);
  CHECK_THROWS_AS(load_config_file("/nonexistent/run.cfg"), ConfigError);
}

TEST_CASE("sweep axes") {
  SweepAxis lin{"model.omega", 0.0, 1.0, 5};
  CHECK(lin.values() == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  SweepAxis lg{"fig2.gamma_ratio", 1e-2, 1.0, 3, true};
  const auto v = lg.values();
  REQUIRE(v.size() == 3);
  CHECK(v[1] == doctest::Approx(0.1));
  CHECK(v[2] == 1.0);
  SweepAxis zero{"fig2.gamma_ratio", 0.0, 1.0, 5, true};
  const auto z = zero.values();
  CHECK(z[0] == 0.0);
  CHECK(z[1] == doctest::Approx(1e-4));
  CHECK(z[4] == 1.0);
  SweepAxis one{"iss.N", 3.0, 3.0, 1};
  CHECK(one.values() == std::vector<double>{3.0});
  CHECK(zero.column() == "gamma_ratio");
}

TEST_CASE("command suggestions") {
  CHECK(edit_distance("kitten", "sitting") == 3);
  CHECK(edit_distance("", "abc") == 3);
  CHECK(edit_distance("fig3", "fig3") == 0);
  CHECK(suggest_command("fgi3") == "fig3");
  CHECK(suggest_command("montecarl") == "montecarlo");
  CHECK(suggest_command("zzzzzzzzzz").empty());
  const std::string listing = list_commands();
  for (const char* name : {"fig2", "fig3", "bounds", "cd", "qec", "iss", "squeeze", "montecarlo"})
    CHECK(listing.find(name) != std::string::npos);
}

TEST_CASE("library-level runs") {
  RunConfig c;
  c.command = "fig3";
  c.sweep = SweepAxis{"fig3.N", 1.0, 3.0, 3};
  const auto rows = parse_csv(run_to_csv(c));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"N", "cd", "ult", "heisenberg"});

  RunConfig bad;
  bad.command = "fig3";
  bad.values["fig3.colour"] = "red";
  CHECK_THROWS_AS(run_to_csv(bad), ConfigError);

  RunConfig overflow;
  overflow.command = "cd";
  overflow.values["cd.kind"] = "sigma_x";
  overflow.values["cd.omega"] = "1e200";
  CHECK_THROWS_AS(run_to_csv(overflow), NumericError);
  std::ostringstream out, err;
  CHECK(run(overflow, out, err) == kExitNumeric);
  CHECK(err.str().find("non-finite") != std::string::npos);
  CHECK(out.str().empty());
}

TEST_CASE("usage and command listing") {
  const Outcome none = run_cli("");
  CHECK(none.status == 1);
  CHECK(none.output.find("usage") != std::string::npos);

  const Outcome list = run_cli("list");
  CHECK(list.status == 0);
  for (const char* name : {"fig2", "fig3", "bounds", "cd", "qec", "iss", "squeeze", "montecarlo"})
    CHECK(list.output.find(name) != std::string::npos);

  const Outcome typo = run_cli("fgi3");
  CHECK(typo.status == 2);
  CHECK(typo.output.find("did you mean 'fig3'") != std::string::npos);
}

TEST_CASE("fig3 data") {
  const Outcome o = run_cli("fig3");
  REQUIRE(o.status == 0);
  const auto rows = parse_csv(o.output);
  REQUIRE(rows.size() == 9);
  CHECK(rows[0] == std::vector<std::string>{"N", "cd", "ult", "heisenberg"});
  for (int n = 1; n <= 8; ++n) {
    CHECK(std::stod(rows[n][0]) == n);
    CHECK(std::stod(rows[n][1]) == doctest::Approx(16.0).epsilon(1e-12));
    CHECK(std::stod(rows[n][2]) == doctest::Approx(4.0 * n * n).epsilon(1e-12));
    CHECK(rows[n][3] == "1");
  }
  const Outcome single = run_cli("fig3 --set fig3.N=3");
  REQUIRE(single.status == 0);
  const auto one = parse_csv(single.output);
  REQUIRE(one.size() == 2);
  CHECK(std::stod(one[1][1]) == doctest::Approx(36.0));
}

TEST_CASE("error exits") {
  const Outcome unused = run_cli("cd --set cd.bogus=1");
  CHECK(unused.status == 2);
  CHECK(unused.output.find("cd.bogus") != std::string::npos);
  CHECK(run_cli("cd --set cd.gamma=abc").status == 2);
  CHECK(run_cli("fig3 --set fig3.N=0").status == 2);
  CHECK(run_cli("iss --config /nonexistent/run.cfg").status == 2);

  const Outcome overflow = run_cli("cd --set cd.kind=sigma_x --set cd.omega=1e200");
  CHECK(overflow.status == 3);
  CHECK(overflow.output.find("non-finite") != std::string::npos);
}

TEST_CASE("config files, output files and determinism") {
  const std::string cfg = "/tmp/erasure_cli_test.cfg", csv1 = "/tmp/erasure_cli_test_1.csv",
                    csv3 = "/tmp/erasure_cli_test_3.csv";
  {
    std::ofstream f(cfg);
    f << "command=montecarlo\nmc.total_time=2000\nmc.trajectories=4\nseed=11\n"
         "sweep.name=mc.tau\nsweep.start=0.5\nsweep.stop=1.5\nsweep.points=3\n";
  }
  REQUIRE(run_cli("--config " + cfg + " --jobs 1 --out " + csv1).status == 0);
  REQUIRE(run_cli("--config " + cfg + " --jobs 3 --out " + csv3).status == 0);
  const std::string a = read_file(csv1), b = read_file(csv3);
  CHECK(!a.empty());
  CHECK(a == b);
  CHECK(parse_csv(a).size() == 4);
  // A different seed changes the trajectories.
  const Outcome other = run_cli("--config " + cfg + " --seed 12");
  REQUIRE(other.status == 0);
  CHECK(other.output != a);
  std::remove(cfg.c_str());
  std::remove(csv1.c_str());
  std::remove(csv3.c_str());
}
