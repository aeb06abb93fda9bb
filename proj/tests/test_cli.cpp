#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

using nlohmann::json;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

// Runs the installed binary with stdout captured to a scratch file; the
// shell exit status is unwrapped into the process exit code.
CliResult run_cli(const std::string& args) {
  static int counter = 0;
  const std::string capture =
      "/tmp/crawlris_cli_out_" + std::to_string(counter++) + ".txt";
  const std::string cmd =
      std::string(CRAWL_BIN) + " " + args + " > " + capture + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::ostringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  std::remove(capture.c_str());
  return r;
}

std::string write_scenario(const std::string& name, const std::string& text) {
  const std::string path = "/tmp/crawlris_cli_" + name + ".json";
  std::ofstream(path) << text;
  return path;
}

const char* kScenario = R"({
  "model": {
    "points": [0.0, 1.0],
    "springs": [{"i": 0, "j": 1, "stiffness": 1.0,
                 "rest_offset": {"breakpoints": [[0.0, 0.0], [0.5, 3.0], [1.0, 0.0]],
                                  "cyclic": true}}],
    "friction": {"mu_minus": 2.0, "mu_plus": 1.0}
  },
  "solver": {"steps_per_unit_time": 400},
  "t0": 0.0, "t1": 2.0,
  "initial_state": "relaxed"
})";

}  // namespace

TEST_CASE("simulate subcommand prints the summary and exits cleanly") {
  const std::string path = write_scenario("ok", kScenario);
  const CliResult r = run_cli("simulate -s " + path);
  CHECK(r.exit_code == 0);
  const json summary = json::parse(r.out);
  CHECK(summary.at("displacement").get<double>() ==
        doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("steps flag overrides the scenario's solver settings") {
  const std::string path = write_scenario("steps", kScenario);
  const CliResult r = run_cli("simulate -s " + path + " --steps 150");
  CHECK(r.exit_code == 0);
  CHECK(json::parse(r.out).at("steps").get<int>() < 400);
}

TEST_CASE("missing and malformed inputs exit with code 2") {
  CHECK(run_cli("simulate -s /tmp/right_behind_you.json").exit_code == 2);
  const std::string broken = write_scenario("broken", "{\"model\": [,]}");
  CHECK(run_cli("simulate -s " + broken).exit_code == 2);
  const std::string typo = write_scenario(
      "typo", R"({"model": {"points": [0, 1]}, "t5": 1})");
  CHECK(run_cli("simulate -s " + typo).exit_code == 2);
}

TEST_CASE("inadmissible initial states exit with code 3") {
  std::string text(kScenario);
  text.replace(text.find("\"relaxed\""), 9, "[0.0, 9.0]");
  const std::string path = write_scenario("inadmissible", text);
  CHECK(run_cli("simulate -s " + path).exit_code == 3);
}

TEST_CASE("regime boundaries exit with code 4") {
  const CliResult r = run_cli(
      "oracle --type two_point -k 1 --mu-minus 1 --mu-plus 1 --dL 3");
  CHECK(r.exit_code == 4);
  CHECK(run_cli("oracle --type three_point --mu-minus 2 --mu-plus 1")
            .exit_code == 4);
}

TEST_CASE("oracle subcommand computes closed forms from flags") {
  const CliResult r = run_cli(
      "oracle --type strategy --which A -k 1 --mu 1 --L-max 4");
  CHECK(r.exit_code == 0);
  const json out = json::parse(r.out);
  CHECK(out.at("displacement").get<double>() == doctest::Approx(2.0));
  CHECK(out.at("switch_times").at("t1").get<double>() ==
        doctest::Approx(0.2));

  // A forgotten parameter is an input error, not a silent default.
  CHECK(run_cli("oracle --type two_point -k 1 --mu-minus 2 --mu-plus 1")
            .exit_code == 2);
  CHECK(run_cli("oracle --type warp").exit_code == 2);
}

TEST_CASE("check subcommand reports well-posedness over the window") {
  const std::string path = write_scenario("check", kScenario);
  const CliResult r = run_cli("check -s " + path);
  CHECK(r.exit_code == 0);
  const json out = json::parse(r.out);
  CHECK(out.at("window").at("psi").at("psi_regular") == true);
  CHECK(out.at("window").at("uniform").at("holds") == true);
}

TEST_CASE("stasis subcommand writes geometry and plot files") {
  std::string text(kScenario);
  text.insert(text.rfind('}'),
              R"(, "stasis_times": [0.0, 0.25],
  "outputs": {"stasis": "geo.json", "plot": "geo.gp"})");
  const std::string path = write_scenario("stasis", text);
  const CliResult r = run_cli("stasis -s " + path + " -o /tmp/crawlris_cli_st");
  CHECK(r.exit_code == 0);
  const json geo = json::parse(std::ifstream("/tmp/crawlris_cli_st/geo.json"));
  CHECK(geo.at("geometries").size() == 2);
  std::ifstream plot("/tmp/crawlris_cli_st/geo.gp");
  CHECK(plot.good());
}

TEST_CASE("sweep subcommand runs a scenario list in parallel") {
  const std::string a = write_scenario("sw_a", kScenario);
  const std::string b = write_scenario("sw_b", kScenario);
  const std::string list = write_scenario(
      "list", std::string("{\"scenarios\": [\"") + a + "\", \"" + b + "\"]}");
  setenv("CRAWLER_RIS_THREADS", "2", 1);
  const CliResult r = run_cli("sweep -s " + list + " --steps 200");
  unsetenv("CRAWLER_RIS_THREADS");
  CHECK(r.exit_code == 0);
  const json out = json::parse(r.out);
  REQUIRE(out.at("runs").size() == 2);
  for (const auto& run : out.at("runs")) {
    CHECK(run.at("summary").at("displacement").get<double>() ==
          doctest::Approx(2.5).epsilon(1e-4));
  }
}

TEST_CASE("compare subcommand validates the simulation against closed forms") {
  std::string text(kScenario);
  text.insert(text.rfind('}'),
              R"(, "oracle": {"type": "two_point", "k": 1.0, "mu_minus": 2.0,
                   "mu_plus": 1.0, "dL": 3.0})");
  const std::string path = write_scenario("compare", text);
  const CliResult r = run_cli("compare -s " + path + " --steps 1500");
  CHECK(r.exit_code == 0);
  const json out = json::parse(r.out);
  CHECK(out.at("oracle").at("displacement").get<double>() ==
        doctest::Approx(1.0));
  CHECK(out.at("rel_error").get<double>() < 1e-2);
}
