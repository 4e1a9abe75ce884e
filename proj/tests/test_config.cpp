#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tlsnoise/config.hpp"
#include "tlsnoise/errors.hpp"
#include "tlsnoise/runner.hpp"

using namespace tlsnoise;
using namespace tlsnoise::config;
namespace fs = std::filesystem;

namespace {

Config parse_text(const std::string& text) {
  std::istringstream in(text);
  return Config::parse(in, "test.conf");
}

bool has_diag(const std::vector<Diagnostic>& d, const std::string& key) {
  for (const auto& x : d) {
    if (x.key == key) return true;
  }
  return false;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("tlsnoise_test_config_" + name);
  fs::remove_all(p);
  return p;
}

fs::path write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_timings(const std::string& report) {
  const auto pos = report.find("[timings_s]");
  if (pos == std::string::npos) return report;
  const auto next = report.find("\n[", pos + 1);
  return report.substr(0, pos) + (next == std::string::npos ? "" : report.substr(next + 1));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(TLSNOISE_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("parsing sections, comments and typed getters") {
  const auto c = parse_text(
      "# leading comment\n"
      "[run]\n"
      "scenario = budget   # trailing comment\n"
      "seed = 17\n"
      "\n"
      "[synth]\n"
      "dt = 0.01\n"
      "[avar]\n"
      "detrend = true\n"
      "[sweep]\n"
      "photons = 1, 10 ,100\n");
  CHECK(c.get("run.scenario") == "budget");
  CHECK(c.get_uint("run.seed") == 17);
  CHECK(c.get_double("synth.dt") == 0.01);
  CHECK(c.get_bool("avar.detrend"));
  CHECK(c.get_list("sweep.photons") == std::vector<double>{1.0, 10.0, 100.0});
  // Schema defaults.
  CHECK(c.get_int("synth.n_fluct") == 10000);
  CHECK(c.get("avar.trace").empty());
  CHECK(c.has("run.seed"));
  CHECK_FALSE(c.has("synth.n_fluct"));
  CHECK_FALSE(c.get_optional("bath.mu").has_value());
}

TEST_CASE("parse errors carry their location") {
  auto message = [](const std::string& text) {
    try {
      parse_text(text);
    } catch (const UsageError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  const auto unknown = message("[run]\nseed = 1\nsede = 2\n");
  CHECK(unknown.find("test.conf:3") != std::string::npos);
  CHECK(unknown.find("run.sede") != std::string::npos);
  CHECK(message("[run]\nseed = 1\nseed = 2\n").find("test.conf:3") != std::string::npos);
  CHECK_FALSE(message("[run\n").empty());
  CHECK_FALSE(message("seed = 1\n").empty());
  CHECK_FALSE(message("[run]\nseed\n").empty());
  CHECK_FALSE(message("[nosuch]\nx = 1\n").empty());
}

TEST_CASE("typed getters reject malformed values") {
  const auto c = parse_text("[synth]\ndt = fast\nn_fluct = 2.5\n[avar]\ndetrend = maybe\n");
  CHECK_THROWS_AS(c.get_double("synth.dt"), UsageError);
  CHECK_THROWS_AS(c.get_int("synth.n_fluct"), UsageError);
  CHECK_THROWS_AS(c.get_bool("avar.detrend"), UsageError);
  CHECK_THROWS_AS(c.get("synth.bogus"), UsageError);
}

TEST_CASE("overrides") {
  auto c = parse_text("[synth]\ndt = 0.05\n");
  c.apply_override("synth.dt=0.1");
  CHECK(c.get_double("synth.dt") == 0.1);
  c.apply_override("run.seed = 9");
  CHECK(c.get_uint("run.seed") == 9);
  CHECK_THROWS_AS(c.apply_override("synth.nope=1"), UsageError);
  CHECK_THROWS_AS(c.apply_override("synth.dt"), UsageError);
}

TEST_CASE("serialization round trip") {
  auto c = parse_text("[run]\nscenario = avar\n[synth]\nduration = 100\n");
  const std::string s = c.serialize();
  const auto back = parse_text(s);
  CHECK(back.serialize() == s);
  CHECK(back.get_double("synth.duration") == 100.0);
  CHECK(s.find("[synth]") != std::string::npos);
}

TEST_CASE("validation diagnostics name the offending key") {
  CHECK(validate(parse_text("")).empty());
  const auto d1 = validate(parse_text("[synth]\ngamma_min = 10\ngamma_max = 1\n"));
  CHECK(has_diag(d1, "synth.gamma_min, synth.gamma_max"));

  const auto d2 = validate(parse_text("[chain]\nstages = A:4:20, B:0.1:-3\n"));
  CHECK(has_diag(d2, "chain.stages[1].attenuation_db"));

  const auto d3 = validate(parse_text("[synth]\nloop_gain = 50\ngate_time = 0.05\n"));
  CHECK(has_diag(d3, "synth.loop_gain, synth.gate_time"));

  const auto d4 = validate(parse_text("[bath]\nmu = 1.5\n"));
  CHECK(has_diag(d4, "bath.mu"));

  const auto d5 = validate(parse_text("[dielectric]\nfilling = 0\n"));
  CHECK(has_diag(d5, "dielectric.filling"));
}

TEST_CASE("list helpers and digest") {
  const auto st = parse_stage_list("RT:300:0, MC:0.013:20");
  REQUIRE(st.size() == 2);
  CHECK(st[1].name == "MC");
  CHECK(st[1].temperature == 0.013);
  CHECK(st[1].attenuation_db == 20.0);
  CHECK_THROWS_AS(parse_stage_list("RT:300"), UsageError);
  CHECK(parse_number_list("1,2.5, 1e3") == std::vector<double>{1.0, 2.5, 1000.0});
  CHECK_THROWS_AS(parse_number_list("1,x"), UsageError);
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("shipped configurations validate") {
  for (const auto& entry : fs::directory_iterator(TLSNOISE_CONFIG_DIR)) {
    if (entry.path().extension() != ".conf") continue;
    CAPTURE(entry.path().string());
    CHECK(validate(Config::load(entry.path())).empty());
  }
}

TEST_CASE("empty bath gives an all-zero Allan variance") {
  const fs::path out = scratch("empty");
  runner::RunRequest req;
  req.config_path = fs::path(TLSNOISE_CONFIG_DIR) / "empty_bath.conf";
  req.out_dir = out;
  std::ostringstream o, e;
  REQUIRE(runner::run(req, o, e) == runner::exit_ok);
  std::ifstream in(out / "avar.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "tau,sigma2,stderr,n_terms");
  int rows = 0;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string tau, s2;
    std::getline(ls, tau, ',');
    std::getline(ls, s2, ',');
    CHECK(std::stod(s2) == 0.0);
    ++rows;
  }
  CHECK(rows > 10);
  fs::remove_all(out);
}

TEST_CASE("runner error kinds") {
  const fs::path dir = scratch("errors");
  const auto good = write_file(dir / "ok.conf", "[run]\nscenario = budget\n");
  std::ostringstream o, e;

  runner::RunRequest req;
  req.config_path = good;
  req.out_dir = dir / "out";
  req.scenario = "nonsense";
  CHECK(runner::run(req, o, e) == runner::exit_usage);
  CHECK(e.str().find("error kind=usage") != std::string::npos);

  req.scenario.clear();
  req.overrides = {"bath.gamma1=5000"};
  e.str("");
  CHECK(runner::run(req, o, e) == runner::exit_domain);
  CHECK(e.str().find("error kind=domain") != std::string::npos);

  req.overrides = {"synth.gamma_min=10", "synth.gamma_max=1"};
  CHECK(runner::run(req, o, e) == runner::exit_usage);

  req.overrides.clear();
  req.config_path = dir / "missing.conf";
  CHECK(runner::run(req, o, e) == runner::exit_usage);
  fs::remove_all(dir);
}

TEST_CASE("command-line exit codes") {
  const fs::path dir = scratch("cli");
  const auto good = write_file(dir / "ok.conf", "[run]\nscenario = budget\n");
  const auto bad = write_file(dir / "bad.conf", "[synth]\ngamma_min = 10\ngamma_max = 1\n");
  const std::string out = " --out " + (dir / "out").string();
  CHECK(run_cli("budget --config " + good.string() + out) == 0);
  CHECK(fs::exists(dir / "out" / "budget.csv"));
  CHECK(fs::exists(dir / "out" / "report.txt"));
  CHECK(fs::exists(dir / "out" / "effective.conf"));
  CHECK(run_cli("budget --config " + good.string() + " --set bath.gamma1=5000" + out) == 1);
  CHECK(run_cli("budget --config " + bad.string() + out) == 2);
  CHECK(run_cli("budget") == 2);
  CHECK(run_cli("validate --config " + good.string()) == 0);
  CHECK(run_cli("validate --config " + bad.string()) == 1);
  CHECK(run_cli("--version") == 0);
  fs::remove_all(dir);
}

TEST_CASE("reruns are byte identical") {
  const fs::path a = scratch("rerun_a");
  const fs::path b = scratch("rerun_b");
  const auto cfg = fs::path(TLSNOISE_CONFIG_DIR) / "synth_pound.conf";
  const std::string common = " --config " + cfg.string() + " --set synth.duration=200 --seed 5";
  REQUIRE(run_cli("synth" + common + " --out " + a.string()) == 0);
  REQUIRE(run_cli("synth" + common + " --out " + b.string()) == 0);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    CAPTURE(name.string());
    std::string x = slurp(a / name), y = slurp(b / name);
    if (name == "report.txt") {
      x = strip_timings(x);
      y = strip_timings(y);
    }
    CHECK(x == y);
    ++compared;
  }
  CHECK(compared >= 4);

  // A different seed changes the trace but not the effective-config layout.
  const fs::path c = scratch("rerun_c");
  REQUIRE(run_cli("synth --config " + cfg.string() + " --set synth.duration=200 --seed 6 --out " +
                  c.string()) == 0);
  CHECK(slurp(a / "trace.csv") != slurp(c / "trace.csv"));
  for (const auto& p : {a, b, c}) fs::remove_all(p);
}
