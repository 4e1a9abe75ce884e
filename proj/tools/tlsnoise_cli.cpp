// tlsnoise <scenario> --config <path> [--set section.key=value]... [--out <dir>] [--seed <n>]
// tlsnoise validate --config <path>

#include <CLI11.hpp>

#include <iostream>

#include "tlsnoise/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"TLS noise model, trace synthesis/analysis and cryogenic budget tool"};
  app.set_version_flag("--version", std::string(TLSNOISE_VERSION));

  std::string scenario;
  std::string config_path;
  std::vector<std::string> overrides;
  std::string out_dir;
  std::uint64_t seed = 0;

  app.add_option("scenario", scenario,
                 "synth|avar|fit-qn|fit-noise|sweep-temp|budget|dielectric|validate")
      ->required();
  app.add_option("--config,-c", config_path, "configuration file")->required();
  app.add_option("--set", overrides, "override, section.key=value (repeatable)");
  auto* out_opt = app.add_option("--out,-o", out_dir, "output directory");
  auto* seed_opt = app.add_option("--seed", seed, "PRNG seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error kind=usage message=\"" << e.what() << "\"\n";
    return tlsnoise::runner::exit_usage;
  }

  if (scenario == "validate") {
    return tlsnoise::runner::validate_file(config_path, std::cout, std::cerr);
  }

  tlsnoise::runner::RunRequest req;
  req.scenario = scenario;
  req.config_path = config_path;
  req.overrides = overrides;
  if (*out_opt) req.out_dir = out_dir;
  if (*seed_opt) req.seed = seed;
  return tlsnoise::runner::run(req, std::cout, std::cerr);
}
