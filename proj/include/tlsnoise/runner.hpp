#pragma once

// Scenario execution behind the command-line tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tlsnoise/config.hpp"
#include "tlsnoise/gtm.hpp"

namespace tlsnoise::runner {

inline constexpr int exit_ok = 0;
inline constexpr int exit_domain = 1;
inline constexpr int exit_usage = 2;

struct RunRequest {
  std::string scenario;  // empty: take run.scenario from the config
  std::filesystem::path config_path;
  std::vector<std::string> overrides;  // "section.key=value"
  std::optional<std::filesystem::path> out_dir;
  std::optional<std::uint64_t> seed;
};

/// Output root when --out is absent: $TLSNOISE_OUT, else ./tlsnoise_out.
std::filesystem::path default_output_root();

/// Bath parameters from bath.preset plus any explicit bath.* keys. Writes the
/// resolved values back so the echoed config is complete.
gtm::BathConfig resolve_bath(config::Config& cfg);

/// Runs one scenario; errors become a single "error kind=... message=..."
/// line on `err` and the matching exit code.
int run(const RunRequest& request, std::ostream& out, std::ostream& err);

/// Prints one line per diagnostic; returns 0 when there are none, 1 otherwise.
int validate_file(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

struct SweepFit {
  double photons = 0.0;
  double high_slope = 0.0;
  double high_slope_err = 0.0;
  double low_slope = 0.0;
  double low_slope_err = 0.0;
  double crossover = 0.0;        // intersection of the two fitted lines, K
  double model_crossover = 0.0;  // Gamma_2(T) = 2 Gamma_1, K
};

/// Reads sweep_fits.csv as written by the sweep-temp scenario.
std::vector<SweepFit> read_sweep_fits(const std::filesystem::path& csv_path);

}  // namespace tlsnoise::runner
