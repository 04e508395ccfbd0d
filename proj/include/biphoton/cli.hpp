#pragma once

// Command-line front end: run configuration and subcommand dispatch.

#include "biphoton/crystal.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace biphoton::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kInternal = 1,
  kConfig = 2,     ///< bad flags, config file, or out-of-domain input
  kRegime = 3,     ///< not a noncollinear configuration
  kResolution = 4, ///< grid too coarse
  kInfeasible = 5, ///< multichannel layout fails a constraint
};

struct RunConfig {
  ExperimentConfig experiment;
  std::optional<std::filesystem::path> out_dir;
  std::string format = "json"; ///< "json" or "csv"
  std::size_t grid = 201;
  bool include_walkoff = true;
  bool exact_paper_constants = false;
};

/// Lambda 0.4047 μm, φ₀ 0.7 rad, L 0.5 cm, w 1464 μm, BBO.
RunConfig reference_config();

/// "0.5cm", "1464 um", "404.7nm", "5mm", "0.0025 m"; bare numbers are μm.
/// Recognized suffixes: um, mkm, μm, nm, mm, cm, m.
double parse_length(std::string_view text);

/// "0.7", "0.7 rad", "40.1deg"; bare numbers are radians.
double parse_angle(std::string_view text);

/// Flat "key = value" text, '#' comments. Keys: lambda_p, w (waist),
/// L (length), phi0, crystal, out, format, grid, walkoff,
/// exact_paper_constants. Starts from reference_config(). Throws ConfigError.
RunConfig parse_run_config(std::string_view text,
                           const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Entry point behind the `biphoton` executable; args exclude argv[0].
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace biphoton::cli
