#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace eqfree::cli {

/// Library version recorded in run manifests.
inline constexpr const char* kVersion = "1.0.0";

/// Environment variable that, when set, overrides every `--out` directory.
inline constexpr const char* kOutDirEnv = "EQFREE_OUT_DIR";

/// Outcome of one command: files written, its manifest and the text it reports.
struct CommandResult {
    std::vector<std::string> files;  ///< every output file, manifest last
    nlohmann::json manifest;         ///< the manifest that was written
    std::string report;              ///< human-readable summary for stdout
};

/// Output directory: the environment override if set, otherwise `flag`.
std::string resolve_out_dir(const std::string& flag);

/// Layer `layer` onto `base`: keys must already exist in `base` and keep their
/// JSON type (numbers interchangeable, null slots accept anything).  A layer
/// holding a `config` object (a run manifest) contributes that object.
/// @throws ConfigError naming the offending key.
nlohmann::json merge_config(const nlohmann::json& base, const nlohmann::json& layer);

/// Built-in defaults of each command's configuration.
nlohmann::json simulate_defaults();
nlohmann::json spectrum_defaults();
nlohmann::json homogenise_defaults();
nlohmann::json pi_errors_defaults();
nlohmann::json stability_defaults();

/// Run an example and write `<example>.csv`, `<example>_plot.py` and
/// `<example>_manifest.json` (projective examples add `<example>_bursts.csv`).
CommandResult cmd_simulate(const nlohmann::json& config, const std::string& out_dir);

/// Patch-scheme (or explicit matrix) spectrum: `spectrum.csv`, `spectrum_gap.json`
/// and `spectrum_manifest.json`.
CommandResult cmd_spectrum(const nlohmann::json& config, const std::string& out_dir);

/// Homogenised coefficients of the period-two lattice (a, b) and the one-patch
/// diffusivity table: `homogenise.json` and `homogenise_manifest.json`.
CommandResult cmd_homogenise(const nlohmann::json& config, const std::string& out_dir);

/// Endpoint errors of the projective schemes over a list of macro steps:
/// `pi_errors.csv`, `pi_errors_slopes.json` and `pi_errors_manifest.json`.
CommandResult cmd_pi_errors(const nlohmann::json& config, const std::string& out_dir);

/// Stability threshold and growth-factor curves: `stability.csv` and
/// `stability_manifest.json`.
CommandResult cmd_stability(const nlohmann::json& config, const std::string& out_dir);

/// Full command-line entry point.  Returns 0 on success, 2 for configuration
/// errors and 3 for numerical failures.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqfree::cli
