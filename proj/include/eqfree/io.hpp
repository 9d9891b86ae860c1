#pragma once

#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqfree/errors.hpp"
#include "eqfree/microsolve.hpp"

namespace eqfree {

/// Format a real with 15 significant digits in scientific notation.
std::string fmt_real(double v);

/// Write a text file, creating parent directories; throws ConfigError("path") on failure.
void write_text_file(const std::string& path, const std::string& content);

/// Write JSON with two-space indentation.
void write_json_file(const std::string& path, const nlohmann::json& j);

/// CSV of a trajectory: header `t,<names...>` then one row per sample.
///
/// When `names` is empty the columns are named `u0, u1, ...`.
std::string trajectory_csv(const Trajectory& traj, const std::vector<std::string>& names = {});

}  // namespace eqfree
