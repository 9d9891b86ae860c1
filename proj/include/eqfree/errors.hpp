#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace eqfree {

/// Dense real vector used for every state, centre-value and macro array.
using Vec = Eigen::VectorXd;
/// Dense real matrix (Jacobians, transfer matrices).
using Mat = Eigen::MatrixXd;

/// Raised when a configuration value is invalid.
///
/// The offending field name is kept separately so that callers (notably the
/// CLI) can report it without parsing the message.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    /// Name of the configuration field that failed validation.
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Raised when a computation produces non-finite values or fails to converge.
///
/// Carries the simulation time and an index (patch, macro step, iteration)
/// locating the failure; either may be NaN / npos when not applicable.
class NumericError : public std::runtime_error {
public:
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    NumericError(const std::string& what, double t = std::numeric_limits<double>::quiet_NaN(),
                 std::size_t index = npos)
        : std::runtime_error(what), t_(t), index_(index) {}

    double time() const noexcept { return t_; }
    std::size_t index() const noexcept { return index_; }

private:
    double t_;
    std::size_t index_;
};

}  // namespace eqfree
