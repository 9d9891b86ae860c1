#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

#include "eqfree/errors.hpp"

namespace eqfree {

/// Right-hand side of an ODE system u' = f(t, u).
using OdeRhs = std::function<Vec(double t, const Vec& u)>;

/// Sampled solution: strictly monotone times with matching states.
struct Trajectory {
    std::vector<double> times;
    std::vector<Vec> states;

    std::size_t size() const noexcept { return times.size(); }
    bool empty() const noexcept { return times.empty(); }
    double t_end() const { return times.back(); }
    const Vec& end() const { return states.back(); }
    void push(double t, Vec u) {
        times.push_back(t);
        states.push_back(std::move(u));
    }
};

/// Controls for the adaptive integrator.
struct SolverOptions {
    double rtol = 1e-6;
    double atol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    double initial_step = 0.0;  ///< 0 selects a step from the problem scales
    long max_steps = 10'000'000;
    /// When non-empty, the solver steps exactly onto these times (monotone in
    /// the direction of integration, within the span) and records only them.
    std::vector<double> output_times;

    /// Options with the given tolerances and all other fields defaulted.
    static SolverOptions with_tolerances(double rtol, double atol) {
        SolverOptions o;
        o.rtol = rtol;
        o.atol = atol;
        return o;
    }
};

/// Classical fourth-order Runge--Kutta with fixed step.
///
/// @param h positive step that must divide |t1 − t0| to relative 1e−9;
///          integration runs backward when t1 < t0.
/// @throws ConfigError ("h") if h is not positive or does not divide the span.
/// @throws NumericError carrying the last valid time if the state stops being finite.
Trajectory rk4_fixed(const OdeRhs& f, double t0, double t1, const Vec& u0, double h);

/// Dormand--Prince 5(4) pair with PI step-size control.
///
/// Accepts a step when max_i |err_i| / (atol + rtol·max(|u_i|, |u_new_i|)) ≤ 1.
/// Records every accepted step (or only opts.output_times if given).
///
/// @throws ConfigError for t1 == t0 or non-positive tolerances.
/// @throws NumericError on step underflow below 1e−12·|t1 − t0|, non-finite
///         states or exhausting max_steps.
Trajectory rk45_adaptive(const OdeRhs& f, double t0, double t1, const Vec& u0,
                         const SolverOptions& opts = {});

/// Linear interpolation of a trajectory at time t (inside its time range).
Vec interpolate(const Trajectory& traj, double t);

}  // namespace eqfree
