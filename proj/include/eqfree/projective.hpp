#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqfree/errors.hpp"
#include "eqfree/microsolve.hpp"

namespace eqfree {

/// Microscale burst: (start time, full state, burst length) → trajectory over
/// [t0, t0 + bT] (forward in time) with at least two samples.
using BurstFn = std::function<Trajectory(double t0, const Vec& x0, double bT)>;

/// Estimate of the slow time derivative from a burst trajectory.
using DerivativeRule = std::function<Vec(const Trajectory& burst)>;

/// Macro integrator handed to the general scheme: (f, [t0, t1], X0) → trajectory.
using MacroIntegrator =
    std::function<Trajectory(const OdeRhs& f, std::pair<double, double> tspan, const Vec& X0)>;

/// Maps between macro variables and full micro states.
///
/// `lift(X, cache)` must be a right inverse of `restrict` for every cache.
struct LiftRestrict {
    std::function<Vec(const Vec& micro)> restrict;
    std::function<Vec(const Vec& macro, const Vec& cache)> lift;
};

/// One recorded burst.
struct BurstRecord {
    Trajectory traj;
    bool accurate = false;  ///< started from a physically accurate state
    std::size_t step = 0;   ///< macro step (or derivative evaluation) index
};

/// How many bursts a scheme keeps.
enum class BurstLevel { None, Accurate, All };

/// Result of a projective integration.
struct PIRun {
    std::vector<double> times;  ///< macro times
    std::vector<Vec> states;    ///< macro states (full micro states for PIRKn)
    std::vector<BurstRecord> bursts;
    std::size_t burst_count = 0;  ///< total bursts computed, recorded or not
};

/// Options shared by the Runge--Kutta-like schemes.
struct PIOptions {
    /// Double the first burst of the first macro step.
    bool double_first = true;
    /// Re-anchoring iterations per stage burst; −1 picks the scheme default
    /// (0 for pirk2, 2 for pirk4).
    int anchor_corrections = -1;
    /// Slow derivative rule; empty selects the least-squares slope over `q` points.
    DerivativeRule derivative;
    int q = 2;
    BurstLevel record = BurstLevel::All;
};

/// Options of the general (wrapper) scheme.
struct PIGOptions {
    int nBursts = 2;  ///< bursts per derivative evaluation (1 or 2)
    /// Applied to the restricted burst trajectory; empty selects the
    /// least-squares slope over `q` points.
    DerivativeRule derivative;
    int q = 2;
    BurstLevel record = BurstLevel::All;
    /// Empty selects an adaptive Dormand--Prince integrator with macro_solver options.
    MacroIntegrator macro_integrator;
    SolverOptions macro_solver = SolverOptions::with_tolerances(1e-3, 1e-6);
};

/// G(λΔ, r) = e^{λΔ·r}·(1 + λΔ·(1 − r)): growth of a mode per projective step.
double growth_factor(double lambda_dt, double r);

/// Shortest burst δ = log(βΔ)/β damping a fast rate β over one macro step Δ.
///
/// @throws ConfigError unless β > 0 and βΔ > 1.
double min_burst_length(double beta, double Delta);

/// max |G(x, r)| over the negative lobe x < −1/(1−r) for r ∈ (0, 1).
///
/// On −1/(1−r) < x < 0 the factor lies in (0, 1), so this is the quantity
/// that decides stability of all fast modes.
double sup_growth(double r);

/// Smallest r in (0, 1) with sup_growth(r) ≤ 1, by bisection (≈ 0.21781).
double stability_threshold();

/// Least-squares slope through the last q samples of a trajectory.
///
/// @throws ConfigError when q < 2 or the trajectory has fewer than q points.
Vec slow_derivative_estimate(const Trajectory& traj, int q = 2);

/// One projective forward Euler step: burst bT from (t, x), then extrapolate
/// the burst end over the remaining Δ − bT along the estimated slope.
Vec projective_euler_step(const BurstFn& burst, double t, const Vec& x, double Delta, double bT,
                          const DerivativeRule& derivative = {});

/// Second-order projective scheme over the macro schedule ts.
///
/// Each step bursts from the macro state, projects along the end slope to a
/// target at t_{n+1}, re-bursts into that target, and combines both slopes
/// trapezoidally.  Decreasing ts integrates backward with forward bursts.
///
/// @throws ConfigError for a non-monotone schedule or bT ≤ 0.
/// @throws NumericError (index = macro step) when a burst fails.
PIRun pirk2(const BurstFn& burst, const std::vector<double>& ts, const Vec& x0, double bT,
            const PIOptions& opts = {});

/// Fourth-order projective scheme in classical Runge--Kutta pattern.
///
/// Stage bursts are re-anchored so that each burst ends on its stage target;
/// see README for the burst budget.
PIRun pirk4(const BurstFn& burst, const std::vector<double>& ts, const Vec& x0, double bT,
            const PIOptions& opts = {});

/// General projective scheme wrapping an arbitrary macro integrator.
///
/// Every derivative evaluation at (t, X) lifts X with the cached micro
/// state, bursts from t, back-projects two burst lengths, bursts again to end
/// at t and returns the slope there.  Macro states in the result are
/// restricted states.
///
/// @throws ConfigError if restrict(lift(X0, x0)) differs from X0.
PIRun pig(const BurstFn& burst, std::pair<double, double> tspan, const Vec& x0,
          const LiftRestrict& lr, double bT, const PIGOptions& opts = {});

/// Write a projective run: `<stem>.csv` (macro states), `<stem>_bursts.csv`
/// (all recorded burst samples) and `<stem>.json` (manifest).
void write_pirun(const PIRun& run, const std::string& stem, const nlohmann::json& meta = {});

}  // namespace eqfree
