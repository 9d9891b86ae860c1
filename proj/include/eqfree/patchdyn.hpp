#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqfree/coupling.hpp"
#include "eqfree/errors.hpp"
#include "eqfree/grid.hpp"
#include "eqfree/microsolve.hpp"

namespace eqfree {

/// Everything a 1D microscale RHS needs besides the state.
///
/// The state is flat with index i + n·(v + nVars·j) for micro point i,
/// component v and patch j.  Heterogeneous coefficients live here rather
/// than in global state.
struct PatchProblem1D {
    PatchGrid1D grid;
    CouplingSpec coupling;
    int nVars = 1;
    /// Per-bond coefficients within a patch (length n−1, bond i joins i, i+1),
    /// identical in every patch; empty when unused.
    std::vector<double> c;
    /// Named scalar parameters of the microscale model.
    std::map<std::string, double> params;
    /// Parity masks, filled automatically for staggered coupling.
    std::optional<StaggeredTags> tags;

    PatchProblem1D() = default;
    PatchProblem1D(const PatchConfig1D& cfg, int vars = 1);

    std::size_t index(int i, int v, int j) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(grid.nSubP) *
                   (static_cast<std::size_t>(v) + static_cast<std::size_t>(nVars) * j);
    }
    std::size_t size() const noexcept { return grid.size() * static_cast<std::size_t>(nVars); }
    double param(const std::string& name) const;
};

/// Context of a 2D patch simulation (single component).
struct PatchProblem2D {
    PatchGrid2D grid;
    CouplingSpec coupling;
    std::map<std::string, double> params;

    PatchProblem2D() = default;
    explicit PatchProblem2D(const PatchConfig2D& cfg) : grid(cfg.grid), coupling(cfg.coupling) {}
    std::size_t size() const noexcept { return grid.size(); }
    double param(const std::string& name) const;
};

/// Microscale time derivative; must fill interior points and may leave edge
/// entries arbitrary.  Must not depend on anything but its arguments.
using MicroRHS1D = std::function<Vec(double t, const Vec& u, const PatchProblem1D& prob)>;
using MicroRHS2D = std::function<Vec(double t, const Vec& u, const PatchProblem2D& prob)>;

/// Overwrite the edge entries of u with values interpolated from the centres.
void refresh_edges(Vec& u, const PatchProblem1D& prob);

/// 2D edge refresh: x-edges from the x-shift of centre columns for every
/// micro-y row, then y-edges (corners included) from the y-shift of centre
/// rows for every micro-x column.
void refresh_edges(Vec& u, const PatchProblem2D& prob);

/// Coupled patch derivative: interpolate edges into a working copy, evaluate
/// the micro RHS and zero the (slaved) edge entries of the result.
///
/// @throws ConfigError on shape mismatch.
/// @throws NumericError naming the patch whose interior derivative is not finite.
Vec patch_smooth_1(double t, const Vec& u, const PatchProblem1D& prob, const MicroRHS1D& rhs);
Vec patch_smooth_2(double t, const Vec& u, const PatchProblem2D& prob, const MicroRHS2D& rhs);

/// Time integration options for whole patch simulations.
struct SimulateOptions {
    enum class Method { RK45, RK4 } method = Method::RK45;
    SolverOptions solver = SolverOptions::with_tolerances(1e-6, 1e-9);
    double rk4_step = 0.0;  ///< fixed step for RK4 (must divide the span)
    /// Output times; empty keeps every accepted step.
    std::vector<double> output_times;
};

/// Integrate the coupled patch system; stored states have refreshed edges.
Trajectory simulate_patches(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u0,
                            std::pair<double, double> tspan, const SimulateOptions& opts = {});
Trajectory simulate_patches(const PatchProblem2D& prob, const MicroRHS2D& rhs, const Vec& u0,
                            std::pair<double, double> tspan, const SimulateOptions& opts = {});

/// Trajectory CSV with one column per micro value (header t, u_i_j, ...).
std::string patch_trajectory_csv(const Trajectory& traj, const PatchProblem1D& prob);
std::string patch_trajectory_csv(const Trajectory& traj, const PatchProblem2D& prob);
/// Shape, index layout, grid and coupling of a problem as JSON.
nlohmann::json patch_layout_json(const PatchProblem1D& prob);
nlohmann::json patch_layout_json(const PatchProblem2D& prob);

/// Write `<stem>.csv` (header t,u_i_j... with 0-based micro and patch
/// indices) and `<stem>.json` describing the reshape and coordinates.
void write_patch_trajectory(const Trajectory& traj, const PatchProblem1D& prob, const std::string& stem);
void write_patch_trajectory(const Trajectory& traj, const PatchProblem2D& prob, const std::string& stem);

}  // namespace eqfree
