#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqfree/microsolve.hpp"
#include "eqfree/patchdyn.hpp"
#include "eqfree/projective.hpp"

namespace eqfree {

/// What an example simulates.
enum class ExampleKind {
    Patch1D,   ///< coupled 1D patch scheme (problem1d + rhs1d)
    Patch2D,   ///< coupled 2D patch scheme (problem2d + rhs2d)
    Burst,     ///< multiscale ODE driven by projective integration (ode + burst)
    OnePatch,  ///< single isolated patch with its own edge closure (ode)
};

/// A registered worked problem: configuration, RHS, seeded initial state.
///
/// Everything is determined by `params` (the resolved configuration) and the
/// seed handed to `initial`.
struct ExampleSpec {
    std::string name;
    std::string description;
    ExampleKind kind = ExampleKind::Patch1D;
    nlohmann::json params;    ///< resolved parameter set (defaults merged with overrides)
    nlohmann::json expected;  ///< reference descriptors used by tests
    std::pair<double, double> tspan{0.0, 1.0};
    /// Initial state for a given noise seed (mt19937_64, standard normal draws).
    std::function<Vec(std::uint64_t seed)> initial;

    std::optional<PatchProblem1D> problem1d;
    MicroRHS1D rhs1d;
    std::optional<PatchProblem2D> problem2d;
    MicroRHS2D rhs2d;

    OdeRhs ode;                       ///< full microscale ODE (Burst / OnePatch)
    BurstFn burst;                    ///< Burst kind only
    double bT = 0.0;                  ///< default burst length
    std::vector<double> ts;           ///< default macro schedule
    LiftRestrict lift_restrict;       ///< restriction/lifting pair (PIG examples)
    DerivativeRule exact_derivative;  ///< ode evaluated at the burst end
    Vec coordinates;                  ///< micro coordinates (OnePatch)
};

/// Name of the noise generator recorded in manifests.
inline constexpr const char* kNoiseGenerator = "std::mt19937_64 + std::normal_distribution<double>";

/// `n` standard normal draws from a seeded mt19937_64.
Vec seeded_normal(std::size_t n, std::uint64_t seed);

/// Burgers u_t = u_xx − α·u·u_x inside patches (α = 30 by default).
MicroRHS1D burgers_rhs();
/// (c_i(u_{i+1}−u_i) − c_{i−1}(u_i−u_{i−1}))/dx² with per-bond c from the problem.
MicroRHS1D hetero_diffusion_rhs();
/// Staggered ideal wave: both candidate derivatives −(w_{i+1} − w_{i−1})/(2dx), masked by parity.
MicroRHS1D ideal_wave_rhs();
/// u_t = ∇²(u³) on 2D patches.
MicroRHS2D nonlinear_diffusion_rhs();

ExampleSpec burgers1d(const nlohmann::json& overrides = nlohmann::json::object());
ExampleSpec heterodiff1d(const nlohmann::json& overrides = nlohmann::json::object());
ExampleSpec idealwave1d(const nlohmann::json& overrides = nlohmann::json::object());
ExampleSpec nonlindiff2d(const nlohmann::json& overrides = nlohmann::json::object());
/// Michaelis--Menten kinetics x' = −x + (x+½)y, y' = (x − (x+1)y)/ε.
ExampleSpec mm_kinetics_burst(double epsilon, const nlohmann::json& overrides = nlohmann::json::object());
/// x1' = cos x1 sin x2 cos t, x2' = (cos x1 − x2)/ε with restrict = x1.
ExampleSpec singpert_pig(const nlohmann::json& overrides = nlohmann::json::object());
/// One patch |x| ≤ h of u_t = u·u_xx with u(±h) = (1 − h²)·u(0).
ExampleSpec one_patch_nonlinear(const nlohmann::json& overrides = nlohmann::json::object());

/// Registered example names.
const std::vector<std::string>& example_names();

/// Build a registered example; throws ConfigError("example") for unknown names
/// and ConfigError(key) for unknown or invalid overrides.
ExampleSpec make_example(const std::string& name,
                         const nlohmann::json& overrides = nlohmann::json::object());

}  // namespace eqfree
