#include "eqfree/examples.hpp"

#include "eqfree/homog.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <string>

namespace eqfree {

namespace {

using nlohmann::json;

/// Merge overrides into defaults, rejecting unknown keys and type changes.
json resolve(json defaults, const json& overrides) {
    if (overrides.is_null()) return defaults;
    if (!overrides.is_object()) throw ConfigError("overrides", "overrides must be a JSON object");
    for (auto it = overrides.begin(); it != overrides.end(); ++it) {
        if (!defaults.contains(it.key())) throw ConfigError(it.key(), "unknown parameter for this example");
        const json& d = defaults[it.key()];
        const json& v = it.value();
        const bool both_numbers = d.is_number() && v.is_number();
        if (!d.is_null() && !both_numbers && d.type() != v.type()) {
            throw ConfigError(it.key(), "parameter has the wrong type");
        }
        defaults[it.key()] = v;
    }
    return defaults;
}

template <class T>
T get(const json& p, const std::string& key) {
    try {
        return p.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(key, e.what());
    }
}

std::pair<double, double> get_pair(const json& p, const std::string& key) {
    const auto v = get<std::vector<double>>(p, key);
    if (v.size() != 2) throw ConfigError(key, "expected two values");
    return {v[0], v[1]};
}

/// Pair-valued parameter that may also be given as a scalar (broadcast).
template <class T>
std::pair<T, T> get_pair_or_scalar(const json& p, const std::string& key) {
    const json& v = p.at(key);
    if (v.is_number()) {
        const T s = v.get<T>();
        return {s, s};
    }
    const auto a = get<std::vector<T>>(p, key);
    if (a.size() != 2) throw ConfigError(key, "expected a scalar or two values");
    return {a[0], a[1]};
}

/// Adaptive burst that finishes with a short final step, so that the last
/// two samples are `gap·bT` apart and a two-point slope approximates the
/// end-time derivative.
BurstFn ode_burst(OdeRhs f, SolverOptions so, double gap) {
    return [f = std::move(f), so, gap](double t0, const Vec& x0, double bT) {
        const double tm = t0 + bT * (1.0 - gap);
        Trajectory tr = rk45_adaptive(f, t0, tm, x0, so);
        Trajectory tail = rk45_adaptive(f, tm, t0 + bT, tr.end(), so);
        for (std::size_t s = 1; s < tail.size(); ++s) tr.push(tail.times[s], tail.states[s]);
        return tr;
    };
}

DerivativeRule end_derivative(OdeRhs f) {
    return [f = std::move(f)](const Trajectory& tr) { return f(tr.t_end(), tr.end()); };
}

std::vector<double> linspace_step(double t0, double t1, double dt) {
    const long n = std::lround((t1 - t0) / dt);
    if (n < 1 || std::abs(n * dt - (t1 - t0)) > 1e-9 * std::abs(t1 - t0)) {
        throw ConfigError("Delta", "macro step must divide the span");
    }
    std::vector<double> ts(static_cast<std::size_t>(n) + 1);
    for (long k = 0; k <= n; ++k) ts[static_cast<std::size_t>(k)] = t0 + k * dt;
    ts.back() = t1;
    return ts;
}

}  // namespace

Vec seeded_normal(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, 1.0);
    Vec v(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = dist(gen);
    return v;
}

MicroRHS1D burgers_rhs() {
    return [](double, const Vec& u, const PatchProblem1D& p) {
        const double alpha = p.param("alpha");
        const double dx = p.grid.dx;
        const int n = p.grid.nSubP;
        Vec d = Vec::Zero(u.size());
        for (int j = 0; j < p.grid.nPatch; ++j) {
            for (int i = 1; i + 1 < n; ++i) {
                const double um = u[p.index(i - 1, 0, j)], u0 = u[p.index(i, 0, j)], up = u[p.index(i + 1, 0, j)];
                d[p.index(i, 0, j)] = (up - 2.0 * u0 + um) / (dx * dx) - alpha * u0 * (up - um) / (2.0 * dx);
            }
        }
        return d;
    };
}

MicroRHS1D hetero_diffusion_rhs() {
    return [](double, const Vec& u, const PatchProblem1D& p) {
        const int n = p.grid.nSubP;
        if (static_cast<int>(p.c.size()) != n - 1) {
            throw ConfigError("c", "need one diffusivity per micro bond (nSubP - 1)");
        }
        const double dx2 = p.grid.dx * p.grid.dx;
        Vec d = Vec::Zero(u.size());
        for (int j = 0; j < p.grid.nPatch; ++j) {
            for (int i = 1; i + 1 < n; ++i) {
                const double um = u[p.index(i - 1, 0, j)], u0 = u[p.index(i, 0, j)], up = u[p.index(i + 1, 0, j)];
                d[p.index(i, 0, j)] = (p.c[i] * (up - u0) - p.c[i - 1] * (u0 - um)) / dx2;
            }
        }
        return d;
    };
}

MicroRHS1D ideal_wave_rhs() {
    return [](double, const Vec& u, const PatchProblem1D& p) {
        if (!p.tags) throw ConfigError("tags", "ideal wave needs staggered parity masks");
        const int n = p.grid.nSubP;
        const double dx = p.grid.dx;
        Vec ht = Vec::Zero(u.size()), ut = Vec::Zero(u.size());
        for (int j = 0; j < p.grid.nPatch; ++j) {
            for (int i = 1; i + 1 < n; ++i) {
                const double g = -(u[p.index(i + 1, 0, j)] - u[p.index(i - 1, 0, j)]) / (2.0 * dx);
                ht[p.index(i, 0, j)] = g;
                ut[p.index(i, 0, j)] = g;
            }
        }
        for (std::size_t q = 0; q < p.tags->h_mask.size(); ++q) {
            if (p.tags->h_mask[q]) ut[static_cast<Eigen::Index>(q)] = ht[static_cast<Eigen::Index>(q)];
        }
        return ut;
    };
}

MicroRHS2D nonlinear_diffusion_rhs() {
    return [](double, const Vec& u, const PatchProblem2D& p) {
        const PatchGrid2D& g = p.grid;
        const double dx2 = g.gx.dx * g.gx.dx, dy2 = g.gy.dx * g.gy.dx;
        const Vec u3 = u.array().cube().matrix();
        Vec d = Vec::Zero(u.size());
        for (int l = 0; l < g.Ny(); ++l)
            for (int k = 0; k < g.Nx(); ++k)
                for (int j = 1; j + 1 < g.ny(); ++j)
                    for (int i = 1; i + 1 < g.nx(); ++i) {
                        const double c = u3[g.index(i, j, k, l)];
                        d[g.index(i, j, k, l)] =
                            (u3[g.index(i + 1, j, k, l)] - 2.0 * c + u3[g.index(i - 1, j, k, l)]) / dx2 +
                            (u3[g.index(i, j + 1, k, l)] - 2.0 * c + u3[g.index(i, j - 1, k, l)]) / dy2;
                    }
        return d;
    };
}

ExampleSpec burgers1d(const json& overrides) {
    const json p = resolve({{"xlim", {0.0, 2.0 * std::numbers::pi}},
                            {"nPatch", 8},
                            {"ordCC", 0},
                            {"ratio", 0.2},
                            {"nSubP", 7},
                            {"alpha", 30.0},
                            {"noise", 0.1},
                            {"t_end", 0.5}},
                           overrides);
    ExampleSpec ex;
    ex.name = "burgers1d";
    ex.description = "Burgers PDE u_t = u_xx - alpha*u*u_x on 1D patches";
    ex.kind = ExampleKind::Patch1D;
    ex.params = p;
    PatchProblem1D prob(config_patches_1d(get_pair(p, "xlim"), get<int>(p, "nPatch"), get<int>(p, "ordCC"),
                                          get<double>(p, "ratio"), get<int>(p, "nSubP")));
    prob.params["alpha"] = get<double>(p, "alpha");
    const double noise = get<double>(p, "noise");
    ex.problem1d = prob;
    ex.rhs1d = burgers_rhs();
    ex.tspan = {0.0, get<double>(p, "t_end")};
    ex.initial = [prob, noise](std::uint64_t seed) {
        const Vec z = seeded_normal(prob.size(), seed);
        Vec u(prob.size());
        for (int j = 0; j < prob.grid.nPatch; ++j)
            for (int i = 0; i < prob.grid.nSubP; ++i) {
                const std::size_t q = prob.index(i, 0, j);
                u[q] = 0.3 * (1.0 + std::sin(prob.grid.x(i, j))) + noise * z[q];
            }
        return u;
    };
    return ex;
}

ExampleSpec heterodiff1d(const json& overrides) {
    const json p = resolve({{"xlim", {0.0, 2.0 * std::numbers::pi}},
                            {"nPatch", 9},
                            {"ordCC", 0},
                            {"ratio", 0.2},
                            {"nSubP", nullptr},
                            {"cDiff", {5.887, 21.52, 0.35924}},
                            {"normalise", false},
                            {"noise", 0.4},
                            {"t_end", nullptr}},
                           overrides);
    HeteroLattice lat(get<std::vector<double>>(p, "cDiff"));
    if (get<bool>(p, "normalise")) lat = lat.normalised();
    const int m = lat.period();
    const int nSubP = p.at("nSubP").is_null() ? 2 * m + 1 : get<int>(p, "nSubP");
    if ((nSubP - 1) % m != 0) {
        throw ConfigError("nSubP", "nSubP - 1 must be a multiple of the heterogeneity period");
    }
    ExampleSpec ex;
    ex.name = "heterodiff1d";
    ex.description = "heterogeneous lattice diffusion with a periodic diffusivity on 1D patches";
    ex.kind = ExampleKind::Patch1D;
    PatchProblem1D prob(config_patches_1d(get_pair(p, "xlim"), get<int>(p, "nPatch"), get<int>(p, "ordCC"),
                                          get<double>(p, "ratio"), nSubP));
    prob.c.resize(static_cast<std::size_t>(nSubP - 1));
    for (int i = 0; i < nSubP - 1; ++i) prob.c[i] = lat.c[static_cast<std::size_t>(i % m)];
    const double cHomo = lat.c_homo();
    const double t_end = p.at("t_end").is_null() ? 2.0 / cHomo : get<double>(p, "t_end");
    ex.params = p;
    ex.params["nSubP"] = nSubP;
    ex.params["t_end"] = t_end;
    ex.params["cHomo"] = cHomo;
    ex.params["c_used"] = lat.c;
    ex.problem1d = prob;
    ex.rhs1d = hetero_diffusion_rhs();
    ex.tspan = {0.0, t_end};
    const double noise = get<double>(p, "noise");
    ex.initial = [prob, noise](std::uint64_t seed) {
        const Vec z = seeded_normal(prob.size(), seed);
        Vec u(prob.size());
        for (int j = 0; j < prob.grid.nPatch; ++j)
            for (int i = 0; i < prob.grid.nSubP; ++i) {
                const std::size_t q = prob.index(i, 0, j);
                u[q] = std::sin(prob.grid.x(i, j)) + noise * z[q];
            }
        return u;
    };
    ex.expected = {{"lam0", {0.0, -0.9997, -0.9997, -3.9947, -3.9947, -8.9731, -8.9731, -15.915, -15.915}},
                   {"lamFast", -5440.7},
                   {"config", {{"ratio", 0.1}, {"normalise", true}}}};
    return ex;
}

ExampleSpec idealwave1d(const json& overrides) {
    const json p = resolve({{"xlim", {0.0, 2.0 * std::numbers::pi}},
                            {"nPatch", 8},
                            {"ratio", 0.2},
                            {"nSubP", 11},
                            {"noise", 0.02},
                            {"t_end", 4.0}},
                           overrides);
    ExampleSpec ex;
    ex.name = "idealwave1d";
    ex.description = "ideal linear wave h_t = -u_x, u_t = -h_x on staggered 1D patches";
    ex.kind = ExampleKind::Patch1D;
    ex.params = p;
    PatchProblem1D prob(config_patches_1d(get_pair(p, "xlim"), get<int>(p, "nPatch"), -1,
                                          get<double>(p, "ratio"), get<int>(p, "nSubP")));
    ex.problem1d = prob;
    ex.rhs1d = ideal_wave_rhs();
    ex.tspan = {0.0, get<double>(p, "t_end")};
    const double noise = get<double>(p, "noise");
    ex.initial = [prob, noise](std::uint64_t seed) {
        const Vec z = seeded_normal(prob.size(), seed);
        Vec u(prob.size());
        for (int j = 0; j < prob.grid.nPatch; ++j)
            for (int i = 0; i < prob.grid.nSubP; ++i) {
                const std::size_t q = prob.index(i, 0, j);
                const double s = 0.5 * std::sin(prob.grid.x(i, j));
                u[q] = (prob.tags->is_h(i, j) ? 1.0 + s : s) + noise * z[q];
            }
        return u;
    };
    return ex;
}

ExampleSpec nonlindiff2d(const json& overrides) {
    const json p = resolve({{"xlim", {-3.0, 3.0}},
                            {"ylim", {-2.0, 2.0}},
                            {"nPatch", {9, 7}},
                            {"ordCC", 0},
                            {"ratio", {0.4, 0.4}},
                            {"nSubP", {5, 5}},
                            {"noise", 0.0},
                            {"t_end", 2.0}},
                           overrides);
    ExampleSpec ex;
    ex.name = "nonlindiff2d";
    ex.description = "nonlinear diffusion u_t = laplacian(u^3) on 2D patches";
    ex.kind = ExampleKind::Patch2D;
    ex.params = p;
    PatchProblem2D prob(config_patches_2d(get_pair(p, "xlim"), get_pair(p, "ylim"),
                                          get_pair_or_scalar<int>(p, "nPatch"), get<int>(p, "ordCC"),
                                          get_pair_or_scalar<double>(p, "ratio"),
                                          get_pair_or_scalar<int>(p, "nSubP")));
    ex.problem2d = prob;
    ex.rhs2d = nonlinear_diffusion_rhs();
    ex.tspan = {0.0, get<double>(p, "t_end")};
    const double noise = get<double>(p, "noise");
    ex.initial = [prob, noise](std::uint64_t seed) {
        const PatchGrid2D& g = prob.grid;
        const Vec z = seeded_normal(g.size(), seed);
        Vec u(g.size());
        for (int l = 0; l < g.Ny(); ++l)
            for (int k = 0; k < g.Nx(); ++k)
                for (int j = 0; j < g.ny(); ++j)
                    for (int i = 0; i < g.nx(); ++i) {
                        const std::size_t q = g.index(i, j, k, l);
                        const double x = g.x()(i, k), y = g.y()(j, l);
                        u[q] = std::exp(-x * x - y * y) + noise * z[q];
                    }
        return u;
    };
    return ex;
}

ExampleSpec mm_kinetics_burst(double epsilon, const json& overrides) {
    if (!(epsilon > 0.0)) throw ConfigError("epsilon", "scale separation must be positive");
    json defaults{{"epsilon", epsilon}, {"x0", {1.0, 0.0}}, {"t0", 0.0},      {"t_end", 6.0},
                  {"Delta", 1.0},       {"bT", nullptr},    {"rtol", 1e-10}, {"atol", 1e-13},
                  {"final_gap", 1e-3}};
    const json p = resolve(defaults, overrides);
    const double eps = get<double>(p, "epsilon");
    if (!(eps > 0.0)) throw ConfigError("epsilon", "scale separation must be positive");
    const double Delta = get<double>(p, "Delta");
    const double bT = p.at("bT").is_null() ? eps * std::log(std::abs(Delta) / eps) : get<double>(p, "bT");
    const double gap = get<double>(p, "final_gap");
    if (!(gap > 0.0 && gap < 1.0)) throw ConfigError("final_gap", "must lie in (0,1)");

    ExampleSpec ex;
    ex.name = "mm_kinetics";
    ex.description = "Michaelis-Menten enzyme kinetics, fast rate 1/epsilon";
    ex.kind = ExampleKind::Burst;
    ex.params = p;
    ex.params["bT"] = bT;
    ex.ode = [eps](double, const Vec& x) {
        Vec d(2);
        d[0] = -x[0] + (x[0] + 0.5) * x[1];
        d[1] = (x[0] - (x[0] + 1.0) * x[1]) / eps;
        return d;
    };
    SolverOptions so;
    so.rtol = get<double>(p, "rtol");
    so.atol = get<double>(p, "atol");
    ex.burst = ode_burst(ex.ode, so, gap);
    ex.exact_derivative = end_derivative(ex.ode);
    ex.bT = bT;
    ex.ts = linspace_step(get<double>(p, "t0"), get<double>(p, "t_end"), Delta);
    ex.tspan = {get<double>(p, "t0"), get<double>(p, "t_end")};
    const auto x0 = get<std::vector<double>>(p, "x0");
    if (x0.size() != 2) throw ConfigError("x0", "state has two components");
    ex.initial = [x0](std::uint64_t) { return Vec(Eigen::Map<const Vec>(x0.data(), 2)); };
    ex.lift_restrict.restrict = [](const Vec& x) { return Vec(x.head(1)); };
    ex.lift_restrict.lift = [](const Vec& X, const Vec& cache) {
        Vec x = cache;
        x[0] = X[0];
        return x;
    };
    ex.expected = {{"slow_manifold", "y = x/(x+1)"}};
    return ex;
}

ExampleSpec singpert_pig(const json& overrides) {
    const json p = resolve({{"epsilon", 1e-3},
                            {"x0", {1.0, 0.0}},
                            {"t_end", 6.0},
                            {"bT", nullptr},
                            {"rtol", 1e-8},
                            {"atol", 1e-11},
                            {"final_gap", 1e-3},
                            {"forcing", true}},
                           overrides);
    const double eps = get<double>(p, "epsilon");
    if (!(eps > 0.0 && eps < 1.0)) throw ConfigError("epsilon", "need 0 < epsilon < 1");
    const double bT = p.at("bT").is_null() ? 2.0 * eps * std::log(1.0 / eps) : get<double>(p, "bT");
    const bool forcing = get<bool>(p, "forcing");

    ExampleSpec ex;
    ex.name = "singpert_pig";
    ex.description = "non-autonomous singular perturbation system for general projective integration";
    ex.kind = ExampleKind::Burst;
    ex.params = p;
    ex.params["bT"] = bT;
    ex.ode = [eps, forcing](double t, const Vec& x) {
        Vec d(2);
        d[0] = std::cos(x[0]) * std::sin(x[1]) * (forcing ? std::cos(t) : 0.0);
        d[1] = (std::cos(x[0]) - x[1]) / eps;
        return d;
    };
    SolverOptions so;
    so.rtol = get<double>(p, "rtol");
    so.atol = get<double>(p, "atol");
    ex.burst = ode_burst(ex.ode, so, get<double>(p, "final_gap"));
    ex.exact_derivative = end_derivative(ex.ode);
    ex.bT = bT;
    ex.tspan = {0.0, get<double>(p, "t_end")};
    const auto x0 = get<std::vector<double>>(p, "x0");
    if (x0.size() != 2) throw ConfigError("x0", "state has two components");
    ex.initial = [x0](std::uint64_t) { return Vec(Eigen::Map<const Vec>(x0.data(), 2)); };
    ex.lift_restrict.restrict = [](const Vec& x) { return Vec(x.head(1)); };
    ex.lift_restrict.lift = [](const Vec& X, const Vec& cache) {
        Vec x = cache;
        x[0] = X[0];
        return x;
    };
    return ex;
}

ExampleSpec one_patch_nonlinear(const json& overrides) {
    const json p = resolve({{"h", 0.2}, {"nSubP", 21}, {"U0", 1.0}, {"perturbation", 0.0}, {"t_end", 1.0}},
                           overrides);
    const double h = get<double>(p, "h");
    const int n = get<int>(p, "nSubP");
    if (!(h > 0.0 && h < 1.0)) throw ConfigError("h", "patch half-width must lie in (0,1)");
    if (n < 3 || n % 2 == 0) throw ConfigError("nSubP", "micro points must be odd and at least 3");
    const double dx = 2.0 * h / (n - 1);
    const int c = (n - 1) / 2;
    const double closure = 1.0 - h * h;

    ExampleSpec ex;
    ex.name = "one_patch_nonlinear";
    ex.description = "one patch of u_t = u*u_xx with parabolic edge closure";
    ex.kind = ExampleKind::OnePatch;
    ex.params = p;
    ex.coordinates.resize(n);
    for (int i = 0; i < n; ++i) ex.coordinates[i] = dx * (i - c);
    ex.ode = [n, c, dx, closure](double, const Vec& u) {
        Vec w = u;
        w[0] = closure * u[c];
        w[n - 1] = closure * u[c];
        Vec d(n);
        for (int i = 1; i + 1 < n; ++i) d[i] = w[i] * (w[i + 1] - 2.0 * w[i] + w[i - 1]) / (dx * dx);
        // Edges follow the closure so stored states stay consistent.
        d[0] = closure * d[c];
        d[n - 1] = closure * d[c];
        return d;
    };
    ex.tspan = {0.0, get<double>(p, "t_end")};
    const double U0 = get<double>(p, "U0"), A = get<double>(p, "perturbation");
    const Vec xs = ex.coordinates;
    ex.initial = [xs, U0, A, h, n, c, closure](std::uint64_t) {
        Vec u(n);
        for (int i = 0; i < n; ++i) {
            const double s = std::sin(std::numbers::pi * xs[i] / h);
            u[i] = (1.0 - xs[i] * xs[i]) * U0 + A * U0 * (s + s * s);
        }
        u[0] = closure * u[c];
        u[n - 1] = closure * u[c];
        return u;
    };
    ex.expected = {{"U0_exact", "1/(1/U0 + 2t)"}};
    return ex;
}

const std::vector<std::string>& example_names() {
    static const std::vector<std::string> names{"burgers1d",   "heterodiff1d", "idealwave1d",
                                                "nonlindiff2d", "mm_kinetics",  "singpert_pig",
                                                "one_patch_nonlinear"};
    return names;
}

ExampleSpec make_example(const std::string& name, const json& overrides) {
    if (name == "burgers1d") return burgers1d(overrides);
    if (name == "heterodiff1d") return heterodiff1d(overrides);
    if (name == "idealwave1d") return idealwave1d(overrides);
    if (name == "nonlindiff2d") return nonlindiff2d(overrides);
    if (name == "mm_kinetics") {
        double eps = 0.05;
        if (overrides.is_object() && overrides.contains("epsilon")) eps = get<double>(overrides, "epsilon");
        return mm_kinetics_burst(eps, overrides);
    }
    if (name == "singpert_pig") return singpert_pig(overrides);
    if (name == "one_patch_nonlinear") return one_patch_nonlinear(overrides);
    std::string known;
    for (const auto& n : example_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("example", "unknown example '" + name + "' (known: " + known + ")");
}

}  // namespace eqfree
