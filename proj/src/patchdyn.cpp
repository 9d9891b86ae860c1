#include "eqfree/patchdyn.hpp"

#include <cmath>
#include <string>

#include "eqfree/io.hpp"

namespace eqfree {

PatchProblem1D::PatchProblem1D(const PatchConfig1D& cfg, int vars)
    : grid(cfg.grid), coupling(cfg.coupling), nVars(vars) {
    if (nVars < 1) throw ConfigError("nVars", "need at least one component");
    if (coupling.mode == CouplingMode::Staggered) {
        if (nVars != 1) throw ConfigError("nVars", "staggered fields are interleaved in one component");
        tags = staggered_tags(grid);
    }
}

namespace {

double lookup(const std::map<std::string, double>& params, const std::string& name) {
    const auto it = params.find(name);
    if (it == params.end()) throw ConfigError(name, "missing model parameter");
    return it->second;
}

EdgeValues edges_for(const Vec& U, const PatchGrid1D& g, const CouplingSpec& spec,
                     const std::optional<StaggeredTags>& tags) {
    if (spec.mode == CouplingMode::Staggered) {
        return edge_values_staggered(U, g, tags ? *tags : staggered_tags(g));
    }
    return edge_values(U, g, spec);
}

}  // namespace

double PatchProblem1D::param(const std::string& name) const { return lookup(params, name); }
double PatchProblem2D::param(const std::string& name) const { return lookup(params, name); }

void refresh_edges(Vec& u, const PatchProblem1D& prob) {
    if (static_cast<std::size_t>(u.size()) != prob.size()) {
        throw ConfigError("state", "state length " + std::to_string(u.size()) + " differs from " +
                                       std::to_string(prob.size()));
    }
    const int n = prob.grid.nSubP, N = prob.grid.nPatch, c = prob.grid.centre();
    Vec U(N);
    for (int v = 0; v < prob.nVars; ++v) {
        for (int j = 0; j < N; ++j) U[j] = u[prob.index(c, v, j)];
        const EdgeValues e = edges_for(U, prob.grid, prob.coupling, prob.tags);
        for (int j = 0; j < N; ++j) {
            u[prob.index(0, v, j)] = e.left[j];
            u[prob.index(n - 1, v, j)] = e.right[j];
        }
    }
}

void refresh_edges(Vec& u, const PatchProblem2D& prob) {
    const PatchGrid2D& g = prob.grid;
    if (static_cast<std::size_t>(u.size()) != g.size()) {
        throw ConfigError("state", "state length " + std::to_string(u.size()) + " differs from " +
                                       std::to_string(g.size()));
    }
    const int nx = g.nx(), ny = g.ny(), Nx = g.Nx(), Ny = g.Ny();
    const int cx = g.gx.centre(), cy = g.gy.centre();
    Vec U(Nx);
    for (int l = 0; l < Ny; ++l) {
        for (int j = 0; j < ny; ++j) {
            for (int k = 0; k < Nx; ++k) U[k] = u[g.index(cx, j, k, l)];
            const EdgeValues e = edge_values(U, g.gx, prob.coupling);
            for (int k = 0; k < Nx; ++k) {
                u[g.index(0, j, k, l)] = e.left[k];
                u[g.index(nx - 1, j, k, l)] = e.right[k];
            }
        }
    }
    Vec V(Ny);
    for (int k = 0; k < Nx; ++k) {
        for (int i = 0; i < nx; ++i) {
            for (int l = 0; l < Ny; ++l) V[l] = u[g.index(i, cy, k, l)];
            const EdgeValues e = edge_values(V, g.gy, prob.coupling);
            for (int l = 0; l < Ny; ++l) {
                u[g.index(i, 0, k, l)] = e.left[l];
                u[g.index(i, ny - 1, k, l)] = e.right[l];
            }
        }
    }
}

Vec patch_smooth_1(double t, const Vec& u, const PatchProblem1D& prob, const MicroRHS1D& rhs) {
    Vec work = u;
    refresh_edges(work, prob);
    Vec d = rhs(t, work, prob);
    if (d.size() != work.size()) throw ConfigError("rhs", "micro RHS changed the state length");
    const int n = prob.grid.nSubP, N = prob.grid.nPatch;
    for (int j = 0; j < N; ++j) {
        for (int v = 0; v < prob.nVars; ++v) {
            for (int i = 1; i + 1 < n; ++i) {
                if (!std::isfinite(d[prob.index(i, v, j)])) {
                    throw NumericError("micro RHS returned a non-finite value in patch " +
                                           std::to_string(j) + " at t = " + std::to_string(t),
                                       t, static_cast<std::size_t>(j));
                }
            }
            d[prob.index(0, v, j)] = 0.0;
            d[prob.index(n - 1, v, j)] = 0.0;
        }
    }
    return d;
}

Vec patch_smooth_2(double t, const Vec& u, const PatchProblem2D& prob, const MicroRHS2D& rhs) {
    Vec work = u;
    refresh_edges(work, prob);
    Vec d = rhs(t, work, prob);
    if (d.size() != work.size()) throw ConfigError("rhs", "micro RHS changed the state length");
    const PatchGrid2D& g = prob.grid;
    const int nx = g.nx(), ny = g.ny();
    for (int l = 0; l < g.Ny(); ++l) {
        for (int k = 0; k < g.Nx(); ++k) {
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) {
                    const std::size_t q = g.index(i, j, k, l);
                    const bool edge = i == 0 || j == 0 || i == nx - 1 || j == ny - 1;
                    if (edge) {
                        d[q] = 0.0;
                    } else if (!std::isfinite(d[q])) {
                        throw NumericError("micro RHS returned a non-finite value in patch (" +
                                               std::to_string(k) + "," + std::to_string(l) +
                                               ") at t = " + std::to_string(t),
                                           t, static_cast<std::size_t>(k + g.Nx() * l));
                    }
                }
            }
        }
    }
    return d;
}

namespace {

template <class Problem, class Rhs>
Trajectory simulate_impl(const Problem& prob, const Rhs& rhs, const Vec& u0,
                         std::pair<double, double> tspan, const SimulateOptions& opts,
                         Vec (*smooth)(double, const Vec&, const Problem&, const Rhs&)) {
    if (static_cast<std::size_t>(u0.size()) != prob.size()) {
        throw ConfigError("u0", "initial state length differs from the grid");
    }
    const OdeRhs f = [&](double t, const Vec& u) { return smooth(t, u, prob, rhs); };
    Trajectory traj;
    if (opts.method == SimulateOptions::Method::RK4) {
        traj = rk4_fixed(f, tspan.first, tspan.second, u0, opts.rk4_step);
        if (!opts.output_times.empty()) {
            Trajectory sampled;
            for (double t : opts.output_times) sampled.push(t, interpolate(traj, t));
            traj = std::move(sampled);
        }
    } else {
        SolverOptions so = opts.solver;
        so.output_times = opts.output_times;
        traj = rk45_adaptive(f, tspan.first, tspan.second, u0, so);
    }
    for (Vec& s : traj.states) refresh_edges(s, prob);
    return traj;
}

}  // namespace

Trajectory simulate_patches(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u0,
                            std::pair<double, double> tspan, const SimulateOptions& opts) {
    return simulate_impl(prob, rhs, u0, tspan, opts, &patch_smooth_1);
}

Trajectory simulate_patches(const PatchProblem2D& prob, const MicroRHS2D& rhs, const Vec& u0,
                            std::pair<double, double> tspan, const SimulateOptions& opts) {
    return simulate_impl(prob, rhs, u0, tspan, opts, &patch_smooth_2);
}

namespace {

std::vector<std::string> column_names(const PatchProblem1D& prob) {
    const int n = prob.grid.nSubP, N = prob.grid.nPatch;
    std::vector<std::string> names(prob.size());
    for (int j = 0; j < N; ++j) {
        for (int v = 0; v < prob.nVars; ++v) {
            for (int i = 0; i < n; ++i) {
                names[prob.index(i, v, j)] =
                    prob.nVars == 1 ? "u_" + std::to_string(i) + "_" + std::to_string(j)
                                    : "u_" + std::to_string(i) + "_" + std::to_string(v) + "_" +
                                          std::to_string(j);
            }
        }
    }
    return names;
}

std::vector<std::string> column_names(const PatchProblem2D& prob) {
    const PatchGrid2D& g = prob.grid;
    std::vector<std::string> names(g.size());
    for (int l = 0; l < g.Ny(); ++l)
        for (int k = 0; k < g.Nx(); ++k)
            for (int j = 0; j < g.ny(); ++j)
                for (int i = 0; i < g.nx(); ++i)
                    names[g.index(i, j, k, l)] = "u_" + std::to_string(i) + "_" + std::to_string(j) +
                                                 "_" + std::to_string(k) + "_" + std::to_string(l);
    return names;
}

}  // namespace

std::string patch_trajectory_csv(const Trajectory& traj, const PatchProblem1D& prob) {
    return trajectory_csv(traj, column_names(prob));
}

std::string patch_trajectory_csv(const Trajectory& traj, const PatchProblem2D& prob) {
    return trajectory_csv(traj, column_names(prob));
}

nlohmann::json patch_layout_json(const PatchProblem1D& prob) {
    const int n = prob.grid.nSubP, N = prob.grid.nPatch;
    nlohmann::json grid;
    to_json(grid, prob.grid);
    nlohmann::json coupling;
    to_json(coupling, prob.coupling);
    return {{"shape", prob.nVars == 1 ? nlohmann::json{n, N} : nlohmann::json{n, prob.nVars, N}},
            {"layout", prob.nVars == 1 ? "i + n*j" : "i + n*(v + nVars*j)"},
            {"grid", grid},
            {"coupling", coupling}};
}

nlohmann::json patch_layout_json(const PatchProblem2D& prob) {
    const PatchGrid2D& g = prob.grid;
    nlohmann::json grid;
    to_json(grid, g);
    nlohmann::json coupling;
    to_json(coupling, prob.coupling);
    return {{"shape", {g.nx(), g.ny(), g.Nx(), g.Ny()}},
            {"layout", "i + nx*(j + ny*(k + Nx*l))"},
            {"grid", grid},
            {"coupling", coupling}};
}

void write_patch_trajectory(const Trajectory& traj, const PatchProblem1D& prob, const std::string& stem) {
    write_text_file(stem + ".csv", patch_trajectory_csv(traj, prob));
    nlohmann::json j = patch_layout_json(prob);
    j["csv"] = stem + ".csv";
    j["samples"] = traj.size();
    write_json_file(stem + ".json", j);
}

void write_patch_trajectory(const Trajectory& traj, const PatchProblem2D& prob, const std::string& stem) {
    write_text_file(stem + ".csv", patch_trajectory_csv(traj, prob));
    nlohmann::json j = patch_layout_json(prob);
    j["csv"] = stem + ".csv";
    j["samples"] = traj.size();
    write_json_file(stem + ".json", j);
}

}  // namespace eqfree
