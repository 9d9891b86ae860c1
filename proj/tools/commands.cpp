#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/version.hpp>
#include <CLI11.hpp>
#include <Eigen/Core>

#include "eqfree/analysis.hpp"
#include "eqfree/errors.hpp"
#include "eqfree/examples.hpp"
#include "eqfree/grid.hpp"
#include "eqfree/homog.hpp"
#include "eqfree/io.hpp"
#include "eqfree/microsolve.hpp"
#include "eqfree/patchdyn.hpp"
#include "eqfree/projective.hpp"

namespace eqfree::cli {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

std::string join_path(const std::string& dir, const std::string& file) {
    return (std::filesystem::path(dir) / file).string();
}

json versions() {
    std::ostringstream eigen;
    eigen << EIGEN_WORLD_VERSION << '.' << EIGEN_MAJOR_VERSION << '.' << EIGEN_MINOR_VERSION;
    std::ostringstream js;
    js << NLOHMANN_JSON_VERSION_MAJOR << '.' << NLOHMANN_JSON_VERSION_MINOR << '.' << NLOHMANN_JSON_VERSION_PATCH;
    return {{"eqfree", kVersion},
            {"eigen", eigen.str()},
            {"boost", BOOST_LIB_VERSION},
            {"nlohmann_json", js.str()},
            {"compiler", __VERSION__}};
}

json json_real(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

/// Write the manifest as the last output and fill in the result.
CommandResult finish(const std::string& command, const json& config, const json& seed,
                     std::vector<std::string> files, const std::string& manifest_path,
                     Clock::time_point start, std::string report, const json& extra = json::object()) {
    files.push_back(manifest_path);
    json m{{"command", command},
           {"config", config},
           {"seed", seed},
           {"noise_generator", kNoiseGenerator},
           {"versions", versions()},
           {"outputs", files},
           {"wall_time_s", std::chrono::duration<double>(Clock::now() - start).count()}};
    for (const auto& [k, v] : extra.items()) m[k] = v;
    write_json_file(manifest_path, m);
    return CommandResult{std::move(files), std::move(m), std::move(report)};
}

bool compatible(const json& base, const json& value) {
    if (base.is_null()) return true;
    if (base.is_number()) return value.is_number();
    return base.type() == value.type();
}

std::vector<double> linspace(double a, double b, int n) {
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) v[k] = k == n - 1 ? b : a + (b - a) * k / (n - 1);
    return v;
}

std::string python_list(const std::vector<double>& v) {
    std::ostringstream s;
    s << '[';
    for (std::size_t k = 0; k < v.size(); ++k) {
        if (k) s << ", ";
        if (std::isnan(v[k])) {
            s << "nan";
        } else {
            s << fmt_real(v[k]);
        }
    }
    s << ']';
    return s.str();
}

/// Micro coordinates in column order with the patch-edge points set to NaN,
/// so that surface and line plots break across the gaps between patches.
std::vector<double> gapped_coordinates(const PatchGrid1D& g, int nVars, int var) {
    std::vector<double> xs;
    for (int j = 0; j < g.nPatch; ++j) {
        for (int v = 0; v < nVars; ++v) {
            for (int i = 0; i < g.nSubP; ++i) {
                if (v != var) continue;
                const bool edge = i == 0 || i == g.nSubP - 1;
                xs.push_back(edge ? std::numeric_limits<double>::quiet_NaN() : g.x(i, j));
            }
        }
    }
    return xs;
}

std::vector<int> variable_columns(const PatchProblem1D& prob, int var) {
    std::vector<int> cols;
    for (int j = 0; j < prob.grid.nPatch; ++j)
        for (int i = 0; i < prob.grid.nSubP; ++i) cols.push_back(static_cast<int>(prob.index(i, var, j)));
    return cols;
}

std::string plot_script_1d(const std::string& csv, const PatchProblem1D& prob) {
    std::vector<double> cols;
    for (int c : variable_columns(prob, 0)) cols.push_back(c);
    std::ostringstream s;
    s << "# Surface of the patch field over space and time; patch edges are NaN\n"
         "# so the mesh shows the gaps between patches.\n"
         "import numpy as np\n"
         "import matplotlib.pyplot as plt\n"
         "nan = float('nan')\n"
         "data = np.loadtxt('" << csv << "', delimiter=',', skiprows=1, ndmin=2)\n"
         "t = data[:, 0]\n"
         "cols = np.array(" << python_list(cols) << ", dtype=int)\n"
         "u = data[:, 1:][:, cols]\n"
         "x = np.array(" << python_list(gapped_coordinates(prob.grid, prob.nVars, 0)) << ")\n"
         "X, T = np.meshgrid(x, t)\n"
         "ax = plt.figure().add_subplot(projection='3d')\n"
         "ax.plot_surface(X, T, u, cmap='viridis')\n"
         "ax.set_xlabel('space x')\n"
         "ax.set_ylabel('time t')\n"
         "ax.set_zlabel('u')\n"
         "plt.savefig('" << std::filesystem::path(csv).stem().string() << ".png')\n";
    return s.str();
}

std::string plot_script_2d(const std::string& csv, const PatchProblem2D& prob) {
    const PatchGrid2D& g = prob.grid;
    std::vector<double> xs, ys;
    for (int k = 0; k < g.Nx(); ++k)
        for (int i = 0; i < g.nx(); ++i)
            xs.push_back(i == 0 || i == g.nx() - 1 ? std::numeric_limits<double>::quiet_NaN() : g.x()(i, k));
    for (int l = 0; l < g.Ny(); ++l)
        for (int j = 0; j < g.ny(); ++j)
            ys.push_back(j == 0 || j == g.ny() - 1 ? std::numeric_limits<double>::quiet_NaN() : g.y()(j, l));
    std::ostringstream s;
    s << "# Final-time surface over the 2D patches; patch edges are NaN so the\n"
         "# mesh shows the gaps between patches.\n"
         "import numpy as np\n"
         "import matplotlib.pyplot as plt\n"
         "nan = float('nan')\n"
         "data = np.loadtxt('" << csv << "', delimiter=',', skiprows=1, ndmin=2)\n"
         "nx, ny, Nx, Ny = " << g.nx() << ", " << g.ny() << ", " << g.Nx() << ", " << g.Ny() << "\n"
         "# column index i + nx*(j + ny*(k + Nx*l)) -> array [l, k, j, i]\n"
         "u = data[-1, 1:].reshape(Ny, Nx, ny, nx).transpose(0, 2, 1, 3).reshape(Ny * ny, Nx * nx)\n"
         "x = np.array(" << python_list(xs) << ")\n"
         "y = np.array(" << python_list(ys) << ")\n"
         "X, Y = np.meshgrid(x, y)\n"
         "ax = plt.figure().add_subplot(projection='3d')\n"
         "ax.plot_surface(X, Y, u, cmap='viridis')\n"
         "ax.set_xlabel('x')\n"
         "ax.set_ylabel('y')\n"
         "ax.set_zlabel('u(t_end)')\n"
         "plt.savefig('" << std::filesystem::path(csv).stem().string() << ".png')\n";
    return s.str();
}

std::string plot_script_lines(const std::string& csv, const std::string& bursts_csv, const std::string& xlabel) {
    std::ostringstream s;
    s << "# Components against time";
    if (!bursts_csv.empty()) s << ": macro points as markers, micro bursts as thin lines";
    s << ".\n"
         "import numpy as np\n"
         "import matplotlib.pyplot as plt\n"
         "data = np.loadtxt('" << csv << "', delimiter=',', skiprows=1, ndmin=2)\n"
         "plt.plot(data[:, 0], data[:, 1:], 'o-')\n";
    if (!bursts_csv.empty()) {
        s << "b = np.loadtxt('" << bursts_csv << "', delimiter=',', skiprows=1, ndmin=2)\n"
             "for k in np.unique(b[:, 0]):\n"
             "    sel = b[:, 0] == k\n"
             "    plt.plot(b[sel, 3], b[sel, 4:], 'k-', linewidth=0.5)\n";
    }
    s << "plt.xlabel('" << xlabel << "')\n"
         "plt.savefig('" << std::filesystem::path(csv).stem().string() << ".png')\n";
    return s.str();
}

std::string plot_script_profile(const std::string& csv, const Vec& coords) {
    std::ostringstream s;
    s << "# Micro profiles of the single patch at each output time.\n"
         "import numpy as np\n"
         "import matplotlib.pyplot as plt\n"
         "data = np.loadtxt('" << csv << "', delimiter=',', skiprows=1, ndmin=2)\n"
         "x = np.array(" << python_list(std::vector<double>(coords.data(), coords.data() + coords.size()))
      << ")\n"
         "for row in data[::10]:\n"
         "    plt.plot(x, row[1:])\n"
         "plt.xlabel('x')\n"
         "plt.ylabel('u')\n"
         "plt.savefig('" << std::filesystem::path(csv).stem().string() << ".png')\n";
    return s.str();
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(y[k])) {
            lx.push_back(std::log(x[k]));
            ly.push_back(std::log(y[k]));
        }
    }
    if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    const double n = static_cast<double>(lx.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k] / n;
        my += ly[k] / n;
    }
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
    }
    return sxx > 0.0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

std::string complex_str(const std::complex<double>& z) {
    std::ostringstream s;
    s.precision(8);
    s << z.real();
    if (z.imag() != 0.0) s << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return s.str();
}

}  // namespace

std::string resolve_out_dir(const std::string& flag) {
    if (const char* env = std::getenv(kOutDirEnv); env != nullptr && *env != '\0') return env;
    return flag;
}

json merge_config(const json& base, const json& layer) {
    if (layer.is_null()) return base;
    if (!layer.is_object()) throw ConfigError("config", "configuration must be a JSON object");
    const json& src = layer.contains("config") && layer.at("config").is_object() ? layer.at("config") : layer;
    json out = base;
    for (const auto& [key, value] : src.items()) {
        if (!out.contains(key)) throw ConfigError(key, "unknown configuration key");
        json& slot = out[key];
        if (!compatible(slot, value)) throw ConfigError(key, "value has the wrong type");
        if (slot.is_object() && !slot.empty()) {
            slot = merge_config(slot, value);
        } else if (slot.is_object()) {
            // An empty object is a free-form block (e.g. example overrides).
            for (const auto& [k, v] : value.items()) slot[k] = v;
        } else {
            slot = value;
        }
    }
    return out;
}

json simulate_defaults() {
    return {{"example", ""}, {"seed", 0}, {"samples", 101}, {"overrides", json::object()}};
}

json spectrum_defaults() {
    return {{"example", "diffusion"}, {"ordCC", nullptr},   {"nPatch", nullptr}, {"ratio", nullptr},
            {"nSubP", nullptr},       {"normalise", nullptr}, {"matrix", nullptr}, {"fd_step", 0.0}};
}

json homogenise_defaults() {
    return {{"a", 1.0}, {"b", 3.0}, {"cH_samples", {0.0, 0.5, 1.0, 2.0, 4.0}}, {"one_patch_d", 1e-3}};
}

json pi_errors_defaults() {
    return {{"epsilon", 1e-3},       {"T", 1.0},          {"deltas", {1.0, 0.5, 0.25, 0.125}},
            {"burst_factor", 1.5},   {"burst_lengths", json::array()}, {"x0", {1.0, 0.0}},
            {"derivative", "exact"}, {"reference_rtol", 1e-10}};
}

json stability_defaults() { return {{"x_max", 30.0}, {"samples", 121}}; }

CommandResult cmd_simulate(const json& config, const std::string& out_dir) {
    const auto start = Clock::now();
    const json cfg = merge_config(simulate_defaults(), config);
    const std::string name = cfg.at("example").get<std::string>();
    if (name.empty()) throw ConfigError("example", "no example given");
    const auto seed = cfg.at("seed").get<std::uint64_t>();
    const int samples = cfg.at("samples").get<int>();
    if (samples < 2) throw ConfigError("samples", "need at least two output samples");
    const ExampleSpec ex = make_example(name, cfg.at("overrides"));

    json extra{{"resolved_parameters", ex.params}};
    const std::string csv_name = name + ".csv";
    const std::string csv = join_path(out_dir, csv_name);
    const std::string plot = join_path(out_dir, name + "_plot.py");
    std::vector<std::string> files{csv};
    std::ostringstream report;
    report << ex.name << ": " << ex.description << "\n";

    const auto times = linspace(ex.tspan.first, ex.tspan.second, samples);
    switch (ex.kind) {
    case ExampleKind::Patch1D: {
        SimulateOptions so;
        so.output_times = times;
        const Trajectory tr = simulate_patches(*ex.problem1d, ex.rhs1d, ex.initial(seed), ex.tspan, so);
        write_text_file(csv, patch_trajectory_csv(tr, *ex.problem1d));
        write_text_file(plot, plot_script_1d(csv_name, *ex.problem1d));
        extra["layout"] = patch_layout_json(*ex.problem1d);
        report << "samples " << tr.size() << " over t in [" << ex.tspan.first << ", " << ex.tspan.second
               << "], max |u(t_end)| " << tr.end().lpNorm<Eigen::Infinity>() << "\n";
        break;
    }
    case ExampleKind::Patch2D: {
        SimulateOptions so;
        so.output_times = times;
        const Trajectory tr = simulate_patches(*ex.problem2d, ex.rhs2d, ex.initial(seed), ex.tspan, so);
        write_text_file(csv, patch_trajectory_csv(tr, *ex.problem2d));
        write_text_file(plot, plot_script_2d(csv_name, *ex.problem2d));
        extra["layout"] = patch_layout_json(*ex.problem2d);
        report << "samples " << tr.size() << " over t in [" << ex.tspan.first << ", " << ex.tspan.second
               << "], max |u(t_end)| " << tr.end().lpNorm<Eigen::Infinity>() << "\n";
        break;
    }
    case ExampleKind::Burst: {
        PIRun run;
        if (!ex.ts.empty()) {
            run = pirk2(ex.burst, ex.ts, ex.initial(seed), ex.bT);
        } else {
            run = pig(ex.burst, ex.tspan, ex.initial(seed), ex.lift_restrict, ex.bT);
        }
        const std::string stem = join_path(out_dir, name);
        write_pirun(run, stem, {{"example", name}, {"bT", ex.bT}});
        files = {stem + ".csv", stem + "_bursts.csv", stem + ".json"};
        write_text_file(plot, plot_script_lines(csv_name, name + "_bursts.csv", "time t"));
        report << "macro steps " << (run.times.size() - 1) << ", bursts " << run.burst_count
               << ", burst length " << ex.bT << ", final state";
        for (Eigen::Index k = 0; k < run.states.back().size(); ++k) report << " " << run.states.back()[k];
        report << "\n";
        break;
    }
    case ExampleKind::OnePatch: {
        SolverOptions so = SolverOptions::with_tolerances(1e-8, 1e-11);
        so.output_times = times;
        const Trajectory tr = rk45_adaptive(ex.ode, ex.tspan.first, ex.tspan.second, ex.initial(seed), so);
        std::vector<std::string> names;
        for (Eigen::Index i = 0; i < ex.coordinates.size(); ++i) names.push_back("u_" + std::to_string(i));
        write_text_file(csv, trajectory_csv(tr, names));
        write_text_file(plot, plot_script_profile(csv_name, ex.coordinates));
        const Eigen::Index c = ex.coordinates.size() / 2;
        report << "centre value " << tr.states.front()[c] << " -> " << tr.end()[c] << "\n";
        break;
    }
    }
    files.push_back(plot);
    return finish("simulate", cfg, cfg.at("seed"), files, join_path(out_dir, name + "_manifest.json"), start,
                  report.str(), extra);
}

CommandResult cmd_spectrum(const json& config, const std::string& out_dir) {
    const auto start = Clock::now();
    const json cfg = merge_config(spectrum_defaults(), config);
    const double fd_step = cfg.at("fd_step").get<double>();
    Spectrum s;
    json resolved = cfg;
    json extra = json::object();
    if (!cfg.at("matrix").is_null()) {
        const json& m = cfg.at("matrix");
        if (!m.is_array() || m.empty()) throw ConfigError("matrix", "matrix must be a non-empty array of rows");
        const auto n = static_cast<Eigen::Index>(m.size());
        Mat A(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            if (!m[i].is_array() || static_cast<Eigen::Index>(m[i].size()) != n) {
                throw ConfigError("matrix", "matrix must be square");
            }
            for (Eigen::Index j = 0; j < n; ++j) A(i, j) = m[i][j].get<double>();
        }
        s = eig_dense(A);
    } else {
        const std::string name = cfg.at("example").get<std::string>();
        auto pick = [&cfg](const char* key, const json& fallback) {
            return cfg.at(key).is_null() ? fallback : cfg.at(key);
        };
        if (name == "diffusion") {
            const int ord = pick("ordCC", 4).get<int>();
            const int N = pick("nPatch", 8).get<int>();
            const double r = pick("ratio", 0.1).get<double>();
            const int n = pick("nSubP", 11).get<int>();
            if (!cfg.at("normalise").is_null()) throw ConfigError("normalise", "only heterogeneous examples normalise");
            PatchProblem1D prob(config_patches_1d({0.0, 2.0 * std::numbers::pi}, N, ord, r, n));
            prob.c.assign(static_cast<std::size_t>(n - 1), 1.0);
            resolved["ordCC"] = ord;
            resolved["nPatch"] = N;
            resolved["ratio"] = r;
            resolved["nSubP"] = n;
            s = patch_spectrum(prob, hetero_diffusion_rhs(), Vec::Zero(prob.size()), fd_step);
        } else {
            json ov = json::object();
            for (const char* key : {"ordCC", "nPatch", "ratio", "nSubP", "normalise"}) {
                if (!cfg.at(key).is_null()) ov[key] = cfg.at(key);
            }
            const ExampleSpec ex = make_example(name, ov);
            if (ex.kind != ExampleKind::Patch1D) {
                throw ConfigError("example", "spectra are available for 1D patch examples only");
            }
            extra["resolved_parameters"] = ex.params;
            s = patch_spectrum(*ex.problem1d, ex.rhs1d, Vec::Zero(ex.problem1d->size()), fd_step);
        }
    }
    const std::string csv = join_path(out_dir, "spectrum.csv");
    const std::string gap = join_path(out_dir, "spectrum_gap.json");
    write_text_file(csv, spectrum_csv(s));
    write_json_file(gap, spectrum_report(s));

    std::ostringstream report;
    report << "eigenvalues " << s.eigenvalues.size() << ", slow " << s.n_slow << ", gap ratio " << s.gap << "\n";
    report << "slow:";
    for (const auto& z : s.slow_eigenvalues()) report << " " << complex_str(z);
    report << "\n";
    if (!s.fast_eigenvalues().empty()) report << "fast leader: " << complex_str(s.fast_leader()) << "\n";
    return finish("spectrum", resolved, nullptr, {csv, gap}, join_path(out_dir, "spectrum_manifest.json"), start,
                  report.str(), extra);
}

CommandResult cmd_homogenise(const json& config, const std::string& out_dir) {
    const auto start = Clock::now();
    const json cfg = merge_config(homogenise_defaults(), config);
    const double a = cfg.at("a").get<double>();
    const double b = cfg.at("b").get<double>();
    const double d = cfg.at("one_patch_d").get<double>();
    const double D = effective_diffusivity(a, b);
    const double c4 = fourth_order_coefficient(a, b);
    const double s1 = slow_manifold_coefficient(a, b);
    const double theta = robin_boundary_coefficient(a, b);
    const CellTransferMap T = cell_transfer_matrix(a, b);

    json nu1 = json::array();
    for (const auto& cH : cfg.at("cH_samples")) {
        const HolisticClosure hc = holistic_closure(cH.get<double>());
        nu1.push_back({{"cH", hc.cH}, {"nu1", hc.nu1}});
    }
    json table = json::array();
    for (int n = 1; n <= 8; ++n) {
        table.push_back({{"n", n},
                         {"formula", one_patch_diffusivity_formula(n, a, b)},
                         {"numeric", one_patch_diffusivity_numeric(n, a, b, d)}});
    }
    const json out{{"a", a},
                   {"b", b},
                   {"D", D},
                   {"c4", c4},
                   {"s1", s1},
                   {"theta", theta},
                   {"theta_a_adjacent", robin_boundary_coefficient(a, b, BoundaryOrientation::AAdjacent)},
                   {"T", {{T.T[0][0], T.T[0][1]}, {T.T[1][0], T.T[1][1]}}},
                   {"det_T", T.det()},
                   {"nu1", nu1},
                   {"one_patch", table}};
    const std::string path = join_path(out_dir, "homogenise.json");
    write_json_file(path, out);

    std::ostringstream r;
    r.precision(12);
    r << "a = " << a << ", b = " << b << "\n"
      << "D = " << D << "\nc4 = " << c4 << "\ns1 = " << s1 << "\ntheta = " << theta << "\n"
      << "T = [[" << T.T[0][0] << ", " << T.T[0][1] << "], [" << T.T[1][0] << ", " << T.T[1][1] << "]]\n";
    for (const auto& e : nu1) r << "nu1(cH = " << e["cH"].get<double>() << ") = " << e["nu1"].get<double>() << "\n";
    r << "one-patch effective diffusivity (d = " << d << "):\n  n  formula  numeric\n";
    for (const auto& e : table) {
        r << "  " << e["n"].get<int>() << "  " << e["formula"].get<double>() << "  " << e["numeric"].get<double>()
          << "\n";
    }
    return finish("homogenise", cfg, nullptr, {path}, join_path(out_dir, "homogenise_manifest.json"), start,
                  r.str());
}

CommandResult cmd_pi_errors(const json& config, const std::string& out_dir) {
    const auto start = Clock::now();
    const json cfg = merge_config(pi_errors_defaults(), config);
    const double eps = cfg.at("epsilon").get<double>();
    const double T = cfg.at("T").get<double>();
    const auto deltas = cfg.at("deltas").get<std::vector<double>>();
    const auto explicit_bT = cfg.at("burst_lengths").get<std::vector<double>>();
    const double factor = cfg.at("burst_factor").get<double>();
    const std::string rule = cfg.at("derivative").get<std::string>();
    if (!(T > 0.0)) throw ConfigError("T", "end time must be positive");
    if (!explicit_bT.empty() && explicit_bT.size() != deltas.size()) {
        throw ConfigError("burst_lengths", "one burst length per macro step is required");
    }
    if (rule != "exact" && rule != "least_squares") {
        throw ConfigError("derivative", "derivative rule is 'exact' or 'least_squares'");
    }
    const ExampleSpec ex = mm_kinetics_burst(eps, {{"x0", cfg.at("x0")}, {"rtol", 1e-12}, {"atol", 1e-15}});
    const Vec x0 = ex.initial(0);

    std::ostringstream csv;
    csv << "delta,burst_length,pirk2_error,pirk4_error\n";
    std::vector<double> e2, e4;
    if (!deltas.empty()) {
        const double rtol = cfg.at("reference_rtol").get<double>();
        const Vec ref = rk45_adaptive(ex.ode, 0.0, T, x0, SolverOptions::with_tolerances(rtol, rtol * 1e-4)).end();
        for (std::size_t k = 0; k < deltas.size(); ++k) {
            const double D = deltas[k];
            if (!(D > 0.0)) throw ConfigError("deltas", "macro steps must be positive");
            const long n = std::lround(T / D);
            if (n < 1 || std::abs(n * D - T) > 1e-9 * T) throw ConfigError("deltas", "macro step must divide T");
            std::vector<double> ts(static_cast<std::size_t>(n) + 1);
            for (long i = 0; i <= n; ++i) ts[i] = i == n ? T : i * D;
            const double bT = explicit_bT.empty() ? factor * min_burst_length(1.0 / eps, D) : explicit_bT[k];
            PIOptions opts;
            opts.record = BurstLevel::None;
            if (rule == "exact") opts.derivative = ex.exact_derivative;
            e2.push_back(std::abs(pirk2(ex.burst, ts, x0, bT, opts).states.back()[0] - ref[0]));
            e4.push_back(std::abs(pirk4(ex.burst, ts, x0, bT, opts).states.back()[0] - ref[0]));
            csv << fmt_real(D) << ',' << fmt_real(bT) << ',' << fmt_real(e2.back()) << ',' << fmt_real(e4.back())
                << '\n';
        }
    }
    const double s2 = loglog_slope(deltas, e2), s4 = loglog_slope(deltas, e4);
    const std::string csv_path = join_path(out_dir, "pi_errors.csv");
    const std::string slopes_path = join_path(out_dir, "pi_errors_slopes.json");
    write_text_file(csv_path, csv.str());
    write_json_file(slopes_path, {{"pirk2", json_real(s2)}, {"pirk4", json_real(s4)}, {"error_component", "x"}});

    std::ostringstream r;
    r << "epsilon " << eps << ", T " << T << ", " << deltas.size() << " macro steps\n";
    r << "fitted log-log slopes: PIRK2 " << s2 << ", PIRK4 " << s4 << "\n";
    return finish("pi-errors", cfg, nullptr, {csv_path, slopes_path}, join_path(out_dir, "pi_errors_manifest.json"),
                  start, r.str());
}

CommandResult cmd_stability(const json& config, const std::string& out_dir) {
    const auto start = Clock::now();
    const json cfg = merge_config(stability_defaults(), config);
    const double xmax = cfg.at("x_max").get<double>();
    const int samples = cfg.at("samples").get<int>();
    if (!(xmax > 0.0)) throw ConfigError("x_max", "range must be positive");
    if (samples < 2) throw ConfigError("samples", "need at least two samples");
    const double rstar = stability_threshold();
    const std::vector<std::pair<std::string, double>> ratios{
        {"G_r_p1_9", 1.0 / 9}, {"G_r_p2_9", 2.0 / 9}, {"G_r_p3_9", 3.0 / 9},
        {"G_r_m1_9", -1.0 / 9}, {"G_r_m2_9", -2.0 / 9}, {"G_r_m3_9", -3.0 / 9}};
    std::ostringstream csv;
    csv << "lambda_dt";
    for (const auto& [name, r] : ratios) csv << ',' << name;
    csv << '\n';
    for (double x : linspace(-xmax, xmax, samples)) {
        csv << fmt_real(x);
        for (const auto& [name, r] : ratios) csv << ',' << fmt_real(growth_factor(x, r));
        csv << '\n';
    }
    const std::string path = join_path(out_dir, "stability.csv");
    write_text_file(path, csv.str());

    std::ostringstream rep;
    rep.precision(12);
    rep << "stability threshold r* = " << rstar << "\n";
    for (double r : {1.0 / 9, 2.0 / 9, 3.0 / 9}) {
        rep << "forward r = " << r << ": sup over fast modes |G| = " << sup_growth(r) << "\n";
    }
    rep.precision(6);
    for (const auto& [name, r] : ratios) {
        rep << name << ":";
        for (double x : {-20.0, -5.0, -1.0, 0.0, 1.0, 5.0, 20.0}) rep << " G(" << x << ")=" << growth_factor(x, r);
        rep << "\n";
    }
    return finish("stability", cfg, nullptr, {path}, join_path(out_dir, "stability_manifest.json"), start,
                  rep.str(), {{"r_star", rstar}});
}

namespace {

json load_config_file(const std::string& path) {
    if (path.empty()) return nullptr;
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config", std::string("invalid JSON: ") + e.what());
    }
}

json parse_value(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return text;
    }
}

std::vector<double> parse_list(const std::string& text, const std::string& field) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        try {
            std::size_t used = 0;
            v.push_back(std::stod(item, &used));
            if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ConfigError(field, "not a number: '" + item + "'");
        }
    }
    return v;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Equation-free multiscale toolkit: patch dynamics, projective integration, homogenisation"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::string out_dir = "eqfree_out";
    std::string config_path;
    app.add_option("--out", out_dir, "output directory (overridden by $" + std::string(kOutDirEnv) + ")");
    app.add_option("--config", config_path, "JSON configuration (or a run manifest) layered over the defaults");

    json flags = json::object();
    std::function<CommandResult(const json&, const std::string&)> command;
    json defaults;

    // simulate
    auto* sim = app.add_subcommand("simulate", "run an example and write trajectory, plot script and manifest");
    std::string sim_example;
    std::uint64_t sim_seed = 0;
    double sim_tend = 0.0;
    int sim_samples = 0;
    std::vector<std::string> sim_set;
    auto* o_example = sim->add_option("example", sim_example, "example name");
    auto* o_seed = sim->add_option("--seed", sim_seed, "noise seed");
    auto* o_tend = sim->add_option("--t-end", sim_tend, "end time (example override t_end)");
    auto* o_samples = sim->add_option("--samples", sim_samples, "number of output samples");
    sim->add_option("--set", sim_set, "example override key=value (value parsed as JSON)");
    sim->callback([&] {
        command = cmd_simulate;
        defaults = simulate_defaults();
        if (o_example->count()) flags["example"] = sim_example;
        if (o_seed->count()) flags["seed"] = sim_seed;
        if (o_samples->count()) flags["samples"] = sim_samples;
        json ov = json::object();
        for (const auto& kv : sim_set) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos || eq == 0) throw ConfigError("set", "expected key=value, got '" + kv + "'");
            ov[kv.substr(0, eq)] = parse_value(kv.substr(eq + 1));
        }
        if (o_tend->count()) ov["t_end"] = sim_tend;
        if (!ov.empty()) flags["overrides"] = ov;
    });

    // spectrum
    auto* spec = app.add_subcommand("spectrum", "eigen-spectrum of a patch scheme about the zero state");
    std::string sp_example;
    int sp_ord = 0, sp_N = 0, sp_n = 0;
    double sp_r = 0.0;
    bool sp_norm = false;
    auto* o_sp_ex = spec->add_option("--example", sp_example, "'diffusion' (default) or a 1D patch example");
    auto* o_ord = spec->add_option("--ordCC", sp_ord, "coupling order (0 spectral, -1 staggered)");
    auto* o_N = spec->add_option("--nPatch,-N", sp_N, "number of patches");
    auto* o_r = spec->add_option("--ratio,-r", sp_r, "patch scale ratio");
    auto* o_n = spec->add_option("--nSubP", sp_n, "micro points per patch");
    auto* o_norm = spec->add_flag("--normalise", sp_norm, "harmonically normalise heterogeneous coefficients");
    spec->callback([&] {
        command = cmd_spectrum;
        defaults = spectrum_defaults();
        if (o_sp_ex->count()) flags["example"] = sp_example;
        if (o_ord->count()) flags["ordCC"] = sp_ord;
        if (o_N->count()) flags["nPatch"] = sp_N;
        if (o_r->count()) flags["ratio"] = sp_r;
        if (o_n->count()) flags["nSubP"] = sp_n;
        if (o_norm->count()) flags["normalise"] = sp_norm;
    });

    // homogenise
    auto* hom = app.add_subcommand("homogenise", "homogenised coefficients of a period-two lattice");
    double ha = 0.0, hb = 0.0;
    auto* o_a = hom->add_option("--a", ha, "first bond coefficient");
    auto* o_b = hom->add_option("--b", hb, "second bond coefficient");
    hom->callback([&] {
        command = cmd_homogenise;
        defaults = homogenise_defaults();
        if (o_a->count()) flags["a"] = ha;
        if (o_b->count()) flags["b"] = hb;
    });

    // pi-errors
    auto* pie = app.add_subcommand("pi-errors", "projective integration error sweep over macro steps");
    double pe_eps = 0.0, pe_T = 0.0, pe_factor = 0.0;
    std::string pe_deltas, pe_bursts, pe_rule;
    auto* o_eps = pie->add_option("--epsilon", pe_eps, "fast time scale");
    auto* o_T = pie->add_option("--T", pe_T, "end time");
    auto* o_deltas = pie->add_option("--deltas", pe_deltas, "comma-separated macro steps (may be empty)");
    auto* o_bursts = pie->add_option("--burst-lengths", pe_bursts, "comma-separated burst lengths, one per step");
    auto* o_factor = pie->add_option("--burst-factor", pe_factor, "burst length as a multiple of the minimum");
    auto* o_rule = pie->add_option("--derivative", pe_rule, "slow derivative rule: exact or least_squares");
    pie->callback([&] {
        command = cmd_pi_errors;
        defaults = pi_errors_defaults();
        if (o_eps->count()) flags["epsilon"] = pe_eps;
        if (o_T->count()) flags["T"] = pe_T;
        if (o_deltas->count()) flags["deltas"] = parse_list(pe_deltas, "deltas");
        if (o_bursts->count()) flags["burst_lengths"] = parse_list(pe_bursts, "burst_lengths");
        if (o_factor->count()) flags["burst_factor"] = pe_factor;
        if (o_rule->count()) flags["derivative"] = pe_rule;
    });

    // stability
    auto* stab = app.add_subcommand("stability", "projective-integration stability threshold and growth curves");
    double st_x = 0.0;
    int st_n = 0;
    auto* o_x = stab->add_option("--x-max", st_x, "half-width of the lambda*Delta range");
    auto* o_sn = stab->add_option("--samples", st_n, "number of curve samples");
    stab->callback([&] {
        command = cmd_stability;
        defaults = stability_defaults();
        if (o_x->count()) flags["x_max"] = st_x;
        if (o_sn->count()) flags["samples"] = st_n;
    });

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e, out, err);
            return code == 0 ? 0 : 2;
        }
        json cfg = merge_config(defaults, load_config_file(config_path));
        cfg = merge_config(cfg, flags);
        const CommandResult res = command(cfg, resolve_out_dir(out_dir));
        out << res.report;
        for (const auto& f : res.files) out << "wrote " << f << "\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "configuration error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace eqfree::cli
