#include "eqfree/grid.hpp"

#include <cmath>
#include <string>

namespace eqfree {

CouplingSpec CouplingSpec::from_ordCC(int ordCC, double gamma) {
    if (!(gamma >= 0.0 && gamma <= 1.0)) {
        throw ConfigError("gamma", "coupling strength must lie in [0,1], got " +
                                       std::to_string(gamma));
    }
    CouplingSpec spec;
    spec.gamma = gamma;
    switch (ordCC) {
    case 0: spec.mode = CouplingMode::Spectral; break;
    case -1: spec.mode = CouplingMode::Staggered; break;
    case 2:
    case 4:
    case 6:
    case 8:
        spec.mode = CouplingMode::Polynomial;
        spec.order = ordCC;
        break;
    default:
        throw ConfigError("ordCC", "unknown coupling order " + std::to_string(ordCC) +
                                       " (expected 0, 2, 4, 6, 8 or -1)");
    }
    return spec;
}

namespace {

PatchGrid1D make_grid(const std::string& axis, std::pair<double, double> lim, int nPatch,
                      double ratio, int nSubP) {
    const std::string sfx = axis.empty() ? "" : "." + axis;
    if (!std::isfinite(lim.first) || !std::isfinite(lim.second) || !(lim.second > lim.first)) {
        throw ConfigError((axis == "y" ? "ylim" : "xlim"),
                          "domain limits must be finite with lo < hi");
    }
    if (nPatch < 1) {
        throw ConfigError("nPatch" + sfx, "need at least one patch, got " + std::to_string(nPatch));
    }
    if (!(ratio > 0.0 && ratio <= 1.0)) {
        throw ConfigError("ratio" + sfx, "patch ratio must lie in (0,1], got " + std::to_string(ratio));
    }
    if (nSubP < 3 || nSubP % 2 == 0) {
        throw ConfigError("nSubP" + sfx,
                          "micro points per patch must be odd and at least 3, got " +
                              std::to_string(nSubP));
    }

    PatchGrid1D g;
    g.xlo = lim.first;
    g.xhi = lim.second;
    g.nPatch = nPatch;
    g.ratio = ratio;
    g.nSubP = nSubP;
    g.H = (g.xhi - g.xlo) / nPatch;
    g.dx = 2.0 * ratio * g.H / (nSubP - 1);
    g.X.resize(static_cast<std::size_t>(nPatch));
    g.x.resize(nSubP, nPatch);
    const int c = g.centre();
    for (int j = 0; j < nPatch; ++j) {
        g.X[j] = g.xlo + (j + 0.5) * g.H;
        for (int i = 0; i < nSubP; ++i) {
            // i == c gives offset 0 so the centre reproduces X_j bit-for-bit.
            g.x(i, j) = g.X[j] + g.dx * static_cast<double>(i - c);
        }
    }
    return g;
}

}  // namespace

PatchConfig1D config_patches_1d(std::pair<double, double> xlim, int nPatch, int ordCC,
                                double ratio, int nSubP, double gamma) {
    PatchConfig1D cfg;
    cfg.coupling = CouplingSpec::from_ordCC(ordCC, gamma);
    cfg.grid = make_grid("", xlim, nPatch, ratio, nSubP);
    if (cfg.coupling.mode == CouplingMode::Staggered) {
        if (nPatch % 2 != 0) {
            throw ConfigError("nPatch", "staggered coupling needs an even number of patches");
        }
        if ((nSubP - 1) / 2 % 2 == 0) {
            throw ConfigError("nSubP", "staggered coupling needs (nSubP-1)/2 odd so that patch "
                                       "centres and edges carry opposite fields");
        }
    }
    return cfg;
}

PatchConfig2D config_patches_2d(std::pair<double, double> xlim, std::pair<double, double> ylim,
                                std::pair<int, int> nPatch, int ordCC,
                                std::pair<double, double> ratio, std::pair<int, int> nSubP,
                                double gamma) {
    PatchConfig2D cfg;
    cfg.coupling = CouplingSpec::from_ordCC(ordCC, gamma);
    if (cfg.coupling.mode == CouplingMode::Staggered) {
        throw ConfigError("ordCC", "staggered coupling is only available in one dimension");
    }
    cfg.grid.gx = make_grid("x", xlim, nPatch.first, ratio.first, nSubP.first);
    cfg.grid.gy = make_grid("y", ylim, nPatch.second, ratio.second, nSubP.second);
    return cfg;
}

PatchConfig2D config_patches_2d(std::pair<double, double> xlim, std::pair<double, double> ylim,
                                int nPatch, int ordCC, double ratio, int nSubP, double gamma) {
    return config_patches_2d(xlim, ylim, {nPatch, nPatch}, ordCC, {ratio, ratio},
                             {nSubP, nSubP}, gamma);
}

StaggeredTags staggered_tags(const PatchGrid1D& grid) {
    StaggeredTags t;
    t.nSubP = grid.nSubP;
    t.nPatch = grid.nPatch;
    t.h_mask.assign(grid.size(), 0);
    t.u_mask.assign(grid.size(), 0);
    for (int j = 0; j < grid.nPatch; ++j) {
        for (int i = 0; i < grid.nSubP; ++i) {
            const std::size_t q = static_cast<std::size_t>(i) + static_cast<std::size_t>(grid.nSubP) * j;
            const bool h = (i + j) % 2 == 0;
            t.h_mask[q] = h ? 1 : 0;
            t.u_mask[q] = h ? 0 : 1;
        }
    }
    return t;
}

void to_json(nlohmann::json& j, const PatchGrid1D& g) {
    std::vector<std::vector<double>> x(static_cast<std::size_t>(g.nPatch));
    for (int p = 0; p < g.nPatch; ++p) {
        x[p].resize(static_cast<std::size_t>(g.nSubP));
        for (int i = 0; i < g.nSubP; ++i) x[p][i] = g.x(i, p);
    }
    j = nlohmann::json{{"xlim", {g.xlo, g.xhi}}, {"nPatch", g.nPatch}, {"ratio", g.ratio},
                       {"nSubP", g.nSubP},       {"H", g.H},           {"dx", g.dx},
                       {"periodic", g.periodic}, {"X", g.X},           {"x", x}};
}

void to_json(nlohmann::json& j, const PatchGrid2D& g) {
    nlohmann::json jx, jy;
    to_json(jx, g.gx);
    to_json(jy, g.gy);
    j = nlohmann::json{{"x", jx}, {"y", jy}, {"layout", "i + nx*(j + ny*(k + Nx*l))"}};
}

void to_json(nlohmann::json& j, const CouplingSpec& c) {
    const char* mode = c.mode == CouplingMode::Polynomial ? "polynomial"
                       : c.mode == CouplingMode::Spectral ? "spectral"
                                                          : "staggered";
    j = nlohmann::json{{"mode", mode}, {"order", c.order}, {"ordCC", c.ordCC()}, {"gamma", c.gamma}};
}

}  // namespace eqfree
