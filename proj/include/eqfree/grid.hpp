#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include <json.hpp>

#include "eqfree/coupling_spec.hpp"
#include "eqfree/errors.hpp"

namespace eqfree {

/// One-dimensional periodic array of equispaced patches.
///
/// Patch j (0-based) is centred at X_j = xlo + (j + 1/2)·H and holds n micro
/// points x(i, j) = X_j + dx·(i − (n−1)/2), i = 0..n−1, so that the centre
/// point i = (n−1)/2 sits exactly on X_j and x(n−1, j) − x(0, j) = 2rH.
struct PatchGrid1D {
    double xlo = 0.0;
    double xhi = 1.0;
    int nPatch = 1;       ///< N
    double ratio = 1.0;   ///< r = h/H, patch half-width over patch spacing
    int nSubP = 3;        ///< n, odd
    double H = 1.0;       ///< patch spacing (domain length / N)
    double dx = 0.5;      ///< micro spacing 2rH/(n−1)
    bool periodic = true; ///< macroscale periodicity (always true for now)
    std::vector<double> X;  ///< N patch centres
    Mat x;                  ///< n×N micro coordinates

    /// Index of the centre micro point, (n−1)/2.
    int centre() const noexcept { return (nSubP - 1) / 2; }
    double length() const noexcept { return xhi - xlo; }
    /// Total number of micro points n·N.
    std::size_t size() const noexcept {
        return static_cast<std::size_t>(nSubP) * static_cast<std::size_t>(nPatch);
    }
};

/// Two-dimensional periodic array of patches, built direction by direction.
///
/// A micro field is stored flat with index i + nx·(j + ny·(k + Nx·l)) for
/// micro-x index i, micro-y index j, patch-x index k and patch-y index l.
struct PatchGrid2D {
    PatchGrid1D gx;  ///< x-direction geometry (x array is nx×Nx)
    PatchGrid1D gy;  ///< y-direction geometry (y array is ny×Ny)

    int nx() const noexcept { return gx.nSubP; }
    int ny() const noexcept { return gy.nSubP; }
    int Nx() const noexcept { return gx.nPatch; }
    int Ny() const noexcept { return gy.nPatch; }
    const Mat& x() const noexcept { return gx.x; }
    const Mat& y() const noexcept { return gy.x; }

    std::size_t index(int i, int j, int k, int l) const noexcept {
        return static_cast<std::size_t>(i) +
               static_cast<std::size_t>(nx()) *
                   (static_cast<std::size_t>(j) +
                    static_cast<std::size_t>(ny()) *
                        (static_cast<std::size_t>(k) +
                         static_cast<std::size_t>(Nx()) * static_cast<std::size_t>(l)));
    }
    std::size_t size() const noexcept { return gx.size() * gy.size(); }
};

/// Grid plus coupling rule, as returned by the configuration functions.
struct PatchConfig1D {
    PatchGrid1D grid;
    CouplingSpec coupling;
};

struct PatchConfig2D {
    PatchGrid2D grid;
    CouplingSpec coupling;
};

/// Parity masks of a staggered 1D patch grid.
///
/// Point (i, j) (0-based) carries the h-field when (i + j) is even and the
/// u-field otherwise; the masks are stored flat with index i + n·j.
struct StaggeredTags {
    int nSubP = 0;
    int nPatch = 0;
    std::vector<std::uint8_t> h_mask;
    std::vector<std::uint8_t> u_mask;

    bool is_h(int i, int j) const noexcept {
        return h_mask[static_cast<std::size_t>(i) + static_cast<std::size_t>(nSubP) * j] != 0;
    }
    bool is_u(int i, int j) const noexcept { return !is_h(i, j); }
};

/// Build a validated 1D patch grid and its coupling rule.
///
/// @throws ConfigError naming the offending field (xlim, nPatch, ordCC, ratio,
///         nSubP) when a precondition fails.
PatchConfig1D config_patches_1d(std::pair<double, double> xlim, int nPatch, int ordCC,
                                double ratio, int nSubP, double gamma = 1.0);

/// Build a validated 2D patch grid; each direction is validated as in 1D.
///
/// Staggered coupling (ordCC = −1) is not available in two dimensions.
PatchConfig2D config_patches_2d(std::pair<double, double> xlim, std::pair<double, double> ylim,
                                std::pair<int, int> nPatch, int ordCC,
                                std::pair<double, double> ratio, std::pair<int, int> nSubP,
                                double gamma = 1.0);

/// Scalar-broadcast convenience overload: the same value in both directions.
PatchConfig2D config_patches_2d(std::pair<double, double> xlim, std::pair<double, double> ylim,
                                int nPatch, int ordCC, double ratio, int nSubP,
                                double gamma = 1.0);

/// Parity masks for a 1D grid.
StaggeredTags staggered_tags(const PatchGrid1D& grid);

void to_json(nlohmann::json& j, const PatchGrid1D& g);
void to_json(nlohmann::json& j, const PatchGrid2D& g);
void to_json(nlohmann::json& j, const CouplingSpec& c);

}  // namespace eqfree
