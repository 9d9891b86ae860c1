#pragma once

#include <string>
#include <vector>

#include "eqfree/coupling_spec.hpp"
#include "eqfree/errors.hpp"
#include "eqfree/grid.hpp"

namespace eqfree {

/// Centre-value weights giving a patch's edge values.
///
/// Entry q of `plus` (q = 0..2p) multiplies U_{j+q−p} in the edge value at
/// offset +rH from X_j; `minus` likewise for −rH.  `plus_terms[k]` holds the
/// coefficient of γ^k alone, so that plus = Σ_k γ^k·plus_terms[k].
struct StencilWeights {
    double r = 0.0;
    int p = 1;
    double gamma = 1.0;
    std::vector<double> plus;
    std::vector<double> minus;
    std::vector<std::vector<double>> plus_terms;
    std::vector<std::vector<double>> minus_terms;

    /// Weight on centre offset `off` ∈ [−p, p] for the +r edge.
    double plus_at(int off) const { return plus[static_cast<std::size_t>(off + p)]; }
    double minus_at(int off) const { return minus[static_cast<std::size_t>(off + p)]; }
};

/// Left (−rH) and right (+rH) edge values, one entry per patch.
struct EdgeValues {
    Vec left;
    Vec right;
};

/// Interpolation weights for edge values at offsets ±r (in units of H).
///
/// Expands E_γ^{±r} = 1 + Σ_{k=1..p} γ^k·r·∏_{j<k}(r²−j²)·(±μδ^{2k−1}/(2k−1)!
/// + r·δ^{2k}/(2k)!) as a Laurent polynomial in the shift E.  Results are
/// cached per (r, p, γ); the cache is thread safe.
///
/// @throws ConfigError if p ∉ [1, 4], r ∉ [0, 1] or γ ∉ [0, 1].
const StencilWeights& stencil_weights(double r, int p, double gamma = 1.0);

/// Polynomial-coupling edge values with periodic wrap of the centre sequence.
///
/// @throws ConfigError if there are fewer than 2p patches.
EdgeValues edge_values_polynomial(const Vec& U, const PatchGrid1D& grid, const CouplingSpec& spec);

/// Spectral-coupling edge values: Fourier shift of the centres by ±rH.
EdgeValues edge_values_spectral(const Vec& U, const PatchGrid1D& grid);

/// Staggered-grid edge values.
///
/// Edges of each patch are interpolated spectrally from the centre
/// subsequence of the opposite-index-parity patches (spacing 2H).
///
/// @throws ConfigError if nPatch is odd.
EdgeValues edge_values_staggered(const Vec& U, const PatchGrid1D& grid, const StaggeredTags& tags);

/// Dispatch on the coupling mode (staggered mode derives the parity masks).
EdgeValues edge_values(const Vec& U, const PatchGrid1D& grid, const CouplingSpec& spec);

/// Trigonometric-interpolation shift of a periodic sequence.
///
/// Returns v with v_j = u(j + s), where u is the balanced-wavenumber
/// trigonometric interpolant of `seq` (Nyquist mode treated as a cosine).
Vec spectral_shift(const Vec& seq, double s);

/// CSV listing of the weights (columns: offset, minus, plus).
std::string stencil_weights_csv(const StencilWeights& w);

}  // namespace eqfree
