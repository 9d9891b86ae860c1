#pragma once

#include <array>
#include <complex>
#include <vector>

#include "eqfree/errors.hpp"

namespace eqfree {

/// Periodic microscale diffusivity sequence c_1..c_m (bond i joins points i, i+1).
struct HeteroLattice {
    std::vector<double> c;

    /// @throws ConfigError unless the sequence is non-empty and positive.
    explicit HeteroLattice(std::vector<double> values);

    int period() const noexcept { return static_cast<int>(c.size()); }
    /// Harmonic mean m / Σ 1/c_i.
    double c_homo() const;
    /// Copy rescaled so that c_homo() == 1.
    HeteroLattice normalised() const;
};

/// Steady-state map (u0, u1) ↦ (u2, u3) across one period-two cell.
struct CellTransferMap {
    std::array<std::array<double, 2>, 2> T{};
    double det() const noexcept { return T[0][0] * T[1][1] - T[0][1] * T[1][0]; }
};

/// Which diffusivity sits on the bond touching the boundary point u0.
enum class BoundaryOrientation { BAdjacent, AAdjacent };

/// Effective (homogenised) diffusivity 2ab/(a+b) of the period-two lattice.
double effective_diffusivity(double a, double b);

/// Coefficient c4 of U_xxxx in the homogenised PDE U_t = D U_xx + c4 U_xxxx.
double fourth_order_coefficient(double a, double b);

/// Eigenvalue branch through 0 of the period-two lattice at wavenumber k
/// (k per micro spacing): −(a+b) + sqrt(a² + b² + 2ab·cos 2k).
double bloch_slow_eigenvalue(double a, double b, double k);

/// Both eigenvalues of the 2×2 Bloch matrix, computed from the matrix itself.
std::array<std::complex<double>, 2> bloch_eigenvalues(double a, double b, double k);

/// Slow-manifold gradient coefficient s1 = (a−b)/(2(a+b)): u_{1,2} ≈ U ± s1·U_x.
double slow_manifold_coefficient(double a, double b);

/// Steady-state transfer matrix of one cell with bond b then bond a.
CellTransferMap cell_transfer_matrix(double a, double b);

/// Robin coefficient θ in U + θ·U_x = u0 at a boundary point.
///
/// BAdjacent (default): θ = (b−a)/(2(a+b)); AAdjacent swaps a and b.
double robin_boundary_coefficient(double a, double b,
                                  BoundaryOrientation orient = BoundaryOrientation::BAdjacent);

/// Effective diffusivity of the one-patch scheme with n micro intervals per half patch.
double one_patch_diffusivity_formula(int n, double a, double b);

/// Interior matrix of the one-patch scheme on points −n..n with spacing d.
///
/// The bond from point j to j+1 has diffusivity b for even j and a for odd j;
/// the edges are slaved by u_{±n} = (1 − n²d²)·u_0.  Unless `scaled`, the
/// 1/d² factor is omitted.
Mat one_patch_matrix(int n, double a, double b, double d, bool scaled = true);

/// −λ_small/2 for the scaled one-patch matrix; λ_small has the smallest magnitude.
double one_patch_diffusivity_numeric(int n, double a, double b, double d);

/// Holistic closure of u_t = −c·u_x + u_xx on abutting patches.
struct HolisticClosure {
    double cH = 0.0;
    double nu1 = 1.0;  ///< (cH/2)·coth(cH/2)

    /// Weights on (U_{j−1}, U_j, U_{j+1}) of dU_j/dt = −c·μδU_j/H + ν1·δ²U_j/H²,
    /// with advection speed c = cH/H.
    std::array<double, 3> stencil(double H) const;
};

/// Holistic closure for the grid Péclet number cH; removable singularity at 0.
HolisticClosure holistic_closure(double cH);

/// Sub-patch field v(ξ) − U_j of the holistic closure at ξ ∈ [−1, 1].
double holistic_subpatch_field(double xi, double cH, double mu_delta_U, double delta2_U);

}  // namespace eqfree
