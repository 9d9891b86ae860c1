#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eqfree/errors.hpp"
#include "eqfree/patchdyn.hpp"
#include "eqfree/projective.hpp"

namespace eqfree {

/// Eigenvalues with residual certificates and a slow/fast cluster split.
struct Spectrum {
    /// Sorted by descending real part (ties by descending imaginary part).
    std::vector<std::complex<double>> eigenvalues;
    /// ‖Av − λv‖/‖v‖ with v the computed eigenvector, for every pair.
    std::vector<double> residuals;
    /// Same quantity with v from inverse iteration; NaN where not sampled.
    std::vector<double> certificates;
    /// true for members of the slow (macroscale) cluster.
    std::vector<bool> slow;
    double norm = 0.0;        ///< ‖A‖₁
    std::size_t n_slow = 0;   ///< size of the slow cluster
    /// min |Re λ| over the fast cluster divided by max nonzero |Re λ| over
    /// the slow cluster; NaN when no split exists.
    double gap = std::numeric_limits<double>::quiet_NaN();

    std::vector<std::complex<double>> slow_eigenvalues() const;
    std::vector<std::complex<double>> fast_eigenvalues() const;
    /// Fast eigenvalue with the smallest |Re λ| (the "leading" sub-patch mode).
    std::complex<double> fast_leader() const;
};

/// Central-difference Jacobian of f at u0, column by column.
///
/// @param h step; h ≤ 0 selects sqrt(machine ε)·max(1, |u0_i|) per column.
/// @throws NumericError (index = column) if f returns non-finite values.
Mat fd_jacobian(const std::function<Vec(const Vec&)>& f, const Vec& u0, double h = 0.0);

/// All eigenvalues of a dense real matrix.
///
/// Uses Eigen's real Schur decomposition (Hessenberg reduction plus shifted
/// QR).  Residuals are computed for every pair; inverse-iteration
/// certificates for `certify` sampled pairs (−1: all when n ≤ 64, otherwise
/// the slow cluster plus the extremes and the pairs around the split).
///
/// @throws NumericError if the QR iteration does not converge.
Spectrum eig_dense(const Mat& A, int certify = -1);

/// Map between full patch states and the reduced state of interior points.
Vec reduce_state(const Vec& u, const PatchProblem1D& prob);
Vec expand_state(const Vec& v, const PatchProblem1D& prob);

/// Jacobian of the coupled patch system on interior points at u_star
/// (edges slaved through the coupling).
///
/// @param h finite-difference step; ≤ 0 selects 1e−4·max(1, ‖u_star‖∞).
Mat patch_jacobian(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u_star, double h = 0.0);

/// Spectrum of patch_jacobian, split into macro and sub-patch clusters.
Spectrum patch_spectrum(const PatchProblem1D& prob, const MicroRHS1D& rhs, const Vec& u_star,
                        double h = 0.0);

/// Macro state to macro state map.
using MacroMap = std::function<Vec(const Vec&)>;

/// Lift with a fixed cache, burst bT from t0, restrict the burst end and
/// optionally step it back by bT along the estimated slow derivative.
MacroMap macro_map(const LiftRestrict& lr, const Vec& cache, const BurstFn& burst, double bT,
                   bool backproject, const DerivativeRule& derivative = {}, double t0 = 0.0);

struct NewtonOptions {
    int max_iter = 50;
    double tol = 1e-9;     ///< converged when ‖F(U) − U‖ < tol·(1 + ‖U‖)
    double fd_step = 0.0;  ///< passed to fd_jacobian
};

/// Fixed point of a macro map and the spectrum of dF/dU there.
struct Equilibrium {
    Vec U;
    Spectrum stability;
    int iterations = 0;
    double residual = 0.0;
};

/// Newton failure; carries the last iterate.
class NewtonFailure : public NumericError {
public:
    NewtonFailure(const std::string& what, Vec last, int iters)
        : NumericError(what, std::numeric_limits<double>::quiet_NaN(), static_cast<std::size_t>(iters)),
          last_(std::move(last)) {}
    const Vec& last_iterate() const noexcept { return last_; }

private:
    Vec last_;
};

/// Damped Newton iteration on F(U) − U = 0.
///
/// @throws NewtonFailure after max_iter iterations without convergence.
Equilibrium macro_equilibrium(const MacroMap& F, const Vec& U0, const NewtonOptions& opts = {});

/// CSV (re, im, residual, certificate, cluster) and JSON gap report.
std::string spectrum_csv(const Spectrum& s);
nlohmann::json spectrum_report(const Spectrum& s);

}  // namespace eqfree
