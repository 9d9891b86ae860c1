#include "eqfree/homog.hpp"

#include <algorithm>
#include <cmath>
#include <utility>
#include <string>

#include <Eigen/Eigenvalues>

namespace eqfree {

namespace {

void check_positive(double a, double b) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ConfigError("a", "diffusivity must be positive");
    if (!(b > 0.0) || !std::isfinite(b)) throw ConfigError("b", "diffusivity must be positive");
}

}  // namespace

HeteroLattice::HeteroLattice(std::vector<double> values) : c(std::move(values)) {
    if (c.empty()) throw ConfigError("cDiff", "need at least one diffusivity");
    for (double v : c) {
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError("cDiff", "diffusivities must be positive");
    }
}

double HeteroLattice::c_homo() const {
    // Period two uses the closed form so it agrees bit-for-bit with effective_diffusivity.
    if (c.size() == 2) return effective_diffusivity(c[0], c[1]);
    double s = 0.0;
    for (double v : c) s += 1.0 / v;
    return static_cast<double>(c.size()) / s;
}

HeteroLattice HeteroLattice::normalised() const {
    const double h = c_homo();
    std::vector<double> out(c);
    for (double& v : out) v /= h;
    return HeteroLattice(std::move(out));
}

double effective_diffusivity(double a, double b) {
    check_positive(a, b);
    return 2.0 * a * b / (a + b);
}

double fourth_order_coefficient(double a, double b) {
    check_positive(a, b);
    const double abar = 0.5 * (a + b);
    const double ahat = 0.5 * (a - b);
    const double ah2 = ahat * ahat;
    return abar / 12.0 + ah2 / (6.0 * abar) - ah2 * ah2 / (4.0 * abar * abar * abar);
}

double bloch_slow_eigenvalue(double a, double b, double k) {
    check_positive(a, b);
    const double disc = a * a + b * b + 2.0 * a * b * std::cos(2.0 * k);
    return -(a + b) + std::sqrt(std::max(disc, 0.0));
}

std::array<std::complex<double>, 2> bloch_eigenvalues(double a, double b, double k) {
    check_positive(a, b);
    const std::complex<double> e = std::polar(1.0, k);
    Eigen::Matrix2cd M;
    M << -(a + b), a * e + b * std::conj(e), b * e + a * std::conj(e), -(a + b);
    Eigen::ComplexEigenSolver<Eigen::Matrix2cd> es(M, false);
    return {es.eigenvalues()[0], es.eigenvalues()[1]};
}

double slow_manifold_coefficient(double a, double b) {
    check_positive(a, b);
    return (a - b) / (2.0 * (a + b));
}

CellTransferMap cell_transfer_matrix(double a, double b) {
    check_positive(a, b);
    // u2 = ((a+b)·u1 − b·u0)/a and u3 = ((a+b)·u2 − a·u1)/b; divisions are
    // applied last so integer-valued cases come out exact.
    CellTransferMap m;
    const double s = a + b;
    m.T[0][0] = -b / a;
    m.T[0][1] = s / a;
    m.T[1][0] = (s * -b) / (a * b);
    m.T[1][1] = (s * s - a * a) / (a * b);
    return m;
}

double robin_boundary_coefficient(double a, double b, BoundaryOrientation orient) {
    check_positive(a, b);
    if (orient == BoundaryOrientation::AAdjacent) std::swap(a, b);
    return (b - a) / (2.0 * (a + b));
}

double one_patch_diffusivity_formula(int n, double a, double b) {
    if (n < 1) throw ConfigError("n", "need n >= 1");
    check_positive(a, b);
    const double s = a + b;
    if (n % 2 == 0) return 2.0 * a * b / s;
    const double dd = (a - b) / n;
    return 2.0 * a * b * s / (s * s - dd * dd);
}

Mat one_patch_matrix(int n, double a, double b, double d, bool scaled) {
    if (n < 1) throw ConfigError("n", "need n >= 1");
    check_positive(a, b);
    if (!(d > 0.0) || !(n * d < 1.0)) throw ConfigError("d", "need 0 < d < 1/n");
    const int m = 2 * n - 1;                  // interior points j = −(n−1)..(n−1)
    auto bond = [a, b](int j) { return (j % 2 == 0) ? b : a; };  // bond j → j+1
    const double edge = 1.0 - static_cast<double>(n) * n * d * d;
    const double s = scaled ? 1.0 / (d * d) : 1.0;
    Mat A = Mat::Zero(m, m);
    auto col = [n](int j) { return j + n - 1; };
    for (int j = -(n - 1); j <= n - 1; ++j) {
        const int r = col(j);
        const double cr = bond(j), cl = bond(j - 1);
        A(r, r) -= s * (cr + cl);
        // Edge neighbours are slaved to the centre value u_0.
        if (j + 1 == n) A(r, col(0)) += s * cr * edge; else A(r, col(j + 1)) += s * cr;
        if (j - 1 == -n) A(r, col(0)) += s * cl * edge; else A(r, col(j - 1)) += s * cl;
    }
    return A;
}

double one_patch_diffusivity_numeric(int n, double a, double b, double d) {
    const Mat A = one_patch_matrix(n, a, b, d, true);
    Eigen::EigenSolver<Mat> es(A, false);
    if (es.info() != Eigen::Success) throw NumericError("one_patch_diffusivity_numeric: eigen solve failed");
    const auto ev = es.eigenvalues();
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i) {
        if (std::abs(ev[i]) < std::abs(ev[best])) best = i;
    }
    return -ev[best].real() / 2.0;
}

HolisticClosure holistic_closure(double cH) {
    HolisticClosure hc;
    hc.cH = cH;
    const double q = 0.5 * cH;
    if (std::abs(q) < 1e-3) {
        const double q2 = q * q;
        hc.nu1 = 1.0 + q2 / 3.0 - q2 * q2 / 45.0;
    } else {
        hc.nu1 = q / std::tanh(q);
    }
    return hc;
}

std::array<double, 3> HolisticClosure::stencil(double H) const {
    const double c = cH / H;
    // −c·(U_{j+1} − U_{j−1})/(2H) + ν1·(U_{j+1} − 2U_j + U_{j−1})/H².
    return {c / (2.0 * H) + nu1 / (H * H), -2.0 * nu1 / (H * H), -c / (2.0 * H) + nu1 / (H * H)};
}

double holistic_subpatch_field(double xi, double cH, double mu_delta_U, double delta2_U) {
    double shape;
    if (std::abs(cH) < 2e-3) {
        const double x2 = xi * xi;
        shape = x2 / 2.0 + cH * (xi * x2 / 6.0 - xi / 6.0) +
                cH * cH * (x2 * x2 / 24.0 - x2 / 24.0) +
                cH * cH * cH * (x2 * x2 * xi / 120.0 - x2 * xi / 72.0 + xi / 180.0);
    } else {
        const double q = 0.5 * cH;
        const double sh = std::sinh(q);
        shape = std::expm1(cH * xi) / (4.0 * sh * sh) - std::cosh(q) / (2.0 * sh) * xi;
    }
    return shape * delta2_U + xi * mu_delta_U;
}

}  // namespace eqfree
