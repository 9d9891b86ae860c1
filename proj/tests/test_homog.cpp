#include <doctest.h>

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "eqfree/homog.hpp"

using namespace eqfree;

namespace {

std::vector<std::pair<double, double>> random_pairs(int count, unsigned seed) {
    std::mt19937_64 gen(seed);
    std::uniform_real_distribution<double> U(0.2, 5.0);
    std::vector<std::pair<double, double>> v;
    for (int k = 0; k < count; ++k) {
        const double a = U(gen);
        v.emplace_back(a, U(gen));
    }
    return v;
}

/// Residual of the two-field micro equations on the sub-lattice fields
/// u1,2 = U ± s·U_x with U = cos(kx), against ∂t u = D ∂xx(U ± s·U_x).
double manifold_residual(double a, double b, double s, double k) {
    const double D = effective_diffusivity(a, b);
    auto U = [k](double x) { return std::cos(k * x); };
    auto Ux = [k](double x) { return -k * std::sin(k * x); };
    auto Uxx = [k](double x) { return -k * k * std::cos(k * x); };
    auto Uxxx = [k](double x) { return k * k * k * std::sin(k * x); };
    auto u1 = [&](double x) { return U(x) + s * Ux(x); };
    auto u2 = [&](double x) { return U(x) - s * Ux(x); };
    double worst = 0.0;
    for (double x : {0.0, 0.3, 1.1, 2.0, 4.7}) {
        const double r1 = a * (u2(x + 1) - u1(x)) + b * (u2(x - 1) - u1(x)) - D * (Uxx(x) + s * Uxxx(x));
        const double r2 = b * (u1(x + 1) - u2(x)) + a * (u1(x - 1) - u2(x)) - D * (Uxx(x) - s * Uxxx(x));
        worst = std::max({worst, std::abs(r1), std::abs(r2)});
    }
    return worst;
}

}  // namespace

TEST_CASE("effective diffusivity and lattice harmonic mean") {
    CHECK(effective_diffusivity(1.0, 3.0) == 1.5);
    CHECK(effective_diffusivity(2.5, 2.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_THROWS(effective_diffusivity(0.0, 1.0));
    CHECK_THROWS(effective_diffusivity(1.0, -2.0));
    for (const auto& [a, b] : random_pairs(20, 1)) {
        CHECK(HeteroLattice({a, b}).c_homo() == effective_diffusivity(a, b));
    }
    const HeteroLattice h({5.887, 21.52, 0.35924});
    CHECK(h.period() == 3);
    CHECK(h.c_homo() == doctest::Approx(3.0 / (1 / 5.887 + 1 / 21.52 + 1 / 0.35924)).epsilon(1e-14));
    CHECK(h.normalised().c_homo() == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(HeteroLattice({1.0, 0.0}), ConfigError);
}

TEST_CASE("fourth-order coefficient") {
    CHECK(fourth_order_coefficient(1.0, 3.0) == doctest::Approx(0.21875).epsilon(1e-14));
    CHECK(fourth_order_coefficient(0.6, 0.6) == doctest::Approx(0.05).epsilon(1e-14));
    for (const auto& [a, b] : random_pairs(10, 2)) {
        CHECK(fourth_order_coefficient(a, b) == doctest::Approx(fourth_order_coefficient(b, a)).epsilon(1e-14));
    }
}

TEST_CASE("Bloch eigenvalues") {
    CHECK(bloch_slow_eigenvalue(1.0, 3.0, 0.0) == doctest::Approx(0.0));
    const auto ev = bloch_eigenvalues(1.0, 3.0, 0.0);
    const double fast = std::min(ev[0].real(), ev[1].real());
    CHECK(fast == doctest::Approx(-8.0).epsilon(1e-14));
    for (const auto& [a, b] : random_pairs(10, 3)) {
        // Curvature at k = 0 by a Richardson-extrapolated second difference.
        auto S = [&](double h) {
            return (bloch_slow_eigenvalue(a, b, h) - 2 * bloch_slow_eigenvalue(a, b, 0) +
                    bloch_slow_eigenvalue(a, b, -h)) / (h * h);
        };
        const double curv = (4.0 * S(5e-3) - S(1e-2)) / 3.0;
        CHECK(-curv / 2.0 == doctest::Approx(effective_diffusivity(a, b)).epsilon(1e-8));
        // The closed-form slow branch agrees with the 2x2 matrix eigenvalue.
        for (double k : {0.3, 1.0, 2.0}) {
            const auto m = bloch_eigenvalues(a, b, k);
            const double slow = std::abs(m[0]) < std::abs(m[1]) ? m[0].real() : m[1].real();
            CHECK(bloch_slow_eigenvalue(a, b, k) == doctest::Approx(slow).epsilon(1e-12));
        }
    }
}

TEST_CASE("slow-manifold coefficient and its residual oracle") {
    CHECK(slow_manifold_coefficient(1.0, 3.0) == -0.25);
    CHECK(slow_manifold_coefficient(2.0, 2.0) == 0.0);
    for (const auto& [a, b] : random_pairs(5, 4)) {
        const double s = slow_manifold_coefficient(a, b);
        const double r1 = manifold_residual(a, b, s, 0.02), r2 = manifold_residual(a, b, s, 0.01);
        CHECK(r1 / r2 > 7.0);  // residual O(k^3)
        if (std::abs(a - b) > 0.5) {
            const double w1 = manifold_residual(a, b, -s, 0.02), w2 = manifold_residual(a, b, -s, 0.01);
            CHECK(w1 / w2 < 5.0);  // the wrong sign leaves an O(k^2) residual
        }
    }
}

TEST_CASE("cell transfer matrix") {
    const CellTransferMap T = cell_transfer_matrix(1.0, 3.0);
    CHECK(T.T[0][0] == -3.0);
    CHECK(T.T[0][1] == 4.0);
    CHECK(T.T[1][0] == -4.0);
    CHECK(T.T[1][1] == 5.0);
    const CellTransferMap S = cell_transfer_matrix(0.7, 0.7);
    CHECK(S.T[0][0] == doctest::Approx(-1.0));
    CHECK(S.T[0][1] == doctest::Approx(2.0));
    CHECK(S.T[1][0] == doctest::Approx(-2.0));
    CHECK(S.T[1][1] == doctest::Approx(3.0));
    for (const auto& [a, b] : random_pairs(20, 5)) {
        const CellTransferMap M = cell_transfer_matrix(a, b);
        CHECK(M.det() == doctest::Approx(1.0).epsilon(1e-12));
        // Oracle: steady eliminations u2 = ((a+b)u1 − b u0)/a, u3 = ((a+b)u2 − a u1)/b.
        const double u0 = 0.3, u1 = -1.1;
        const double u2 = ((a + b) * u1 - b * u0) / a, u3 = ((a + b) * u2 - a * u1) / b;
        CHECK(M.T[0][0] * u0 + M.T[0][1] * u1 == doctest::Approx(u2).epsilon(1e-12));
        CHECK(M.T[1][0] * u0 + M.T[1][1] * u1 == doctest::Approx(u3).epsilon(1e-12));
    }
    CHECK_THROWS(cell_transfer_matrix(-1.0, 1.0));
}

TEST_CASE("Robin boundary coefficient") {
    CHECK(robin_boundary_coefficient(1.0, 3.0) == 0.25);
    CHECK(robin_boundary_coefficient(1.3, 1.3) == 0.0);
    CHECK(robin_boundary_coefficient(1.0, 3.0, BoundaryOrientation::AAdjacent) == -0.25);
    for (const auto& [a, b] : random_pairs(20, 6)) {
        CHECK(robin_boundary_coefficient(a, b) == -slow_manifold_coefficient(a, b));
        const double bb = b;
        // Elimination oracle with a = 1: linear macroscale field whose cell
        // averages match the lattice pairs, then drop u1.
        auto field = [bb](double u0, double u1) {
            const double u2 = ((1 + bb) * u1 - bb * u0);
            const double u3 = ((1 + bb) * u2 - u1) / bb;
            const double Ux = ((u2 + u3) - (u0 + u1)) / 4.0;
            return std::pair{(u0 + u1) / 2.0 - 0.5 * Ux, Ux};
        };
        const auto [c0, d0] = field(1.0, 0.0);
        const auto [c1, d1] = field(0.0, 1.0);
        const double theta = -c1 / d1;
        CHECK(theta == doctest::Approx(robin_boundary_coefficient(1.0, bb)).epsilon(1e-12));
        CHECK(c0 + theta * d0 == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("one-patch diffusivity formulas") {
    CHECK(one_patch_diffusivity_formula(1, 1.0, 3.0) == doctest::Approx(2.0));
    CHECK(one_patch_diffusivity_formula(2, 1.0, 3.0) == doctest::Approx(1.5));
    CHECK(one_patch_diffusivity_formula(3, 1.0, 3.0) == doctest::Approx(54.0 / 35.0).epsilon(1e-14));
    CHECK(one_patch_diffusivity_formula(3, 1.0, 3.0) ==
          doctest::Approx(4.5 * 3.0 * 4.0 / (2.0 + 15.0 + 18.0)).epsilon(1e-14));
    for (int n : {2, 4, 6, 8}) CHECK(one_patch_diffusivity_formula(n, 0.4, 2.2) == doctest::Approx(effective_diffusivity(0.4, 2.2)));
    CHECK_THROWS_AS(one_patch_diffusivity_formula(0, 1.0, 3.0), ConfigError);
}

TEST_CASE("one-patch numeric diffusivity") {
    CHECK(std::abs(one_patch_diffusivity_numeric(2, 1.0, 3.0, 1e-3) - 1.5) < 1e-4);
    CHECK(std::abs(one_patch_diffusivity_numeric(1, 1.0, 3.0, 1e-3) - 2.0) < 1e-5);
    for (const auto& [a, b] : random_pairs(20, 7)) {
        for (int n = 1; n <= 8; ++n) {
            const double num = one_patch_diffusivity_numeric(n, a, b, 1e-3);
            CHECK(std::abs(num / one_patch_diffusivity_formula(n, a, b) - 1.0) < 1e-3);
        }
    }
    CHECK_THROWS_AS(one_patch_matrix(4, 1.0, 3.0, 0.3), ConfigError);
}

TEST_CASE("one-patch n = 2 characteristic polynomial") {
    for (const auto& [a, b] : random_pairs(5, 8)) {
        const double d = 0.05;
        const Mat M = one_patch_matrix(2, a, b, d, false);
        REQUIRE(M.rows() == 3);
        Eigen::EigenSolver<Mat> es(M);
        const double disc = (a + b) * (a + b) - 8 * a * b * d * d;
        std::vector<double> expect{-(a + b), -(a + b) + std::sqrt(disc), -(a + b) - std::sqrt(disc)};
        std::vector<double> got;
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(es.eigenvalues()[k].imag()) < 1e-12);
            got.push_back(es.eigenvalues()[k].real());
        }
        std::sort(expect.begin(), expect.end());
        std::sort(got.begin(), got.end());
        for (int k = 0; k < 3; ++k) CHECK(got[k] == doctest::Approx(expect[k]).epsilon(1e-10));
    }
}

TEST_CASE("holistic closure") {
    CHECK(holistic_closure(0.0).nu1 == 1.0);
    CHECK(holistic_closure(1e-9).nu1 == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(holistic_closure(5.0).nu1 == doctest::Approx(2.5 / std::tanh(2.5)).epsilon(1e-14));
    CHECK(holistic_closure(5.0).nu1 == doctest::Approx(2.53392).epsilon(1e-5));
    for (double c : {1e-4, 0.3, 2.0, 7.0}) CHECK(holistic_closure(-c).nu1 == holistic_closure(c).nu1);
    // Both sides of the series switch agree with an extended-precision closed form.
    for (double c : {1.999e-3, 2.001e-3, 1e-5}) {
        const long double q = 0.5L * c;
        CHECK(holistic_closure(c).nu1 == doctest::Approx(static_cast<double>(q / std::tanh(q))).epsilon(1e-15));
    }
    const auto w = holistic_closure(2.0).stencil(0.5);
    CHECK(w[0] + w[1] + w[2] == doctest::Approx(0.0));
}

TEST_CASE("holistic sub-patch field") {
    for (double c : {0.0, 1e-3, 1.0, 4.0}) CHECK(holistic_subpatch_field(0.0, c, 0.7, -1.3) == 0.0);
    CHECK(holistic_subpatch_field(1.0, 0.0, 0.0, 2.0) == doctest::Approx(1.0));
    // Both sides of the small-cH switch agree with an extended-precision closed form.
    for (double c : {1.99e-3, 2.01e-3, 1e-4}) {
        for (double x : {-0.9, 0.35, 1.0}) {
            const long double q = 0.5L * c, sh = std::sinh(q);
            const long double ref = std::expm1(static_cast<long double>(c) * x) / (4 * sh * sh) -
                                    std::cosh(q) / (2 * sh) * x;
            CHECK(holistic_subpatch_field(x, c, 0.0, 1.0) == doctest::Approx(static_cast<double>(ref)).epsilon(1e-11));
        }
    }
    for (double c : {1.0, -0.5, 3.0}) {
        const double mu = 0.4, d2 = -0.9;
        auto v = [&](double x) { return holistic_subpatch_field(x, c, mu, d2); };
        // Neighbour centres at γ-order one: v(±1) = U_{j±1} − U_j.
        CHECK(v(1.0) - v(-1.0) == doctest::Approx(2.0 * mu).epsilon(1e-12));
        CHECK(v(1.0) + v(-1.0) == doctest::Approx(d2).epsilon(1e-12));
        // v'' − cH v' is uniform in ξ and equals −cH μδU + ν1 δ²U.
        const double h = 1e-3;
        const double target = -c * mu + holistic_closure(c).nu1 * d2;
        for (double x : {-0.8, -0.2, 0.0, 0.5, 0.9}) {
            const double vxx = (v(x + h) - 2 * v(x) + v(x - h)) / (h * h);
            const double vx = (v(x + h) - v(x - h)) / (2 * h);
            CHECK(vxx - c * vx == doctest::Approx(target).epsilon(1e-5));
        }
    }
}
