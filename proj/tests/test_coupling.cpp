#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "eqfree/coupling.hpp"
#include "eqfree/grid.hpp"

using namespace eqfree;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Lagrange basis through integer offsets −p..p evaluated at s.
double lagrange(int p, int off, double s) {
    double w = 1.0;
    for (int m = -p; m <= p; ++m)
        if (m != off) w *= (s - m) / static_cast<double>(off - m);
    return w;
}
}  // namespace

TEST_CASE("stencil weights: documented examples") {
    const auto& id = stencil_weights(0.0, 1, 1.0);
    CHECK(id.plus_at(-1) == doctest::Approx(0.0));
    CHECK(id.plus_at(0) == doctest::Approx(1.0));
    CHECK(id.plus_at(1) == doctest::Approx(0.0));

    const auto& unit = stencil_weights(1.0, 1, 1.0);
    CHECK(unit.plus_at(-1) == doctest::Approx(0.0));
    CHECK(unit.plus_at(0) == doctest::Approx(0.0));
    CHECK(unit.plus_at(1) == doctest::Approx(1.0));

    const auto& w = stencil_weights(0.2, 1, 1.0);
    CHECK(w.plus_at(-1) == doctest::Approx(-0.08).epsilon(1e-14));
    CHECK(w.plus_at(0) == doctest::Approx(0.96).epsilon(1e-14));
    CHECK(w.plus_at(1) == doctest::Approx(0.12).epsilon(1e-14));
    // Minus weights mirror the plus weights.
    CHECK(w.minus_at(1) == doctest::Approx(-0.08).epsilon(1e-14));
    CHECK(w.minus_at(-1) == doctest::Approx(0.12).epsilon(1e-14));

    const auto& iso = stencil_weights(0.2, 1, 0.0);
    CHECK(iso.plus_at(-1) == 0.0);
    CHECK(iso.plus_at(0) == 1.0);
    CHECK(iso.plus_at(1) == 0.0);
}

TEST_CASE("stencil weights: invalid arguments") {
    CHECK_THROWS_AS(stencil_weights(0.2, 0, 1.0), ConfigError);
    CHECK_THROWS_AS(stencil_weights(0.2, 5, 1.0), ConfigError);
    CHECK_THROWS_AS(stencil_weights(0.2, 1, 1.5), ConfigError);
    CHECK_THROWS_AS(stencil_weights(-0.2, 1, 1.0), ConfigError);
}

TEST_CASE("stencil weights equal Lagrange interpolation and sum to one") {
    for (int p = 1; p <= 4; ++p) {
        for (double r : {0.05, 0.1, 0.2, 0.37, 0.5, 1.0}) {
            const auto& w = stencil_weights(r, p, 1.0);
            double sp = 0.0, sm = 0.0;
            for (int off = -p; off <= p; ++off) {
                CHECK(w.plus_at(off) == doctest::Approx(lagrange(p, off, r)).epsilon(1e-12));
                CHECK(w.minus_at(off) == doctest::Approx(lagrange(p, off, -r)).epsilon(1e-12));
                sp += w.plus_at(off);
                sm += w.minus_at(off);
            }
            CHECK(sp == doctest::Approx(1.0).epsilon(1e-14));
            CHECK(sm == doctest::Approx(1.0).epsilon(1e-14));
            // Partial coupling strengths still reproduce constants.
            const auto& wg = stencil_weights(r, p, 0.3);
            double sg = 0.0;
            for (int off = -p; off <= p; ++off) sg += wg.plus_at(off);
            CHECK(sg == doctest::Approx(1.0).epsilon(1e-14));
        }
    }
}

TEST_CASE("gamma ladder: the gamma^k term reaches only k patches") {
    for (int p = 1; p <= 4; ++p) {
        const double g = 0.6;
        const auto& w = stencil_weights(0.3, p, g);
        REQUIRE(w.plus_terms.size() == static_cast<std::size_t>(p + 1));
        for (int k = 0; k <= p; ++k) {
            for (int off = -p; off <= p; ++off) {
                if (std::abs(off) > k) {
                    CHECK(w.plus_terms[k][off + p] == 0.0);
                    CHECK(w.minus_terms[k][off + p] == 0.0);
                }
            }
        }
        CHECK(w.plus_terms[0][p] == 1.0);
        for (int off = -p; off <= p; ++off) {
            double sum = 0.0;
            for (int k = 0; k <= p; ++k) sum += std::pow(g, k) * w.plus_terms[k][off + p];
            CHECK(sum == doctest::Approx(w.plus_at(off)).epsilon(1e-13));
        }
    }
}

TEST_CASE("polynomial coupling: constants and exactness on polynomials") {
    const int N = 21;
    for (int p = 1; p <= 4; ++p) {
        const auto cfg = config_patches_1d({0.0, 1.0 * N}, N, 2 * p, 0.3, 5);
        const Vec c = Vec::Constant(N, 2.5);
        const EdgeValues ec = edge_values_polynomial(c, cfg.grid, cfg.coupling);
        CHECK((ec.left.array() - 2.5).abs().maxCoeff() < 1e-14);
        CHECK((ec.right.array() - 2.5).abs().maxCoeff() < 1e-14);
        for (int deg = 0; deg <= 2 * p; ++deg) {
            auto P = [deg](double s) { return std::pow((s - 9.7) / 10.0, deg); };
            Vec U(N);
            for (int j = 0; j < N; ++j) U[j] = P(j);
            const EdgeValues e = edge_values_polynomial(U, cfg.grid, cfg.coupling);
            for (int j = p; j < N - p; ++j) {
                CHECK(std::abs(e.right[j] - P(j + 0.3)) < 1e-10);
                CHECK(std::abs(e.left[j] - P(j - 0.3)) < 1e-10);
            }
        }
    }
}

TEST_CASE("polynomial coupling: fourth-order accuracy on cos X") {
    auto err = [](int N) {
        const auto cfg = config_patches_1d({0.0, kTwoPi}, N, 4, 0.1, 5);
        Vec U(N);
        for (int j = 0; j < N; ++j) U[j] = std::cos(cfg.grid.X[j]);
        const EdgeValues e = edge_values_polynomial(U, cfg.grid, cfg.coupling);
        double m = 0.0;
        for (int j = 0; j < N; ++j) {
            m = std::max(m, std::abs(e.right[j] - std::cos(cfg.grid.X[j] + 0.1 * cfg.grid.H)));
            m = std::max(m, std::abs(e.left[j] - std::cos(cfg.grid.X[j] - 0.1 * cfg.grid.H)));
        }
        return m;
    };
    const double e32 = err(32), e64 = err(64);
    CHECK(e32 < std::pow(kTwoPi / 32, 4));
    CHECK(e32 / e64 > 14.0);
}

TEST_CASE("polynomial coupling: too few patches") {
    const auto cfg = config_patches_1d({0.0, 1.0}, 3, 8, 0.2, 5);
    CHECK_THROWS_AS(edge_values_polynomial(Vec::Zero(3), cfg.grid, cfg.coupling), ConfigError);
    // Two patches per side of the stencil wrap onto one another but are allowed.
    const auto ok = config_patches_1d({0.0, 1.0}, 4, 4, 0.2, 5);
    CHECK_NOTHROW(edge_values_polynomial(Vec::Ones(4), ok.grid, ok.coupling));
}

TEST_CASE("spectral coupling: exact on resolvable modes") {
    for (int N : {4, 5, 8, 9, 16}) {
        const auto cfg = config_patches_1d({0.0, kTwoPi}, N, 0, 0.2, 5);
        const double s = 0.2 * cfg.grid.H;
        for (int m = 0; 2 * m < N; ++m) {
            Vec U(N);
            for (int j = 0; j < N; ++j) U[j] = std::cos(m * cfg.grid.X[j]) + 0.5 * std::sin(m * cfg.grid.X[j]);
            const EdgeValues e = edge_values_spectral(U, cfg.grid);
            for (int j = 0; j < N; ++j) {
                const double xr = cfg.grid.X[j] + s, xl = cfg.grid.X[j] - s;
                CHECK(std::abs(e.right[j] - (std::cos(m * xr) + 0.5 * std::sin(m * xr))) < 1e-12);
                CHECK(std::abs(e.left[j] - (std::cos(m * xl) + 0.5 * std::sin(m * xl))) < 1e-12);
            }
        }
    }
}

TEST_CASE("spectral coupling: unit shift is a cyclic permutation, constants stay constant") {
    const int N = 8;
    const auto cfg = config_patches_1d({0.0, kTwoPi}, N, 0, 1.0, 5);
    Vec U(N);
    for (int j = 0; j < N; ++j) U[j] = std::sin(3.0 * j) + 0.1 * j * j;
    const EdgeValues e = edge_values_spectral(U, cfg.grid);
    for (int j = 0; j < N; ++j) {
        CHECK(std::abs(e.right[j] - U[(j + 1) % N]) < 1e-12);
        CHECK(std::abs(e.left[j] - U[(j + N - 1) % N]) < 1e-12);
    }
    const EdgeValues c = edge_values_spectral(Vec::Constant(N, -1.25), cfg.grid);
    CHECK((c.right.array() + 1.25).abs().maxCoeff() < 1e-14);
}

TEST_CASE("spectral coupling commutes with cyclic rotation") {
    for (int N : {6, 7}) {
        const auto cfg = config_patches_1d({0.0, kTwoPi}, N, 0, 0.23, 5);
        Vec U(N);
        for (int j = 0; j < N; ++j) U[j] = std::exp(std::sin(1.7 * j)) - 0.3 * j;
        Vec R(N);
        for (int j = 0; j < N; ++j) R[j] = U[(j + 2) % N];
        const EdgeValues eu = edge_values_spectral(U, cfg.grid);
        const EdgeValues er = edge_values_spectral(R, cfg.grid);
        for (int j = 0; j < N; ++j) {
            CHECK(std::abs(er.right[j] - eu.right[(j + 2) % N]) < 1e-13);
            CHECK(std::abs(er.left[j] - eu.left[(j + 2) % N]) < 1e-13);
        }
    }
}

TEST_CASE("spectral shift keeps real data real including the Nyquist mode") {
    Vec seq(4);
    seq << 1.0, -1.0, 1.0, -1.0;  // pure Nyquist
    const Vec half = spectral_shift(seq, 0.5);
    CHECK(half.cwiseAbs().maxCoeff() < 1e-14);  // cos(pi/2) scaling
    const Vec whole = spectral_shift(seq, 1.0);
    CHECK((whole + seq).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("staggered coupling: constants and shifted sines") {
    const int N = 8, n = 11;
    const auto cfg = config_patches_1d({0.0, kTwoPi}, N, -1, 0.2, n);
    const StaggeredTags tags = staggered_tags(cfg.grid);
    SUBCASE("constant fields of each parity") {
        Vec U(N);
        for (int j = 0; j < N; ++j) U[j] = j % 2 == 1 ? 2.0 : -0.5;  // centre values: h on odd patches
        const EdgeValues e = edge_values_staggered(U, cfg.grid, tags);
        for (int j = 0; j < N; ++j) {
            // Edge points of patch j carry the field of parity j.
            const double expect = j % 2 == 0 ? 2.0 : -0.5;
            CHECK(std::abs(e.left[j] - expect) < 1e-14);
            CHECK(std::abs(e.right[j] - expect) < 1e-14);
        }
    }
    SUBCASE("a resolvable sine on each subsequence shifts exactly") {
        Vec U(N);
        auto h = [](double x) { return 1.0 + 0.5 * std::sin(x); };
        auto u = [](double x) { return 0.3 * std::cos(x + 0.2); };
        for (int j = 0; j < N; ++j) U[j] = j % 2 == 1 ? h(cfg.grid.X[j]) : u(cfg.grid.X[j]);
        const EdgeValues e = edge_values_staggered(U, cfg.grid, tags);
        const double s = 0.2 * cfg.grid.H;
        for (int j = 0; j < N; ++j) {
            auto f = [&](double x) { return j % 2 == 0 ? h(x) : u(x); };
            CHECK(std::abs(e.left[j] - f(cfg.grid.X[j] - s)) < 1e-10);
            CHECK(std::abs(e.right[j] - f(cfg.grid.X[j] + s)) < 1e-10);
        }
    }
    SUBCASE("odd patch counts are rejected") {
        const auto bad = config_patches_1d({0.0, kTwoPi}, 6, 0, 0.2, n);
        PatchGrid1D g = bad.grid;
        g.nPatch = 7;
        CHECK_THROWS_AS(edge_values_staggered(Vec::Zero(7), g, tags), ConfigError);
    }
}

TEST_CASE("dispatcher and CSV dump") {
    const auto cfg = config_patches_1d({0.0, kTwoPi}, 8, 2, 0.2, 5);
    Vec U(8);
    for (int j = 0; j < 8; ++j) U[j] = j;
    const EdgeValues a = edge_values(U, cfg.grid, cfg.coupling);
    const EdgeValues b = edge_values_polynomial(U, cfg.grid, cfg.coupling);
    CHECK((a.right - b.right).norm() == 0.0);
    const std::string csv = stencil_weights_csv(stencil_weights(0.2, 1));
    std::istringstream in(csv);
    std::string header;
    std::getline(in, header);
    CHECK(header == "offset,minus,plus");
    int rows = 0;
    for (std::string line; std::getline(in, line);) rows += !line.empty();
    CHECK(rows == 3);
}
