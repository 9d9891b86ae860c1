#include <doctest.h>

#include <cmath>
#include <numbers>

#include "eqfree/grid.hpp"

using namespace eqfree;

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string field_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const ConfigError& e) {
        return e.field();
    }
    return "";
}
}  // namespace

TEST_CASE("1D configuration of the Burgers demo") {
    const auto cfg = config_patches_1d({0.0, kTwoPi}, 8, 0, 0.2, 7);
    const auto& g = cfg.grid;
    CHECK(g.H == doctest::Approx(kTwoPi / 8).epsilon(1e-15));
    CHECK(g.dx == doctest::Approx(2 * 0.2 * g.H / 6).epsilon(1e-15));
    CHECK(cfg.coupling.mode == CouplingMode::Spectral);
    CHECK(g.x.rows() == 7);
    CHECK(g.x.cols() == 8);
    for (int j = 0; j < 8; ++j) {
        CHECK(g.X[j] == doctest::Approx((j + 0.5) * g.H).epsilon(1e-15));
        CHECK(g.x(6, j) - g.x(0, j) == doctest::Approx(2 * 0.2 * g.H).epsilon(1e-13));
    }
}

TEST_CASE("single abutting patch spanning the cell") {
    const auto cfg = config_patches_1d({0.0, 1.0}, 1, 2, 1.0, 3);
    const auto& g = cfg.grid;
    CHECK(g.H == 1.0);
    CHECK(g.X[0] == 0.5);
    CHECK(g.x(0, 0) == doctest::Approx(-0.5));
    CHECK(g.x(1, 0) == doctest::Approx(0.5));
    CHECK(g.x(2, 0) == doctest::Approx(1.5));
    CHECK(cfg.coupling.mode == CouplingMode::Polynomial);
    CHECK(cfg.coupling.order == 2);
}

TEST_CASE("nine equispaced patch centres") {
    const auto g = config_patches_1d({0.0, kTwoPi}, 9, 0, 0.2, 7).grid;
    for (int j = 1; j < 9; ++j) CHECK(g.X[j] - g.X[j - 1] == doctest::Approx(kTwoPi / 9).epsilon(1e-14));
}

TEST_CASE("configuration errors name the offending field") {
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 0, 0.2, 6); }) == "nSubP");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 0, 0.2, 1); }) == "nSubP");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 0, 0.0, 5); }) == "ratio");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 0, -0.1, 5); }) == "ratio");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 0, 1.5, 5); }) == "ratio");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 3, 0.2, 5); }) == "ordCC");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 4, 10, 0.2, 5); }) == "ordCC");
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 0, 0, 0.2, 5); }) == "nPatch");
    CHECK(field_of([] { config_patches_1d({1.0, 1.0}, 4, 0, 0.2, 5); }) == "xlim");
    // Staggered grids need an even number of patches.
    CHECK(field_of([] { config_patches_1d({0.0, 1.0}, 7, -1, 0.2, 11); }) == "nPatch");
    CHECK(field_of([] { config_patches_2d({0.0, 1.0}, {0.0, 1.0}, 4, 0, 0.2, 4); }) == "nSubP.x");
}

TEST_CASE("grid invariants over many configurations") {
    for (int N : {1, 2, 3, 8, 9, 16}) {
        for (int n : {3, 5, 7, 11}) {
            for (double r : {0.1, 0.2, 0.5, 1.0}) {
                const auto g = config_patches_1d({-1.0, 2.0}, N, 0, r, n).grid;
                const auto g2 = config_patches_1d({-1.0, 2.0}, 2 * N, 0, r, n).grid;
                for (int j = 0; j < N; ++j) {
                    CHECK(g.x(g.centre(), j) == g.X[j]);  // bit-for-bit
                    for (int i = 1; i < n; ++i) CHECK(g.x(i, j) > g.x(i - 1, j));
                    if (r < 0.5 && j + 1 < N) CHECK(g.x(n - 1, j) < g.x(0, j + 1));
                }
                CHECK(std::abs(g2.H / g.H - 0.5) < 1e-12);
                CHECK(std::abs(g2.dx / g.dx - 0.5) < 1e-12);
            }
        }
    }
}

TEST_CASE("2D demo configuration and scalar broadcast") {
    const auto cfg = config_patches_2d({-3.0, 3.0}, {-2.0, 2.0}, {9, 7}, 0, {0.4, 0.4}, {5, 5});
    const auto& g = cfg.grid;
    CHECK(g.Nx() == 9);
    CHECK(g.Ny() == 7);
    CHECK(g.nx() == 5);
    CHECK(g.ny() == 5);
    CHECK(g.x().rows() == 5);
    CHECK(g.x().cols() == 9);
    CHECK(g.y().cols() == 7);
    CHECK(g.size() == 9u * 7u * 25u);
    CHECK(g.index(1, 2, 3, 4) == 1 + 5 * (2 + 5 * (3 + 9 * 4)));

    const auto sq = config_patches_2d({0.0, 1.0}, {0.0, 1.0}, 6, 0, 0.3, 5).grid;
    CHECK(sq.Nx() == 6);
    CHECK(sq.Ny() == 6);
    CHECK(sq.gx.ratio == sq.gy.ratio);
    CHECK((sq.x() - sq.y()).norm() == 0.0);
}

TEST_CASE("2D configuration rejects staggered coupling") {
    CHECK_THROWS_AS(config_patches_2d({0.0, 1.0}, {0.0, 1.0}, 4, -1, 0.2, 11), ConfigError);
}

TEST_CASE("staggered parity masks") {
    SUBCASE("demo configuration follows the (i + j) parity pattern") {
        const auto g = config_patches_1d({0.0, kTwoPi}, 8, -1, 0.2, 11).grid;
        const StaggeredTags t = staggered_tags(g);
        std::size_t nh = 0, nu = 0;
        for (int j = 0; j < 8; ++j) {
            for (int i = 0; i < 11; ++i) {
                CHECK(t.is_h(i, j) == ((i + j) % 2 == 0));
                CHECK(t.is_h(i, j) != t.is_u(i, j));
                nh += t.is_h(i, j);
                nu += t.is_u(i, j);
            }
            // The centre point carries h exactly on odd patches.
            CHECK(t.is_h(g.centre(), j) == (j % 2 == 1));
        }
        CHECK(nh + nu == 88u);
    }
    SUBCASE("three points, two patches: explicit partition") {
        PatchGrid1D g;
        g.nSubP = 3;
        g.nPatch = 2;
        const StaggeredTags t = staggered_tags(g);
        // patch 0: h u h ; patch 1: u h u
        const bool expect_h[2][3] = {{true, false, true}, {false, true, false}};
        for (int j = 0; j < 2; ++j)
            for (int i = 0; i < 3; ++i) CHECK(t.is_h(i, j) == expect_h[j][i]);
    }
}

TEST_CASE("grid JSON records the named fields") {
    const auto cfg = config_patches_1d({0.0, kTwoPi}, 8, 4, 0.2, 7);
    nlohmann::json j;
    to_json(j, cfg.grid);
    CHECK(j.at("nPatch") == 8);
    CHECK(j.at("nSubP") == 7);
    CHECK(j.at("ratio").get<double>() == 0.2);
    CHECK(j.at("X").size() == 8);
    nlohmann::json c;
    to_json(c, cfg.coupling);
    CHECK(c.at("ordCC") == 4);
}
