#include <catch2/catch_amalgamated.hpp>

#include "strata/geometry.hpp"
#include "strata/grid.hpp"
#include "testutil.hpp"

using namespace strata;

TEST_CASE("layer stack validation") {
    SECTION("benchmark geometry builds") {
        auto s = testutil::benchmark_stack(0.5);
        REQUIRE(s.num_layers() == 3);
        REQUIRE(s.permeabilities[1] == 0.5);
        REQUIRE(s.layer_of(-3.5) == 0);
        REQUIRE(s.layer_of(-3.0) == 1);  // interfaces belong to the layer above
        REQUIRE(s.layer_of(-1.0) == 2);
        REQUIRE(s.layer_of(-0.5) == 2);
    }
    SECTION("single homogeneous layer") {
        auto s = build_layer_stack(1.0, 1.0, {}, {1.0}, {1.0}, std::nullopt, 0.0);
        REQUIRE(s.num_layers() == 1);
    }
    SECTION("non-monotone interfaces rejected") {
        REQUIRE_THROWS_AS(build_layer_stack(1.0, 4.0, {-1.0, -3.0}, {1, 1, 1},
                                            {1, 1, 1}, std::nullopt, 0.0),
                          std::invalid_argument);
    }
    SECTION("negative permeability rejected") {
        REQUIRE_THROWS_AS(build_layer_stack(1.0, 4.0, {-2.0}, {1.0, -1.0},
                                            {1.0, 1.0}, std::nullopt, 0.0),
                          std::invalid_argument);
    }
    SECTION("non-positive diffusivity rejected") {
        REQUIRE_THROWS_AS(build_layer_stack(1.0, 4.0, {-2.0}, {1.0, 1.0},
                                            {1.0, 0.0}, std::nullopt, 0.0),
                          std::invalid_argument);
    }
    SECTION("zero permeability without degenerate marking rejected") {
        REQUIRE_THROWS_AS(build_layer_stack(1.0, 4.0, {-2.0}, {1.0, 0.0},
                                            {1.0, 1.0}, std::nullopt, 0.0),
                          std::invalid_argument);
    }
}

TEST_CASE("max_delta formula") {
    // min(min D / (8 c_delta max K), depth / 4), max K at eps = 1
    auto s1 = build_layer_stack(1.0, 4.0, {-2.0}, {4.0, 1.0}, {1.0, 2.0},
                                std::nullopt, 0.0);
    REQUIRE(max_delta(s1, 2.0) == Catch::Approx(1.0 / 64.0).epsilon(1e-14));

    auto s2 = build_layer_stack(1.0, 100.0, {-50.0}, {1.0, 1.0}, {1.0, 1.0},
                                std::nullopt, 0.0);
    REQUIRE(max_delta(s2, 1.0) == Catch::Approx(0.125).epsilon(1e-14));

    SECTION("zero jump returns the cap") {
        REQUIRE(max_delta(s1, 0.0) == Catch::Approx(1.0).epsilon(1e-14));
    }
    SECTION("monotonicity") {
        testutil::Rng rng(11);
        for (int t = 0; t < 50; ++t) {
            const double kmax = 0.5 + 4.0 * rng.uniform();
            const double dmin = 0.5 + 2.0 * rng.uniform();
            const double c1 = 0.1 + rng.uniform();
            const double c2 = c1 + rng.uniform();
            auto mk = [&](double kk, double dd) {
                return build_layer_stack(1.0, 4.0, {-2.0}, {kk, kk}, {dd, dd},
                                         std::nullopt, 0.0);
            };
            REQUIRE(max_delta(mk(kmax, dmin), c2) <= max_delta(mk(kmax, dmin), c1));
            REQUIRE(max_delta(mk(kmax + 1.0, dmin), c1) <= max_delta(mk(kmax, dmin), c1));
            REQUIRE(max_delta(mk(kmax, dmin + 1.0), c1) >= max_delta(mk(kmax, dmin), c1));
        }
    }
}

TEST_CASE("background profile") {
    auto stack = testutil::benchmark_stack(0.5);
    auto grid = make_grid(stack, std::vector<int>{16, 32, 16}, 8);

    SECTION("zero jump gives a constant profile") {
        auto p = build_background_profile(stack, 5.0, 5.0, 0.25, grid->z());
        for (std::size_t j = 0; j < p.z.size(); ++j) {
            REQUIRE(p.value[j] == 5.0);
            REQUIRE(p.slope[j] == 0.0);
            REQUIRE(p.curvature[j] == 0.0);
        }
    }

    SECTION("plateau value and boundary values") {
        const double delta = max_delta(stack, 2.0) / 2.0;
        auto p = build_background_profile(stack, -1.0, 1.0, delta, grid->z());
        REQUIRE(p.value.back() == -1.0);
        REQUIRE(p.value.front() == 1.0);
        // mid-depth lies on the plateau
        for (std::size_t j = 0; j < p.z.size(); ++j)
            if (std::abs(p.z[j] + 2.0) < 1e-12) REQUIRE(p.value[j] == 0.0);
    }

    SECTION("derivative bounds attained with equality") {
        // delta = 0.1 with a grid node exactly at each strip midpoint
        const double cd = 1.0;
        auto s = build_layer_stack(2 * M_PI, 4.0, {-3.0, -1.0}, {1, 1, 1}, {1, 1, 1},
                                   std::nullopt, 0.0);
        auto g = make_grid(s, std::vector<int>{20, 40, 20}, 8);  // dz = 0.05
        auto p = build_background_profile(s, 0.5, -0.5, 0.1, g->z());
        double mslope = 0.0, mcurv = 0.0;
        for (std::size_t j = 0; j < p.z.size(); ++j) {
            mslope = std::max(mslope, std::abs(p.slope[j]));
            mcurv = std::max(mcurv, std::abs(p.curvature[j]));
        }
        REQUIRE(mslope == Catch::Approx(cd / 0.1).epsilon(1e-12));
        REQUIRE(mcurv == Catch::Approx(2.0 * cd / 0.01).epsilon(1e-12));
    }

    SECTION("bounds hold at every node for any admissible input") {
        testutil::Rng rng(5);
        for (int t = 0; t < 20; ++t) {
            const double ct = rng.sym(), cb = rng.sym();
            const double cd = std::abs(ct - cb);
            const double dmax =
                std::min(max_delta(stack, cd), 0.5 * 1.0);  // outer thickness 1
            const double delta = dmax * (0.2 + 0.8 * rng.uniform());
            if (!(delta > 0.0)) continue;
            auto p = build_background_profile(stack, ct, cb, delta, grid->z());
            for (std::size_t j = 0; j < p.z.size(); ++j) {
                REQUIRE(std::abs(p.slope[j]) <= cd / delta * (1 + 1e-12));
                REQUIRE(std::abs(p.curvature[j]) <= 2 * cd / (delta * delta) * (1 + 1e-12));
            }
            // plateau is exactly constant
            for (std::size_t j = 0; j < p.z.size(); ++j)
                if (p.z[j] > -4.0 + delta + 1e-12 && p.z[j] < -delta - 1e-12) {
                    REQUIRE(p.value[j] == 0.5 * (ct + cb));
                    REQUIRE(p.slope[j] == 0.0);
                    REQUIRE(p.curvature[j] == 0.0);
                }
        }
    }

    SECTION("inadmissible delta rejected") {
        REQUIRE_THROWS_AS(
            build_background_profile(stack, -1.0, 1.0,
                                     max_delta(stack, 2.0) * 1.5, grid->z()),
            std::invalid_argument);
        // exceeds half the outermost layer thickness (0.5) even though the
        // zero-jump bound is the depth/4 cap
        REQUIRE_THROWS_AS(build_background_profile(stack, 1.0, 1.0, 0.75, grid->z()),
                          std::invalid_argument);
    }
}

TEST_CASE("grid construction") {
    auto stack = testutil::benchmark_stack(0.0);
    auto grid = make_grid(stack, std::vector<int>{8, 16, 8}, 16);
    REQUIRE(grid->nz() == 33);
    REQUIRE(grid->z().front() == -4.0);
    REQUIRE(grid->z().back() == 0.0);
    REQUIRE(grid->interface_nodes().size() == 2);
    REQUIRE(grid->z()[grid->interface_nodes()[0]] == -3.0);
    REQUIRE(grid->z()[grid->interface_nodes()[1]] == -1.0);
    // membership: interface nodes belong to the layer above
    REQUIRE(grid->node_layer()[grid->interface_nodes()[0]] == 1);
    REQUIRE(grid->node_layer()[grid->interface_nodes()[1]] == 2);
    REQUIRE_THROWS_AS(make_grid(stack, std::vector<int>{8, 16, 8}, 15),
                      std::invalid_argument);
}
