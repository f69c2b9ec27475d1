#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "strata/estimates.hpp"
#include "strata/transport.hpp"
#include "testutil.hpp"

using namespace strata;

namespace {

BackgroundProfile profile_for(const LayerStack& stack, const Grid& grid,
                              double ct, double cb, double delta) {
    return build_background_profile(stack, ct, cb, delta, grid.z());
}

}  // namespace

TEST_CASE("a-priori constants") {
    auto stack = build_layer_stack(2.0 * M_PI, 4.0, {-3.0, -1.0}, {1.0, 1.0, 1.0},
                                   {1.0, 1.0, 1.0}, std::nullopt, 0.0);
    auto grid = make_grid(stack, std::vector<int>{8, 16, 8}, 16);

    SECTION("flat boundary data zeroes the pumping constants") {
        auto prof = profile_for(stack, *grid, 2.0, 2.0, 0.25);
        auto c = compute_constants(stack, prof);
        REQUIRE(c.m1 == 0.0);
        REQUIRE(c.m2 == 0.0);
        REQUIRE(c.m3 == 0.0);
        REQUIRE(c.m4 == 16.0);  // the absolute constant times max K^4
        REQUIRE(std::isfinite(c.m5));
    }

    SECTION("printed formula value") {
        // c_delta = 1, L = 2 pi, delta = 0.1, D = 1: M1 = 8 * 2 pi / 0.1
        auto prof = profile_for(stack, *grid, 0.5, -0.5, 0.1);
        auto c = compute_constants(stack, prof);
        REQUIRE(c.m1 == Catch::Approx(160.0 * M_PI).epsilon(1e-13));
        REQUIRE(c.m2 == Catch::Approx(8.0 * 2.0 * M_PI / 1e-3).epsilon(1e-13));
        REQUIRE(c.m3 == Catch::Approx(8.0).epsilon(1e-13));
    }

    SECTION("doubling delta halves M1") {
        auto p1 = profile_for(stack, *grid, 0.5, -0.5, 0.05);
        auto p2 = profile_for(stack, *grid, 0.5, -0.5, 0.1);
        REQUIRE(compute_constants(stack, p1).m1 ==
                Catch::Approx(2.0 * compute_constants(stack, p2).m1).epsilon(1e-13));
    }

    SECTION("same inputs give identical outputs") {
        auto prof = profile_for(stack, *grid, 0.5, -0.5, 0.1);
        auto a = compute_constants(stack, prof, 16.0, 2.5);
        auto b = compute_constants(stack, prof, 16.0, 2.5);
        REQUIRE(a.m1 == b.m1);
        REQUIRE(a.m5_log == b.m5_log);
        REQUIRE(a.t1 == b.t1);
    }

    SECTION("absorbing entry time clamps at small data") {
        auto prof = profile_for(stack, *grid, 0.5, -0.5, 0.1);
        REQUIRE(compute_constants(stack, prof, 16.0, 0.5).t1 == 0.0);
        REQUIRE(compute_constants(stack, prof, 16.0, 1.0).t1 == 0.0);
        const double t1 = compute_constants(stack, prof, 16.0, std::exp(1.0)).t1;
        REQUIRE(t1 == Catch::Approx(2.0 * 16.0 / 1.0).epsilon(1e-13));
    }

    SECTION("degenerate layer enters the worst case at permeability one") {
        auto dstack = testutil::benchmark_stack(0.0);
        auto dgrid = make_grid(dstack, std::vector<int>{8, 16, 8}, 16);
        auto prof = profile_for(dstack, *dgrid, 0.5, -0.5, 0.05);
        REQUIRE(compute_constants(dstack, prof).m3 == Catch::Approx(8.0));
    }
}

TEST_CASE("weighted norms") {
    SECTION("zero field") {
        auto stack = testutil::benchmark_stack(0.5);
        auto grid = make_grid(stack, std::vector<int>{4, 8, 4}, 16);
        DiffusionOperator op(stack, grid);
        ModeCoefficients m(grid);
        REQUIRE(w_norm(op, m) == 0.0);
        REQUIRE(l_op_norm(op, m) == 0.0);
    }

    SECTION("single-layer eigenfunction ratio") {
        // psi = sin(m pi (z+H)/H), x-independent, D = 1:
        // ||psi||_W / ||L psi|| = (1 + mu) sqrt(1 + mu^2) / mu^2, mu = m pi/H
        auto stack = build_layer_stack(2.0 * M_PI, 4.0, {}, {1.0}, {1.0},
                                       std::nullopt, 0.0);
        auto grid = make_grid(stack, 256, 8);
        DiffusionOperator op(stack, grid);
        ScalarField f(grid, "psi");
        const double mu = 2.0 * M_PI / 4.0;
        for (int j = 0; j < grid->nz(); ++j)
            for (int i = 0; i < grid->nx(); ++i)
                f.at(j, i) = std::sin(mu * (grid->z()[j] + 4.0));
        auto m = to_modes(f);
        const double expect = (1.0 + mu) * std::sqrt(1.0 + mu * mu) / (mu * mu);
        REQUIRE(w_norm(op, m) / l_op_norm(op, m) ==
                Catch::Approx(expect).epsilon(2e-3));
    }

    SECTION("norm equivalence bracket, frozen regression") {
        // 100 deterministic smooth fields on a layered-diffusivity stack;
        // the empirical ratio band was measured once and is pinned here.
        auto stack = build_layer_stack(2.0 * M_PI, 4.0, {-3.0, -1.0},
                                       {1.0, 1.0, 1.0}, {1.0, 2.0, 0.5},
                                       std::nullopt, 0.0);
        auto grid = make_grid(stack, std::vector<int>{12, 24, 12}, 32);
        DiffusionOperator op(stack, grid);
        testutil::Rng rng(2024);
        const double c_lower = 1.25, c_upper = 1.51;
        for (int t = 0; t < 100; ++t) {
            auto f = testutil::random_field(grid, rng);
            auto m = to_modes(f);
            for (int n = 0; n < grid->num_modes(); ++n) {
                m.mode(n)[0] = 0.0;
                m.mode(n)[grid->nz() - 1] = 0.0;
            }
            const double r = w_norm(op, m) / l_op_norm(op, m);
            REQUIRE(r >= c_lower);
            REQUIRE(r <= c_upper);
        }
    }
}

TEST_CASE("trajectory inequality checks") {
    auto stack = testutil::benchmark_stack(0.1);
    auto grid = make_grid(stack, std::vector<int>{8, 16, 8}, 32);
    const double delta = max_delta(stack, 2.0) / 2.0;

    SECTION("zero trajectory passes trivially") {
        auto prof = profile_for(stack, *grid, -1.0, 1.0, delta);
        auto consts = compute_constants(stack, prof);
        std::vector<DiagnosticsRecord> recs(5);
        for (int i = 0; i < 5; ++i) {
            recs[i].time = 0.1 * i;
            recs[i].dt = 0.1;
        }
        auto rep = check_diagnostics(recs, consts, 0.1);
        REQUIRE(rep.all_pass);
        for (const auto& r : rep.results) REQUIRE(r.violation() == 0.0);
    }

    SECTION("pure diffusion run satisfies the step inequality with zero pump") {
        auto prof = profile_for(stack, *grid, 1.0, 1.0, delta);  // c_delta = 0
        SimConfig cfg;
        cfg.dt = 5e-4;
        cfg.t_end = 0.2;
        cfg.velocity_off = true;
        cfg.adaptive = false;
        cfg.cfl = 1e9;
        cfg.initial.preset = InitialCondition::Preset::Random;
        cfg.initial.seed = 12;
        auto traj = simulate(stack, prof, grid, cfg);
        REQUIRE_FALSE(traj.failed);
        auto consts = compute_constants(stack, prof, 16.0,
                                        traj.diagnostics.front().psi_l2);
        REQUIRE(consts.m1 == 0.0);
        auto rep = check_trajectory(traj, consts, *grid);
        REQUIRE(rep.all_pass);
        // dissipation makes the step inequality strictly negative
        REQUIRE(rep.find("step")->worst_slack < 0.0);
    }

    SECTION("convection run passes all four families") {
        auto prof = profile_for(stack, *grid, -1.0, 1.0, delta);
        SimConfig cfg;
        cfg.dt = 8e-4;
        cfg.t_end = 1.5;
        cfg.initial.preset = InitialCondition::Preset::SingleMode;
        auto traj = simulate(stack, prof, grid, cfg);
        REQUIRE_FALSE(traj.failed);
        auto consts = compute_constants(stack, prof, 16.0,
                                        traj.diagnostics.front().psi_l2);
        auto rep = check_trajectory(traj, consts, *grid);
        REQUIRE(rep.all_pass);
        REQUIRE(rep.find("absorbing_l2") != nullptr);
    }
}

TEST_CASE("diagnostics csv round trip structure") {
    std::vector<DiagnosticsRecord> recs(2);
    recs[0].time = 0.0;
    recs[0].psi_l2 = 1.5;
    recs[1].time = 0.25;
    recs[1].dt = 0.25;
    recs[1].psi_l2 = 1.25;
    std::ostringstream os;
    write_diagnostics_csv(recs, os);
    const std::string s = os.str();
    REQUIRE(s.find("time,dt,psi_l2") == 0);
    REQUIRE(s.find("\n0,") != std::string::npos);
    REQUIRE(s.find("0.25,0.25,1.25") != std::string::npos);
}
