#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "strata/oracle.hpp"

using namespace strata;

namespace {

double lstsq_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
    const std::size_t n = xs.size();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (std::log(xs[i]) - mx) * (std::log(ys[i]) - my);
        den += (std::log(xs[i]) - mx) * (std::log(xs[i]) - mx);
    }
    return num / den;
}

}  // namespace

TEST_CASE("limit coefficients match the closed forms") {
    const double e = std::exp(1.0);
    auto c = benchmark_coefficients(0.0);
    REQUIRE(c.a_plus == Catch::Approx(-1.0 / (e * (e * e - 1.0))).epsilon(1e-13));
    REQUIRE(c.b_minus == Catch::Approx(-1.0 / (e * (e * e - 1.0))).epsilon(1e-13));
    REQUIRE(c.a_zero == Catch::Approx(-e / (e * e - 1.0)).epsilon(1e-13));
    REQUIRE(c.b_zero == Catch::Approx(-e / (e * e - 1.0)).epsilon(1e-13));
    REQUIRE(c.a_minus == Catch::Approx(-e * e * e / (e * e - 1.0)).epsilon(1e-13));
    REQUIRE(c.b_plus == Catch::Approx(-e * e * e / (e * e - 1.0)).epsilon(1e-13));
    // printed numeric values
    REQUIRE(c.a_plus == Catch::Approx(-5.75797e-2).epsilon(1e-5));
    REQUIRE(c.a_zero == Catch::Approx(-4.25459e-1).epsilon(1e-5));
    REQUIRE(c.a_minus == Catch::Approx(-3.14374).epsilon(1e-5));
}

TEST_CASE("closed forms satisfy the literal 6x6 system") {
    for (double eps : {1.0, 0.5, 0.1, 0.01, 0.001, 0.0}) {
        auto c = benchmark_coefficients(eps);
        REQUIRE(benchmark_detail::printed_residual(eps, c.packed()) <= 1e-10);
    }
    // dense sweep
    for (int i = 0; i <= 100; ++i) {
        const double eps = i / 100.0;
        auto c = benchmark_coefficients(eps);
        REQUIRE(benchmark_detail::printed_residual(eps, c.packed()) <= 1e-10);
    }
}

TEST_CASE("coefficient scaling law") {
    auto c0 = benchmark_coefficients(0.0).packed();
    SECTION("eps = 1 kills every exponential coefficient") {
        for (double v : benchmark_coefficients(1.0).packed())
            REQUIRE(std::abs(v) < 1e-14);
    }
    SECTION("eps = 0.5 equals one third of the limit values") {
        auto c = benchmark_coefficients(0.5).packed();
        for (int i = 0; i < 6; ++i)
            REQUIRE(c[i] == Catch::Approx(c0[i] / 3.0).epsilon(1e-13));
    }
    SECTION("general factor (1-eps)/(1+eps)") {
        for (double eps : {0.9, 0.3, 0.05, 0.004}) {
            auto c = benchmark_coefficients(eps).packed();
            const double g = (1.0 - eps) / (1.0 + eps);
            for (int i = 0; i < 6; ++i)
                REQUIRE(c[i] == Catch::Approx(c0[i] * g).epsilon(1e-12));
        }
    }
}

TEST_CASE("transmission coefficients") {
    const double e = std::exp(1.0);
    SECTION("difference from the printed set has the known closed form") {
        for (double eps : {0.0, 0.001, 0.1, 0.5, 1.0}) {
            auto printed = benchmark_coefficients(eps).packed();
            auto trans = benchmark_transmission_coefficients(eps).packed();
            const double C = 2.0 * e / ((e * e + 1.0) * (1.0 + eps));
            const double A = -eps * C / (e * e);
            const double B = -eps * C * e * e;
            const double expect[6] = {A, B, C, C, B, A};
            for (int i = 0; i < 6; ++i)
                REQUIRE(trans[i] - printed[i] == Catch::Approx(expect[i]).margin(1e-12));
        }
    }
    SECTION("at eps = 0 the permeable layers agree with the printed set") {
        auto printed = benchmark_coefficients(0.0).packed();
        auto trans = benchmark_transmission_coefficients(0.0).packed();
        for (int i : {0, 1, 4, 5})
            REQUIRE(trans[i] == Catch::Approx(printed[i]).margin(1e-13));
    }
}

TEST_CASE("pressure field evaluation") {
    SECTION("eps = 1 reduces to the particular constants") {
        for (double x : {0.0, 1.0, 2.5}) {
            REQUIRE(benchmark_pressure(1.0, x, 0.0) ==
                    Catch::Approx(-std::cos(x)).margin(1e-13));
            REQUIRE(benchmark_pressure(1.0, x, 0.5) ==
                    Catch::Approx(-std::cos(x)).margin(1e-13));
        }
    }
    SECTION("frozen regression value at eps = 0, x = 0, z = 1.5") {
        REQUIRE(benchmark_pressure(0.0, 0.0, 1.5) ==
                Catch::Approx(0.04048262433252814).epsilon(1e-12));
    }
    SECTION("forcing profile interpolates the printed data") {
        REQUIRE(benchmark_forcing(2.0) == 0.0);
        REQUIRE(benchmark_forcing(1.0) == -1.0);
        REQUIRE(benchmark_forcing(-1.0) == 1.0);
        REQUIRE(benchmark_forcing(-2.0) == 0.0);
        REQUIRE(benchmark_forcing(0.0) == 0.0);
        REQUIRE(benchmark_forcing(1.5) == -0.5);
    }
}

TEST_CASE("exact linear rate") {
    SECTION("zero at the limit") { REQUIRE(benchmark_h1_error(0.0) == 0.0); }

    SECTION("factorization error(eps) = (2 eps / (1 + eps)) C0") {
        const double C0 = benchmark_rate_constant();
        REQUIRE(C0 == Catch::Approx(7.655004327973804).epsilon(1e-12));
        for (double eps = 1e-4; eps <= 0.1 * (1 + 1e-9); eps *= 1.77827941) {
            const double ratio = benchmark_h1_error(eps) / (2.0 * eps / (1.0 + eps));
            REQUIRE(ratio == Catch::Approx(C0).epsilon(1e-10));
        }
    }

    SECTION("log-log slope in the asymptotic window") {
        std::vector<double> eps, err;
        for (double e = 1e-4; e <= 1e-3 * (1 + 1e-9); e *= std::pow(10.0, 1.0 / 3.0)) {
            eps.push_back(e);
            err.push_back(benchmark_h1_error(e));
        }
        const double slope = lstsq_slope(eps, err);
        REQUIRE(slope == Catch::Approx(1.0).margin(1e-3));
    }

    SECTION("whole-range slope equals the exact value of the rate law") {
        // On the 4-decade grid the exact function 2 eps/(1+eps) itself has
        // least-squares slope 0.98721; the measured value must match it.
        std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4}, err;
        for (double e : eps) err.push_back(benchmark_h1_error(e));
        REQUIRE(lstsq_slope(eps, err) == Catch::Approx(0.987206).margin(2e-4));
    }
}
