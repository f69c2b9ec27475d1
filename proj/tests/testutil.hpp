#pragma once

// Shared helpers for the test suites: deterministic random fields and the
// benchmark stack in slab coordinates.

#include <cstdint>
#include <vector>

#include "strata/fields.hpp"
#include "strata/geometry.hpp"
#include "strata/grid.hpp"

namespace testutil {

// splitmix64: tiny, fully pinned generator so frozen regression values stay
// valid on any platform.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double uniform() {  // in [0, 1)
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }
    double sym() { return 2.0 * uniform() - 1.0; }  // in (-1, 1)
};

// Appendix-style three-layer stack in slab coordinates (0,2pi) x (-4,0):
// interfaces at -3 and -1, middle layer degenerate with permeability eps.
inline strata::LayerStack benchmark_stack(double eps) {
    return strata::build_layer_stack(2.0 * M_PI, 4.0, {-3.0, -1.0}, {1.0, 1.0, 1.0},
                                     {1.0, 1.0, 1.0}, std::size_t{1}, eps);
}

// Smooth random field, band-limited in x, vanishing at the walls.
inline strata::ScalarField random_field(strata::GridPtr grid, Rng& rng,
                                        int max_mode = 4, int max_vert = 5) {
    strata::ScalarField f(grid, "psi");
    const double H = grid->depth();
    const int nmodes = std::min(max_mode, grid->nx() / 3);
    for (int n = 0; n <= nmodes; ++n) {
        for (int m = 1; m <= max_vert; ++m) {
            const double ac = rng.sym() / (1.0 + n + m);
            const double as = (n == 0) ? 0.0 : rng.sym() / (1.0 + n + m);
            for (int j = 0; j < grid->nz(); ++j) {
                const double vert = std::sin(m * M_PI * (grid->z()[j] + H) / H);
                for (int i = 0; i < grid->nx(); ++i) {
                    const double phase = grid->wavenumber(n) * grid->x(i);
                    f.at(j, i) += vert * (ac * std::cos(phase) + as * std::sin(phase));
                }
            }
        }
    }
    return f;
}

// Random vertical profile (not wall-pinned), for per-mode solver tests.
inline std::vector<std::complex<double>> random_profile(const strata::Grid& grid,
                                                        Rng& rng, bool complex_parts) {
    std::vector<std::complex<double>> v(grid.nz());
    const double H = grid.depth();
    for (int m = 1; m <= 5; ++m) {
        const double ar = rng.sym() / m;
        const double br = rng.sym() / (m + 1);
        const double ai = complex_parts ? rng.sym() / m : 0.0;
        const double bi = complex_parts ? rng.sym() / (m + 1) : 0.0;
        for (int j = 0; j < grid.nz(); ++j) {
            const double s = std::sin(m * M_PI * (grid.z()[j] + H) / H);
            const double c = std::cos(m * M_PI * (grid.z()[j] + H) / H);
            v[j] += std::complex<double>(ar * s + br * c, ai * s + bi * c);
        }
    }
    return v;
}

}  // namespace testutil
