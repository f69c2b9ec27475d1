#pragma once

/**
 * @file pressure.hpp
 * @brief Per-mode elliptic pressure solves for layered permeability, the
 *        vanishing-permeability construction, and Darcy velocity recovery.
 *
 * Per horizontal mode k the pressure profile satisfies, in flux form,
 *
 *     -(G)' + k^2 K p = 0,   G = K (p' + psi),
 *
 * with zero flux G = 0 at the walls and G continuous across interfaces.
 * The finite-volume discretization places faces strictly inside layers, so
 * face permeabilities are single-valued and discrete flux continuity is
 * automatic: the scheme reduces to the standard three-point stencil inside
 * layers and conserves flux across interface nodes.
 *
 * Regular path (all K_i > 0): one tridiagonal solve per mode; the k = 0 mode
 * is the exact trapezoidal integration of p' = -psi_0 with zero vertical
 * mean, which solves the k = 0 finite-volume system identically.
 *
 * Degenerate path (one layer with K = 0):
 *   (a) mode 0 as above (unchanged by the degenerate layer),
 *   (b) nonzero modes solved independently in the permeable regions below
 *       and above the dead layer with zero-flux data on both ends,
 *   (c) the dead layer filled by the Dirichlet problem
 *       -(p' + psi)' + k^2 p = 0 with traces from (b).
 * The filled representative is the canonical one: it is what the regular
 * solve converges to as epsilon -> 0, both in the continuum and for the
 * discrete systems (the limit of the tridiagonal systems is exactly the
 * split construction).
 */

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/fields.hpp"
#include "strata/geometry.hpp"
#include "strata/grid.hpp"
#include "strata/tridiag.hpp"

namespace strata {

using ComplexProfile = std::vector<std::complex<double>>;

struct PressureSolve {
    ScalarField p;                        ///< zero mean over the slab
    ModeCoefficients p_modes;
    std::vector<double> mode_residuals;   ///< max-norm solve residual per mode
    std::string path;                     ///< "regular" or "degenerate"
};

namespace detail {

/// Face permeabilities (faces lie strictly inside layers).
inline std::vector<double> face_values(const Grid& g, const std::vector<double>& per_layer) {
    std::vector<double> out(g.face_layer().size());
    for (std::size_t f = 0; f < out.size(); ++f) out[f] = per_layer[g.face_layer()[f]];
    return out;
}

/// Control-volume widths and volume-weighted nodal coefficient.
inline void control_volumes(const Grid& g, const std::vector<double>& face_k,
                            std::vector<double>& dz, std::vector<double>& kbar) {
    const auto& h = g.spacings();
    const int n = g.nz();
    dz.assign(n, 0.0);
    kbar.assign(n, 0.0);
    dz[0] = 0.5 * h[0];
    dz[n - 1] = 0.5 * h[n - 2];
    kbar[0] = face_k[0];
    kbar[n - 1] = face_k[n - 2];
    for (int j = 1; j + 1 < n; ++j) {
        dz[j] = 0.5 * (h[j - 1] + h[j]);
        kbar[j] = (face_k[j - 1] * h[j - 1] + face_k[j] * h[j]) / (h[j - 1] + h[j]);
    }
}

/// Zero-flux mode solve on the node range [j0, j1] (inclusive) with the given
/// face coefficients; k != 0. Writes into p[j0..j1]; returns residual.
inline double flux_mode_solve(const Grid& g, const std::vector<double>& face_k,
                              double k, const ComplexProfile& psi, std::size_t j0,
                              std::size_t j1, ComplexProfile& p) {
    const auto& h = g.spacings();
    const std::size_t n = j1 - j0 + 1;
    std::vector<double> lo(n, 0.0), di(n, 0.0), up(n, 0.0);
    ComplexProfile rhs(n, {0.0, 0.0});
    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t j = j0 + r;
        double diag = 0.0;
        if (j < j1) {  // upper face
            const double c = face_k[j] / h[j];
            diag += c;
            up[r] = -c;
            rhs[r] += face_k[j] * 0.5 * (psi[j] + psi[j + 1]);
        }
        if (j > j0) {  // lower face
            const double c = face_k[j - 1] / h[j - 1];
            diag += c;
            lo[r] = -c;
            rhs[r] -= face_k[j - 1] * 0.5 * (psi[j - 1] + psi[j]);
        }
        // control volume restricted to the region: kb = integral of K over it
        double kb = 0.0;
        if (j < j1) kb += face_k[j] * 0.5 * h[j];
        if (j > j0) kb += face_k[j - 1] * 0.5 * h[j - 1];
        di[r] = diag + k * k * kb;
    }
    Tridiagonal A(std::move(lo), std::move(di), std::move(up));
    ComplexProfile x = rhs;
    A.solve(x);
    const double res = A.residual(x, rhs);
    for (std::size_t r = 0; r < n; ++r) p[j0 + r] = x[r];
    return res;
}

/// Exact zero-flux integration of the horizontal mean: p' = -psi_0, zero
/// vertical mean (trapezoid); solves the k = 0 finite-volume system exactly.
inline void zero_mode_solve(const Grid& g, const ComplexProfile& psi, ComplexProfile& p) {
    const auto& h = g.spacings();
    const auto& w = g.trapezoid_weights();
    const int n = g.nz();
    p.assign(n, {0.0, 0.0});
    for (int j = 0; j + 1 < n; ++j)
        p[j + 1] = p[j] - h[j] * 0.5 * (psi[j] + psi[j + 1]);
    std::complex<double> mean{0.0, 0.0};
    double wsum = 0.0;
    for (int j = 0; j < n; ++j) {
        mean += w[j] * p[j];
        wsum += w[j];
    }
    mean /= wsum;
    for (int j = 0; j < n; ++j) p[j] -= mean;
}

}  // namespace detail

/// One-mode solve with strictly positive layer permeabilities (k may be 0).
inline ComplexProfile solve_mode(const Grid& grid, const std::vector<double>& layer_k,
                                 double k, const ComplexProfile& psi_k,
                                 double* residual = nullptr) {
    if (psi_k.size() != static_cast<std::size_t>(grid.nz()))
        throw std::invalid_argument("profile length must match grid");
    for (double kk : layer_k)
        if (!(kk > 0.0))
            throw std::invalid_argument("solve_mode requires positive permeabilities");
    ComplexProfile p(grid.nz());
    if (k == 0.0) {
        detail::zero_mode_solve(grid, psi_k, p);
        if (residual) *residual = 0.0;
        return p;
    }
    const auto face_k = detail::face_values(grid, layer_k);
    const double res = detail::flux_mode_solve(grid, face_k, k, psi_k, 0,
                                               grid.nz() - 1, p);
    if (residual) *residual = res;
    return p;
}

namespace detail {

/// Indices of the nodes bounding the degenerate layer.
inline std::pair<std::size_t, std::size_t> degenerate_bounds(const LayerStack& stack,
                                                             const Grid& grid) {
    if (!stack.degenerate_layer)
        throw std::invalid_argument("stack has no degenerate layer");
    const std::size_t j = *stack.degenerate_layer;
    if (j == 0 || j + 1 == stack.num_layers())
        throw std::invalid_argument(
            "degenerate layer must not touch the top or bottom boundary");
    return {grid.interface_nodes()[j - 1], grid.interface_nodes()[j]};
}

}  // namespace detail

/// Mode coefficients of the pressure for a full field solve.
inline ModeCoefficients solve_pressure_modes(const LayerStack& stack, GridPtr gridptr,
                                             const ModeCoefficients& psi_modes,
                                             std::vector<double>& residuals) {
    const Grid& grid = *gridptr;
    const int nk = grid.num_modes();
    const int nz = grid.nz();
    ModeCoefficients pm(gridptr);
    residuals.assign(nk, 0.0);
    const bool degenerate = stack.is_degenerate();

    std::size_t lo = 0, hi = 0;
    if (degenerate) {
        auto [a, b] = detail::degenerate_bounds(stack, grid);
        lo = a;
        hi = b;
    }
    const auto face_k = detail::face_values(grid, stack.permeabilities);

    for (int n = 0; n < nk; ++n) {
        const double k = grid.wavenumber(n);
        ComplexProfile psi(nz), p(nz, {0.0, 0.0});
        for (int j = 0; j < nz; ++j) psi[j] = psi_modes.mode(n)[j];
        if (n == 0) {
            detail::zero_mode_solve(grid, psi, p);
        } else if (!degenerate) {
            residuals[n] = detail::flux_mode_solve(grid, face_k, k, psi, 0, nz - 1, p);
        } else {
            // permeable regions with zero-flux data on both ends
            double r1 = detail::flux_mode_solve(grid, face_k, k, psi, 0, lo, p);
            double r2 = detail::flux_mode_solve(grid, face_k, k, psi, hi, nz - 1, p);
            // dead layer: -(p' + psi)' + k^2 p = 0 with Dirichlet traces
            const std::size_t m = hi - lo + 1;
            std::vector<double> tlo(m, 0.0), tdi(m, 0.0), tup(m, 0.0);
            ComplexProfile rhs(m, {0.0, 0.0});
            const auto& h = grid.spacings();
            tdi[0] = 1.0;
            rhs[0] = p[lo];
            tdi[m - 1] = 1.0;
            rhs[m - 1] = p[hi];
            for (std::size_t r = 1; r + 1 < m; ++r) {
                const std::size_t j = lo + r;
                const double dzj = 0.5 * (h[j - 1] + h[j]);
                tdi[r] = 1.0 / h[j] + 1.0 / h[j - 1] + k * k * dzj;
                tup[r] = -1.0 / h[j];
                tlo[r] = -1.0 / h[j - 1];
                rhs[r] = 0.5 * (psi[j] + psi[j + 1]) - 0.5 * (psi[j - 1] + psi[j]);
            }
            Tridiagonal A(std::move(tlo), std::move(tdi), std::move(tup));
            ComplexProfile x = rhs;
            A.solve(x);
            const double r3 = A.residual(x, rhs);
            for (std::size_t r = 0; r < m; ++r) p[lo + r] = x[r];
            residuals[n] = std::max(r1, std::max(r2, r3));
        }
        for (int j = 0; j < nz; ++j) pm.mode(n)[j] = p[j];
    }
    return pm;
}

namespace detail {

inline PressureSolve finish_solve(const LayerStack& stack, GridPtr grid,
                                  const ScalarField& psi, const char* path) {
    const ModeCoefficients psi_modes = to_modes(psi);
    std::vector<double> residuals;
    ModeCoefficients pm = solve_pressure_modes(stack, grid, psi_modes, residuals);
    PressureSolve out;
    out.p = from_modes(pm, "p");
    out.p.time = psi.time;
    out.p.epsilon = stack.epsilon;
    out.p_modes = std::move(pm);
    out.mode_residuals = std::move(residuals);
    out.path = path;
    return out;
}

}  // namespace detail

/// Full-field solve, all layer permeabilities strictly positive.
inline PressureSolve solve_regular(const LayerStack& stack, const ScalarField& psi) {
    for (double k : stack.permeabilities)
        if (!(k > 0.0))
            throw std::invalid_argument(
                "solve_regular requires strictly positive permeabilities");
    return detail::finish_solve(stack, psi.grid, psi, "regular");
}

/// Full-field solve with the degenerate layer at exactly zero permeability.
inline PressureSolve solve_degenerate(const LayerStack& stack, const ScalarField& psi) {
    if (!stack.is_degenerate())
        throw std::invalid_argument("solve_degenerate requires epsilon == 0");
    detail::degenerate_bounds(stack, *psi.grid);  // validates placement
    return detail::finish_solve(stack, psi.grid, psi, "degenerate");
}

// ---------------------------------------------------------------------------
// Darcy velocity u = -K (grad p + psi e_z), recovered with the solve's own
// face stencil.
//
// u_x is nodal, with the node's layer (interfaces belong to the layer above)
// supplying K; across an interface u_x genuinely jumps and the stored value
// is the upper-layer trace. u_z is averaged onto nodes from the face fluxes;
// at interface nodes the two one-sided flux extrapolations are averaged,
// which is second order and reproduces the degenerate-path values exactly in
// the epsilon -> 0 limit. Wall values and dead-layer values are exact zeros.
// ---------------------------------------------------------------------------

inline void velocity_modes(const LayerStack& stack, const Grid& grid,
                           const ModeCoefficients& p_modes,
                           const ModeCoefficients& psi_modes,
                           ModeCoefficients& ux_modes, ModeCoefficients& uz_modes) {
    const int nz = grid.nz();
    const int nk = grid.num_modes();
    const auto& h = grid.spacings();
    const auto face_k = detail::face_values(grid, stack.permeabilities);
    const bool degenerate = stack.is_degenerate();
    std::size_t lo = 0, hi = 0;
    if (degenerate) {
        auto [a, b] = detail::degenerate_bounds(stack, grid);
        lo = a;
        hi = b;
    }
    std::vector<double> node_k(nz);
    for (int j = 0; j < nz; ++j)
        node_k[j] = stack.permeabilities[grid.node_layer()[j]];

    for (int n = 0; n < nk; ++n) {
        const double k = grid.wavenumber(n);
        const auto* p = p_modes.mode(n);
        const auto* psi = psi_modes.mode(n);
        auto* ux = ux_modes.mode(n);
        auto* uz = uz_modes.mode(n);
        const std::complex<double> ik{0.0, k};
        ComplexProfile flux(nz - 1);
        for (int f = 0; f + 1 < nz; ++f)
            flux[f] = face_k[f] * ((p[f + 1] - p[f]) / h[f] + 0.5 * (psi[f] + psi[f + 1]));
        for (int j = 0; j < nz; ++j) ux[j] = -node_k[j] * ik * p[j];
        uz[0] = 0.0;
        uz[nz - 1] = 0.0;
        for (int j = 1; j + 1 < nz; ++j) uz[j] = -0.5 * (flux[j - 1] + flux[j]);
        for (std::size_t jf : grid.interface_nodes()) {
            const auto below = flux[jf - 1] + 0.5 * h[jf - 1] * k * k * face_k[jf - 1] * p[jf];
            const auto above = flux[jf] - 0.5 * h[jf] * k * k * face_k[jf] * p[jf];
            uz[jf] = -0.5 * (below + above);
        }
        if (degenerate) {
            // dead layer: faces have K = 0 and the bounding interfaces carry
            // the imposed zero-flux traces
            for (std::size_t j = lo; j <= hi; ++j) uz[j] = 0.0;
        }
    }
}

inline std::pair<ScalarField, ScalarField> velocity(const LayerStack& stack,
                                                    const ScalarField& p,
                                                    const ScalarField& psi) {
    if (!p.grid->same_shape(*psi.grid))
        throw std::invalid_argument("p and psi must share a grid");
    const ModeCoefficients pm = to_modes(p);
    const ModeCoefficients sm = to_modes(psi);
    ModeCoefficients ux(p.grid), uz(p.grid);
    velocity_modes(stack, *p.grid, pm, sm, ux, uz);
    ScalarField fx = from_modes(ux, "u_x");
    ScalarField fz = from_modes(uz, "u_z");
    fx.time = fz.time = psi.time;
    fx.epsilon = fz.epsilon = stack.epsilon;
    return {std::move(fx), std::move(fz)};
}

/// Max over modes of the control-volume divergence residual, scaled by the
/// natural divergence magnitude max|u| / min dz. The residual applies the
/// solve's own stencil, so it sits at rounding level for both paths.
inline double divergence_residual(const LayerStack& stack, const Grid& grid,
                                  const ModeCoefficients& p_modes,
                                  const ModeCoefficients& psi_modes) {
    const int nz = grid.nz();
    const auto& h = grid.spacings();
    const auto face_k = detail::face_values(grid, stack.permeabilities);
    std::vector<double> dz, kbar;
    detail::control_volumes(grid, face_k, dz, kbar);

    double worst = 0.0;
    for (int n = 0; n < grid.num_modes(); ++n) {
        const double k = grid.wavenumber(n);
        const auto* p = p_modes.mode(n);
        const auto* psi = psi_modes.mode(n);
        ComplexProfile flux(nz + 1, {0.0, 0.0});  // [0] and [nz] are wall faces
        for (int f = 0; f + 1 < nz; ++f)
            flux[f + 1] =
                face_k[f] * ((p[f + 1] - p[f]) / h[f] + 0.5 * (psi[f] + psi[f + 1]));
        double rmax = 0.0, umax = 0.0;
        for (int j = 0; j < nz; ++j) {
            const std::complex<double> div =
                k * k * kbar[j] * dz[j] * p[j] - (flux[j + 1] - flux[j]);
            rmax = std::max(rmax, std::abs(div) / dz[j]);
            umax = std::max(umax, std::abs(flux[j + 1]));
            umax = std::max(umax, k * kbar[j] * std::abs(p[j]));
        }
        const double scale = (1.0 + umax) / grid.min_spacing();
        worst = std::max(worst, rmax / scale);
    }
    return worst;
}

/// Max-norm of the discrete horizontal-mean identity p_0' + psi_0 = 0.
inline double zero_mode_identity_residual(const ModeCoefficients& p_modes,
                                          const ModeCoefficients& psi_modes) {
    const Grid& g = *p_modes.grid;
    const auto& h = g.spacings();
    const auto* p = p_modes.mode(0);
    const auto* psi = psi_modes.mode(0);
    double worst = 0.0;
    for (int f = 0; f + 1 < g.nz(); ++f) {
        const auto r = (p[f + 1] - p[f]) / h[f] + 0.5 * (psi[f] + psi[f + 1]);
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

/// Slab integral of p (should vanish: the zero-mean gauge).
inline double mean_value(const ScalarField& f) {
    const Grid& g = *f.grid;
    const auto& w = g.trapezoid_weights();
    double s = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
        double row = 0.0;
        for (int i = 0; i < g.nx(); ++i) row += f.at(j, i);
        s += w[j] * row;
    }
    return s * g.dx();
}

}  // namespace strata
