#pragma once

/**
 * @file diffusion.hpp
 * @brief Discrete interface-aware diffusion operator -div(D grad .) shared by
 *        the time stepper and the norm diagnostics.
 *
 * D depends on z only (piecewise constant per layer), so the operator is
 * diagonal in the horizontal modes: for mode k,
 *
 *     (L psi)_j = [-(F_up - F_dn) + k^2 Dbar_j dz_j psi_j] / dz_j,
 *     F = D psi' on faces,
 *
 * the conservative three-point stencil with single-valued face diffusivities
 * (faces lie strictly inside layers) and flux continuity across interface
 * nodes. Wall rows are Dirichlet and excluded from the operator.
 */

#include <complex>
#include <vector>

#include "strata/fields.hpp"
#include "strata/geometry.hpp"
#include "strata/grid.hpp"
#include "strata/tridiag.hpp"

namespace strata {

class DiffusionOperator {
public:
    DiffusionOperator(const LayerStack& stack, GridPtr grid)
        : grid_(std::move(grid)) {
        const Grid& g = *grid_;
        const int n = g.nz();
        face_d_.resize(g.face_layer().size());
        for (std::size_t f = 0; f < face_d_.size(); ++f)
            face_d_[f] = stack.diffusivities[g.face_layer()[f]];
        node_d_.resize(n);
        for (int j = 0; j < n; ++j)
            node_d_[j] = stack.diffusivities[g.node_layer()[j]];
        const auto& h = g.spacings();
        dz_.assign(n, 0.0);
        dbar_.assign(n, 0.0);
        dz_[0] = 0.5 * h[0];
        dz_[n - 1] = 0.5 * h[n - 2];
        dbar_[0] = face_d_[0];
        dbar_[n - 1] = face_d_[n - 2];
        for (int j = 1; j + 1 < n; ++j) {
            dz_[j] = 0.5 * (h[j - 1] + h[j]);
            dbar_[j] = (face_d_[j - 1] * h[j - 1] + face_d_[j] * h[j]) /
                       (h[j - 1] + h[j]);
        }
    }

    const Grid& grid() const { return *grid_; }
    const std::vector<double>& face_diffusivity() const { return face_d_; }
    const std::vector<double>& node_diffusivity() const { return node_d_; }
    const std::vector<double>& control_widths() const { return dz_; }
    const std::vector<double>& volume_diffusivity() const { return dbar_; }

    /// Interior-row bands of the mode-k operator; wall rows are identity
    /// with zero coupling (Dirichlet).
    void bands(double k, std::vector<double>& lo, std::vector<double>& di,
               std::vector<double>& up) const {
        const Grid& g = *grid_;
        const auto& h = g.spacings();
        const int n = g.nz();
        lo.assign(n, 0.0);
        di.assign(n, 0.0);
        up.assign(n, 0.0);
        di[0] = 1.0;
        di[n - 1] = 1.0;
        for (int j = 1; j + 1 < n; ++j) {
            di[j] = (face_d_[j] / h[j] + face_d_[j - 1] / h[j - 1]) / dz_[j] +
                    k * k * dbar_[j];
            up[j] = -face_d_[j] / h[j] / dz_[j];
            lo[j] = -face_d_[j - 1] / h[j - 1] / dz_[j];
        }
    }

    /// Apply the mode-k operator to a profile; wall rows map to zero.
    void apply_mode(double k, const std::complex<double>* v,
                    std::complex<double>* out) const {
        const Grid& g = *grid_;
        const auto& h = g.spacings();
        const int n = g.nz();
        out[0] = 0.0;
        out[n - 1] = 0.0;
        for (int j = 1; j + 1 < n; ++j) {
            const std::complex<double> f_up = face_d_[j] * (v[j + 1] - v[j]) / h[j];
            const std::complex<double> f_dn =
                face_d_[j - 1] * (v[j] - v[j - 1]) / h[j - 1];
            out[j] = -(f_up - f_dn) / dz_[j] + k * k * dbar_[j] * v[j];
        }
    }

private:
    GridPtr grid_;
    std::vector<double> face_d_;
    std::vector<double> node_d_;
    std::vector<double> dz_;
    std::vector<double> dbar_;
};

/// Pointwise application of the diffusion operator to a field.
inline ScalarField apply_L(const LayerStack& stack, const ScalarField& psi) {
    const DiffusionOperator op(stack, psi.grid);
    const ModeCoefficients m = to_modes(psi);
    ModeCoefficients out(psi.grid);
    for (int n = 0; n < psi.grid->num_modes(); ++n)
        op.apply_mode(psi.grid->wavenumber(n), m.mode(n), out.mode(n));
    ScalarField r = from_modes(out, "L(psi)");
    r.time = psi.time;
    r.epsilon = psi.epsilon;
    return r;
}

}  // namespace strata
