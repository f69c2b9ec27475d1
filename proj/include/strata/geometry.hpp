#pragma once

/**
 * @file geometry.hpp
 * @brief Layered slab geometry, material parameters, and the background
 *        concentration profile.
 *
 * The domain is the periodic slab (0, L) x (-H, 0), divided into horizontal
 * layers by interfaces z_1 < ... < z_{l-1}. Each layer carries a constant
 * permeability K_i and diffusivity D_i. One layer may be marked degenerate:
 * its permeability is the control parameter epsilon and may vanish.
 *
 * The background profile homogenizes the top/bottom concentration boundary
 * values: it equals c_top at z = 0, c_bottom at z = -H, and the mean of the
 * two on the plateau (-H + delta, -delta). Its derivative is a triangular
 * bump of height |c_top - c_bottom| / delta on each transition strip, so the
 * standard bounds |phi'| <= c_delta/delta and |phi''| <= 2 c_delta/delta^2
 * are attained with equality.
 */

#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace strata {

/// Geometry and material constants of the layered slab.
struct LayerStack {
    double horizontal_period = 0.0;          ///< L, x-period
    double depth = 0.0;                      ///< H, slab is (0,L) x (-H,0)
    std::vector<double> interfaces;          ///< z_1 < ... < z_{l-1} in (-H,0)
    std::vector<double> permeabilities;      ///< K_i per layer, bottom to top
    std::vector<double> diffusivities;       ///< D_i per layer, strictly positive
    std::optional<std::size_t> degenerate_layer;  ///< 0-based index of the epsilon layer
    double epsilon = 0.0;                    ///< permeability of the degenerate layer

    std::size_t num_layers() const { return permeabilities.size(); }

    /// Layer containing z. Interface nodes belong to the layer above.
    std::size_t layer_of(double z) const {
        std::size_t lay = 0;
        for (std::size_t i = 0; i < interfaces.size(); ++i)
            if (z >= interfaces[i]) lay = i + 1;
        return lay;
    }

    double layer_bottom(std::size_t i) const {
        return i == 0 ? -depth : interfaces[i - 1];
    }
    double layer_top(std::size_t i) const {
        return i + 1 == num_layers() ? 0.0 : interfaces[i];
    }
    double layer_thickness(std::size_t i) const {
        return layer_top(i) - layer_bottom(i);
    }

    double min_diffusivity() const {
        double m = diffusivities.front();
        for (double d : diffusivities) m = std::min(m, d);
        return m;
    }
    double max_diffusivity() const {
        double m = diffusivities.front();
        for (double d : diffusivities) m = std::max(m, d);
        return m;
    }

    /// Max permeability with the degenerate layer taken at its worst
    /// admissible value (epsilon = 1); used by delta admissibility and the
    /// a-priori constants so they stay uniform in epsilon.
    double max_permeability_worst_case() const {
        double m = 0.0;
        for (std::size_t i = 0; i < permeabilities.size(); ++i) {
            double k = permeabilities[i];
            if (degenerate_layer && *degenerate_layer == i) k = 1.0;
            m = std::max(m, k);
        }
        return m;
    }

    bool is_degenerate() const {
        return degenerate_layer.has_value() && epsilon == 0.0;
    }
};

/// Background profile sampled on a vertical grid, with its two derivatives.
struct BackgroundProfile {
    double delta = 0.0;       ///< transition-strip width
    double c_top = 0.0;       ///< boundary value at z = 0
    double c_bottom = 0.0;    ///< boundary value at z = -H
    double c_delta = 0.0;     ///< |c_top - c_bottom|
    std::vector<double> z;          ///< sample nodes
    std::vector<double> value;      ///< phi_b at the nodes
    std::vector<double> slope;      ///< phi_b'
    std::vector<double> curvature;  ///< phi_b''
};

inline LayerStack build_layer_stack(double period, double depth,
                                    std::vector<double> interfaces,
                                    std::vector<double> permeabilities,
                                    std::vector<double> diffusivities,
                                    std::optional<std::size_t> degenerate_layer,
                                    double epsilon) {
    if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
    if (!(depth > 0.0)) throw std::invalid_argument("depth must be positive");
    const std::size_t l = permeabilities.size();
    if (l == 0) throw std::invalid_argument("at least one layer required");
    if (diffusivities.size() != l)
        throw std::invalid_argument("permeabilities/diffusivities length mismatch");
    if (interfaces.size() + 1 != l)
        throw std::invalid_argument("need exactly one fewer interface than layers");
    for (std::size_t i = 0; i < interfaces.size(); ++i) {
        if (!(interfaces[i] > -depth && interfaces[i] < 0.0))
            throw std::invalid_argument("interfaces must lie strictly inside (-depth, 0)");
        if (i > 0 && !(interfaces[i] > interfaces[i - 1]))
            throw std::invalid_argument("interfaces must be strictly increasing");
    }
    for (double d : diffusivities)
        if (!(d > 0.0)) throw std::invalid_argument("diffusivities must be strictly positive");
    if (!(epsilon >= 0.0)) throw std::invalid_argument("epsilon must be non-negative");

    LayerStack s;
    s.horizontal_period = period;
    s.depth = depth;
    s.interfaces = std::move(interfaces);
    s.permeabilities = std::move(permeabilities);
    s.diffusivities = std::move(diffusivities);
    s.degenerate_layer = degenerate_layer;
    s.epsilon = epsilon;

    if (degenerate_layer) {
        if (*degenerate_layer >= l)
            throw std::invalid_argument("degenerate layer index out of range");
        s.permeabilities[*degenerate_layer] = epsilon;
    }
    for (std::size_t i = 0; i < l; ++i) {
        const bool deg = degenerate_layer && *degenerate_layer == i;
        if (deg) {
            if (s.permeabilities[i] < 0.0)
                throw std::invalid_argument("degenerate permeability must be >= 0");
        } else if (!(s.permeabilities[i] > 0.0)) {
            throw std::invalid_argument(
                "non-degenerate permeabilities must be strictly positive");
        }
    }
    return s;
}

/// Largest admissible transition-strip width: the strip estimate requires
/// delta <= min D / (8 c_delta max K), with max K taken at epsilon = 1, and
/// the depth/4 cap keeps the two strips and the plateau disjoint.
inline double max_delta(const LayerStack& stack, double c_delta) {
    if (c_delta < 0.0) throw std::invalid_argument("c_delta must be >= 0");
    const double cap = stack.depth / 4.0;
    if (c_delta == 0.0) return cap;
    const double bound = stack.min_diffusivity() /
                         (8.0 * c_delta * stack.max_permeability_worst_case());
    return std::min(bound, cap);
}

namespace detail {

/// Analytic C^1 piecewise-quadratic ramp evaluation: value, slope, curvature.
inline void background_eval(double z, double depth, double delta, double c_top,
                            double c_bottom, double& v, double& dv, double& d2v) {
    const double c_mid = 0.5 * (c_top + c_bottom);
    const double jump = 0.5 * (c_top - c_bottom);  // plateau -> top rise
    const double q = 4.0 * jump / (delta * delta);
    if (z >= -delta) {  // top strip
        if (z >= -0.5 * delta) {
            v = c_top - 0.5 * q * z * z;
            dv = -q * z;
            d2v = -q;
        } else {
            const double s = z + delta;
            v = c_mid + 0.5 * q * s * s;
            dv = q * s;
            d2v = q;
        }
    } else if (z <= -depth + delta) {  // bottom strip
        if (z <= -depth + 0.5 * delta) {
            const double s = z + depth;
            v = c_bottom + 0.5 * q * s * s;
            dv = q * s;
            d2v = q;
        } else {
            const double s = z + depth - delta;
            v = c_mid - 0.5 * q * s * s;
            dv = -q * s;
            d2v = -q;
        }
    } else {  // plateau
        v = c_mid;
        dv = 0.0;
        d2v = 0.0;
    }
}

}  // namespace detail

inline BackgroundProfile build_background_profile(const LayerStack& stack,
                                                  double c_top, double c_bottom,
                                                  double delta,
                                                  const std::vector<double>& z_grid) {
    const double c_delta = std::abs(c_top - c_bottom);
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    if (delta > max_delta(stack, c_delta) * (1.0 + 1e-12))
        throw std::invalid_argument("delta exceeds the admissible bound");
    // Each transition strip must stay inside its outermost layer so the strip
    // Poincare argument never crosses an interface.
    const double top_thick = stack.layer_thickness(stack.num_layers() - 1);
    const double bot_thick = stack.layer_thickness(0);
    if (delta > 0.5 * std::min(top_thick, bot_thick))
        throw std::invalid_argument("delta exceeds half the outermost layer thickness");
    if (z_grid.size() < 2 || std::abs(z_grid.front() + stack.depth) > 1e-12 ||
        std::abs(z_grid.back()) > 1e-12)
        throw std::invalid_argument("z grid must cover [-depth, 0]");

    BackgroundProfile p;
    p.delta = delta;
    p.c_top = c_top;
    p.c_bottom = c_bottom;
    p.c_delta = c_delta;
    p.z = z_grid;
    p.value.resize(z_grid.size());
    p.slope.resize(z_grid.size());
    p.curvature.resize(z_grid.size());
    for (std::size_t j = 0; j < z_grid.size(); ++j)
        detail::background_eval(z_grid[j], stack.depth, delta, c_top, c_bottom,
                                p.value[j], p.slope[j], p.curvature[j]);
    // pin the boundary values exactly
    p.value.front() = c_bottom;
    p.value.back() = c_top;
    return p;
}

}  // namespace strata
