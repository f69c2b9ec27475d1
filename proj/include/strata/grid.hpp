#pragma once

/**
 * @file grid.hpp
 * @brief Tensor grid for the periodic slab: uniform x-nodes, layer-uniform
 *        z-nodes with every interface on a node.
 */

#include <cmath>
#include <cstddef>
#include <memory>
#include <stdexcept>
#include <vector>

#include "strata/geometry.hpp"

namespace strata {

class Grid {
public:
    /// cells_per_layer[i] subintervals in layer i; nodes include -H, 0 and
    /// every interface exactly.
    Grid(const LayerStack& stack, std::vector<int> cells_per_layer, int nx)
        : nx_(nx), period_(stack.horizontal_period) {
        if (nx <= 0 || nx % 2 != 0)
            throw std::invalid_argument("nx must be an even positive integer");
        if (cells_per_layer.size() != stack.num_layers())
            throw std::invalid_argument("cells_per_layer size must match layer count");
        for (int c : cells_per_layer)
            if (c < 2) throw std::invalid_argument("need at least 2 cells per layer");

        z_.push_back(-stack.depth);
        for (std::size_t i = 0; i < stack.num_layers(); ++i) {
            const double zb = stack.layer_bottom(i);
            const double zt = stack.layer_top(i);
            const int m = cells_per_layer[i];
            for (int c = 1; c <= m; ++c)
                z_.push_back(zb + (zt - zb) * static_cast<double>(c) / m);
            if (i + 1 < stack.num_layers()) {
                z_.back() = stack.interfaces[i];  // interface exactly on a node
                interface_nodes_.push_back(z_.size() - 1);
            }
        }
        z_.back() = 0.0;

        face_layer_.resize(z_.size() - 1);
        for (std::size_t f = 0; f + 1 < z_.size(); ++f)
            face_layer_[f] = stack.layer_of(0.5 * (z_[f] + z_[f + 1]));
        node_layer_.resize(z_.size());
        for (std::size_t j = 0; j < z_.size(); ++j)
            node_layer_[j] = stack.layer_of(z_[j]);

        h_.resize(z_.size() - 1);
        for (std::size_t f = 0; f + 1 < z_.size(); ++f) h_[f] = z_[f + 1] - z_[f];
        weight_.assign(z_.size(), 0.0);
        for (std::size_t f = 0; f + 1 < z_.size(); ++f) {
            weight_[f] += 0.5 * h_[f];
            weight_[f + 1] += 0.5 * h_[f];
        }
    }

    int nx() const { return nx_; }
    int nz() const { return static_cast<int>(z_.size()); }
    double period() const { return period_; }
    double depth() const { return -z_.front(); }
    double dx() const { return period_ / nx_; }
    double x(int i) const { return period_ * static_cast<double>(i) / nx_; }

    const std::vector<double>& z() const { return z_; }
    const std::vector<double>& spacings() const { return h_; }          ///< per face
    const std::vector<double>& trapezoid_weights() const { return weight_; }
    const std::vector<std::size_t>& face_layer() const { return face_layer_; }
    const std::vector<std::size_t>& node_layer() const { return node_layer_; }
    const std::vector<std::size_t>& interface_nodes() const { return interface_nodes_; }

    double min_spacing() const {
        double m = h_.front();
        for (double s : h_) m = std::min(m, s);
        return m;
    }
    double max_spacing() const {
        double m = h_.front();
        for (double s : h_) m = std::max(m, s);
        return m;
    }

    /// Wavenumber of stored mode n (half spectrum, 0..nx/2).
    double wavenumber(int n) const { return 2.0 * M_PI * n / period_; }
    int num_modes() const { return nx_ / 2 + 1; }

    bool same_shape(const Grid& o) const {
        return nx_ == o.nx_ && z_ == o.z_ && period_ == o.period_;
    }

private:
    int nx_;
    double period_;
    std::vector<double> z_;
    std::vector<double> h_;
    std::vector<double> weight_;
    std::vector<std::size_t> face_layer_;
    std::vector<std::size_t> node_layer_;
    std::vector<std::size_t> interface_nodes_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr make_grid(const LayerStack& stack, std::vector<int> cells_per_layer,
                         int nx) {
    return std::make_shared<const Grid>(stack, std::move(cells_per_layer), nx);
}

/// Convenience: the same cell count in every layer.
inline GridPtr make_grid(const LayerStack& stack, int cells_per_layer, int nx) {
    return make_grid(stack,
                     std::vector<int>(stack.num_layers(), cells_per_layer), nx);
}

}  // namespace strata
