#pragma once

/**
 * @file tridiag.hpp
 * @brief Thomas solver for tridiagonal systems with real coefficients and
 *        real or complex right-hand sides. The matrices here are diagonally
 *        dominant M-matrices, so no pivoting is needed.
 */

#include <complex>
#include <stdexcept>
#include <vector>

namespace strata {

class Tridiagonal {
public:
    Tridiagonal() = default;
    Tridiagonal(std::vector<double> lower, std::vector<double> diag,
                std::vector<double> upper)
        : lo_(std::move(lower)), di_(std::move(diag)), up_(std::move(upper)) {
        factor();
    }

    std::size_t size() const { return di_.size(); }

    /// y = A x
    template <class T>
    std::vector<T> apply(const std::vector<T>& x) const {
        const std::size_t n = size();
        std::vector<T> y(n);
        for (std::size_t j = 0; j < n; ++j) {
            T acc = di_[j] * x[j];
            if (j > 0) acc += lo_[j] * x[j - 1];
            if (j + 1 < n) acc += up_[j] * x[j + 1];
            y[j] = acc;
        }
        return y;
    }

    /// Solve A x = rhs in place.
    template <class T>
    void solve(std::vector<T>& rhs) const {
        const std::size_t n = size();
        std::vector<T> d(n);
        d[0] = rhs[0] * inv_pivot_[0];
        for (std::size_t j = 1; j < n; ++j)
            d[j] = (rhs[j] - lo_[j] * d[j - 1]) * inv_pivot_[j];
        rhs[n - 1] = d[n - 1];
        for (std::size_t j = n - 1; j-- > 0;)
            rhs[j] = d[j] - c_[j] * rhs[j + 1];
    }

    /// Max-norm residual |A x - b|.
    template <class T>
    double residual(const std::vector<T>& x, const std::vector<T>& b) const {
        auto y = apply(x);
        double r = 0.0;
        for (std::size_t j = 0; j < size(); ++j)
            r = std::max(r, std::abs(y[j] - b[j]));
        return r;
    }

private:
    void factor() {
        const std::size_t n = di_.size();
        if (n == 0 || lo_.size() != n || up_.size() != n)
            throw std::invalid_argument("tridiagonal bands must share one length");
        c_.resize(n);
        inv_pivot_.resize(n);
        double piv = di_[0];
        if (piv == 0.0) throw std::runtime_error("singular tridiagonal system");
        inv_pivot_[0] = 1.0 / piv;
        c_[0] = up_[0] * inv_pivot_[0];
        for (std::size_t j = 1; j < n; ++j) {
            piv = di_[j] - lo_[j] * c_[j - 1];
            if (piv == 0.0) throw std::runtime_error("singular tridiagonal system");
            inv_pivot_[j] = 1.0 / piv;
            c_[j] = up_[j] * inv_pivot_[j];
        }
    }

    std::vector<double> lo_, di_, up_;
    std::vector<double> c_;          // factored superdiagonal
    std::vector<double> inv_pivot_;
};

}  // namespace strata
