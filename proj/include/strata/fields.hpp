#pragma once

/**
 * @file fields.hpp
 * @brief Scalar fields on the slab grid, Fourier transforms in x, the
 *        zero/nonzero mode split, and snapshot serialization.
 *
 * Storage conventions:
 *  - ScalarField: z-major rows, values[j*nx + i] at (x_i, z_j).
 *  - ModeCoefficients: half spectrum, mode-major, coeff[n*nz + j] for
 *    n = 0..nx/2. Coefficients are x-average normalized, so mode 0 is the
 *    horizontal mean and a real field f = sum_n c_n exp(i k_n x) with
 *    c_{-n} = conj(c_n).
 *
 * Transforms are backed by FFTW (r2c/c2r, plan caching keyed by shape).
 */

#include <fftw3.h>

#include <complex>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/grid.hpp"

namespace strata {

struct ScalarField {
    GridPtr grid;
    std::string tag;        ///< quantity label (psi, p, u_x, u_z, phi, ...)
    double time = 0.0;
    double epsilon = 0.0;
    std::vector<double> values;  ///< nz x nx, z-major

    ScalarField() = default;
    ScalarField(GridPtr g, std::string tag_) : grid(std::move(g)), tag(std::move(tag_)) {
        values.assign(static_cast<std::size_t>(grid->nz()) * grid->nx(), 0.0);
    }

    double& at(int j, int i) { return values[static_cast<std::size_t>(j) * grid->nx() + i]; }
    double at(int j, int i) const {
        return values[static_cast<std::size_t>(j) * grid->nx() + i];
    }
};

struct ModeCoefficients {
    GridPtr grid;
    std::vector<std::complex<double>> coeff;  ///< (nx/2+1) x nz, mode-major

    ModeCoefficients() = default;
    explicit ModeCoefficients(GridPtr g) : grid(std::move(g)) {
        coeff.assign(static_cast<std::size_t>(grid->num_modes()) * grid->nz(),
                     {0.0, 0.0});
    }

    std::complex<double>* mode(int n) {
        return coeff.data() + static_cast<std::size_t>(n) * grid->nz();
    }
    const std::complex<double>* mode(int n) const {
        return coeff.data() + static_cast<std::size_t>(n) * grid->nz();
    }
};

namespace detail {

/// Cached FFTW plans for one (nz, nx) shape. Plan creation is serialized;
/// execution via the new-array interface is thread-safe. FFTW_UNALIGNED keeps
/// plans valid for any caller-provided buffers; FFTW_ESTIMATE keeps planning
/// deterministic.
class FftShape {
public:
    FftShape(int nz, int nx) : nz_(nz), nx_(nx) {
        std::vector<double> re(static_cast<std::size_t>(nz) * nx);
        std::vector<fftw_complex> cx(static_cast<std::size_t>(nz) * (nx / 2 + 1));
        const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
        int n[] = {nx};
        fwd_ = fftw_plan_many_dft_r2c(1, n, nz, re.data(), nullptr, 1, nx,
                                      cx.data(), nullptr, 1, nx / 2 + 1, flags);
        bwd_ = fftw_plan_many_dft_c2r(1, n, nz, cx.data(), nullptr, 1, nx / 2 + 1,
                                      re.data(), nullptr, 1, nx, flags);
        if (!fwd_ || !bwd_) throw std::runtime_error("fftw plan creation failed");
    }
    ~FftShape() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
    }
    FftShape(const FftShape&) = delete;
    FftShape& operator=(const FftShape&) = delete;

    void forward(double* re, fftw_complex* cx) const {
        fftw_execute_dft_r2c(fwd_, re, cx);
    }
    void backward(fftw_complex* cx, double* re) const {
        fftw_execute_dft_c2r(bwd_, cx, re);
    }

    static const FftShape& get(int nz, int nx) {
        static std::mutex mu;
        static std::map<std::pair<int, int>, std::unique_ptr<FftShape>> cache;
        std::lock_guard<std::mutex> lock(mu);
        auto& slot = cache[{nz, nx}];
        if (!slot) slot = std::make_unique<FftShape>(nz, nx);
        return *slot;
    }

private:
    int nz_, nx_;
    fftw_plan fwd_, bwd_;
};

}  // namespace detail

/// Forward transform: per-row DFT in x, x-average normalization.
inline ModeCoefficients to_modes(const ScalarField& f) {
    const Grid& g = *f.grid;
    const int nz = g.nz(), nx = g.nx(), nk = g.num_modes();
    ModeCoefficients m(f.grid);
    std::vector<double> re(f.values);
    std::vector<std::complex<double>> row(static_cast<std::size_t>(nz) * nk);
    detail::FftShape::get(nz, nx).forward(re.data(),
                                          reinterpret_cast<fftw_complex*>(row.data()));
    const double scale = 1.0 / nx;
    for (int j = 0; j < nz; ++j)
        for (int n = 0; n < nk; ++n)
            m.coeff[static_cast<std::size_t>(n) * nz + j] =
                row[static_cast<std::size_t>(j) * nk + n] * scale;
    return m;
}

/// Inverse transform; the half spectrum implies conjugate symmetry, so the
/// output is real by construction.
inline ScalarField from_modes(const ModeCoefficients& m, const std::string& tag = "") {
    const Grid& g = *m.grid;
    const int nz = g.nz(), nx = g.nx(), nk = g.num_modes();
    for (int j = 0; j < nz; ++j) {
        if (std::abs(m.mode(0)[j].imag()) > 1e-13 * (1.0 + std::abs(m.mode(0)[j].real())))
            throw std::invalid_argument("mode 0 must be real");
        if (nx % 2 == 0 &&
            std::abs(m.mode(nk - 1)[j].imag()) >
                1e-13 * (1.0 + std::abs(m.mode(nk - 1)[j].real())))
            throw std::invalid_argument("Nyquist mode must be real");
    }
    ScalarField f(m.grid, tag);
    std::vector<std::complex<double>> row(static_cast<std::size_t>(nz) * nk);
    for (int j = 0; j < nz; ++j)
        for (int n = 0; n < nk; ++n)
            row[static_cast<std::size_t>(j) * nk + n] =
                m.coeff[static_cast<std::size_t>(n) * nz + j];
    detail::FftShape::get(nz, nx).backward(
        reinterpret_cast<fftw_complex*>(row.data()), f.values.data());
    return f;
}

/// Split into the horizontal mean profile and the mean-free remainder.
/// Recombination (zero_profile + nonzero_part) is exact bookkeeping.
inline std::pair<std::vector<double>, ModeCoefficients> split_zero_mode(
    const ModeCoefficients& m) {
    const int nz = m.grid->nz();
    std::vector<double> zero(nz);
    for (int j = 0; j < nz; ++j) zero[j] = m.mode(0)[j].real();
    ModeCoefficients rest = m;
    for (int j = 0; j < nz; ++j) rest.mode(0)[j] = 0.0;
    return {std::move(zero), std::move(rest)};
}

/// Symmetry factor of stored mode n when summing |c_n|^2 over the full
/// spectrum: conjugate pairs count twice, mode 0 and Nyquist once.
inline double mode_multiplicity(const Grid& g, int n) {
    if (n == 0) return 1.0;
    if (g.nx() % 2 == 0 && n == g.num_modes() - 1) return 1.0;
    return 2.0;
}

/// Centered second-order z-derivative on the layer-uniform grid (the
/// three-point weights handle the spacing change at interface rows); walls
/// use one-sided second-order stencils.
inline ScalarField vertical_derivative(const ScalarField& f) {
    const Grid& g = *f.grid;
    const auto& h = g.spacings();
    const int nz = g.nz(), nx = g.nx();
    ScalarField out(f.grid, f.tag + "_dz");
    out.time = f.time;
    out.epsilon = f.epsilon;
    for (int j = 1; j + 1 < nz; ++j) {
        const double hm = h[j - 1], hp = h[j];
        const double wp = hm / (hp * (hm + hp));
        const double wm = hp / (hm * (hm + hp));
        const double w0 = wm - wp;  // zero on locally uniform spacing
        for (int i = 0; i < nx; ++i)
            out.at(j, i) =
                wp * f.at(j + 1, i) + w0 * f.at(j, i) - wm * f.at(j - 1, i);
    }
    {   // one-sided ends
        const double h0 = h[0], h1 = h[1];
        const double a = -(2.0 * h0 + h1) / (h0 * (h0 + h1));
        const double b = (h0 + h1) / (h0 * h1);
        const double c = -h0 / (h1 * (h0 + h1));
        const double hn = h[nz - 2], hn1 = h[nz - 3];
        const double an = (2.0 * hn + hn1) / (hn * (hn + hn1));
        const double bn = -(hn + hn1) / (hn * hn1);
        const double cn = hn / (hn1 * (hn + hn1));
        for (int i = 0; i < nx; ++i) {
            out.at(0, i) = a * f.at(0, i) + b * f.at(1, i) + c * f.at(2, i);
            out.at(nz - 1, i) =
                an * f.at(nz - 1, i) + bn * f.at(nz - 2, i) + cn * f.at(nz - 3, i);
        }
    }
    return out;
}

/// Discrete L2 norm over the slab (trapezoid in z, exact in x).
inline double l2_norm(const ScalarField& f) {
    const Grid& g = *f.grid;
    const auto& w = g.trapezoid_weights();
    double s = 0.0;
    for (int j = 0; j < g.nz(); ++j) {
        double rowsum = 0.0;
        for (int i = 0; i < g.nx(); ++i) rowsum += f.at(j, i) * f.at(j, i);
        s += w[j] * rowsum;
    }
    return std::sqrt(s * g.dx());
}

/// Same norm evaluated in mode space (Parseval).
inline double l2_norm(const ModeCoefficients& m) {
    const Grid& g = *m.grid;
    const auto& w = g.trapezoid_weights();
    double s = 0.0;
    for (int n = 0; n < g.num_modes(); ++n) {
        const auto* c = m.mode(n);
        double acc = 0.0;
        for (int j = 0; j < g.nz(); ++j) acc += w[j] * std::norm(c[j]);
        s += mode_multiplicity(g, n) * acc;
    }
    return std::sqrt(s * g.period());
}

/// Discrete H1 norm: L2 of the field, its spectral x-derivative, and its
/// face-difference z-derivative.
inline double h1_norm(const ModeCoefficients& m) {
    const Grid& g = *m.grid;
    const auto& w = g.trapezoid_weights();
    const auto& h = g.spacings();
    double s = 0.0;
    for (int n = 0; n < g.num_modes(); ++n) {
        const double k = g.wavenumber(n);
        const auto* c = m.mode(n);
        double acc = 0.0;
        for (int j = 0; j < g.nz(); ++j) acc += w[j] * std::norm(c[j]) * (1.0 + k * k);
        for (int f = 0; f + 1 < g.nz(); ++f) acc += std::norm(c[f + 1] - c[f]) / h[f];
        s += mode_multiplicity(g, n) * acc;
    }
    return std::sqrt(s * g.period());
}

// ---------------------------------------------------------------------------
// Snapshot serialization. The binary layout round-trips bit exactly; the CSV
// flavor uses max_digits10 so it round-trips too.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kFieldMagic[8] = {'S', 'T', 'R', 'A', 'T', 'A', 'F', '\0'};

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

}  // namespace detail

inline void save_field(const ScalarField& f, std::ostream& os) {
    os.write(detail::kFieldMagic, sizeof(detail::kFieldMagic));
    detail::write_pod(os, std::uint32_t{1});
    detail::write_pod(os, static_cast<std::uint32_t>(f.grid->nx()));
    detail::write_pod(os, static_cast<std::uint32_t>(f.grid->nz()));
    detail::write_pod(os, static_cast<std::uint32_t>(f.tag.size()));
    os.write(f.tag.data(), static_cast<std::streamsize>(f.tag.size()));
    detail::write_pod(os, f.time);
    detail::write_pod(os, f.epsilon);
    detail::write_pod(os, f.grid->period());
    os.write(reinterpret_cast<const char*>(f.grid->z().data()),
             static_cast<std::streamsize>(sizeof(double) * f.grid->z().size()));
    os.write(reinterpret_cast<const char*>(f.values.data()),
             static_cast<std::streamsize>(sizeof(double) * f.values.size()));
    if (!os) throw std::runtime_error("field write failed");
}

inline void save_field(const ScalarField& f, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path);
    save_field(f, os);
}

/// Raw snapshot contents; the grid is restored as nodes only (no stack).
struct FieldSnapshot {
    std::uint32_t nx = 0, nz = 0;
    std::string tag;
    double time = 0.0, epsilon = 0.0, period = 0.0;
    std::vector<double> z;
    std::vector<double> values;
};

inline FieldSnapshot load_field(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, detail::kFieldMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a field snapshot");
    std::uint32_t version = 0;
    detail::read_pod(is, version);
    if (version != 1) throw std::runtime_error("unsupported snapshot version");
    FieldSnapshot s;
    std::uint32_t taglen = 0;
    detail::read_pod(is, s.nx);
    detail::read_pod(is, s.nz);
    detail::read_pod(is, taglen);
    s.tag.resize(taglen);
    is.read(s.tag.data(), taglen);
    detail::read_pod(is, s.time);
    detail::read_pod(is, s.epsilon);
    detail::read_pod(is, s.period);
    s.z.resize(s.nz);
    is.read(reinterpret_cast<char*>(s.z.data()),
            static_cast<std::streamsize>(sizeof(double) * s.nz));
    s.values.resize(static_cast<std::size_t>(s.nz) * s.nx);
    is.read(reinterpret_cast<char*>(s.values.data()),
            static_cast<std::streamsize>(sizeof(double) * s.values.size()));
    if (!is) throw std::runtime_error("truncated field snapshot");
    return s;
}

inline FieldSnapshot load_field(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path);
    return load_field(is);
}

/// Reattach a snapshot to a grid (shapes must match exactly).
inline ScalarField field_from_snapshot(const FieldSnapshot& s, GridPtr grid) {
    if (static_cast<int>(s.nx) != grid->nx() || static_cast<int>(s.nz) != grid->nz())
        throw std::invalid_argument("snapshot shape does not match grid");
    for (std::size_t j = 0; j < s.z.size(); ++j)
        if (s.z[j] != grid->z()[j])
            throw std::invalid_argument("snapshot z nodes do not match grid");
    ScalarField f(std::move(grid), s.tag);
    f.time = s.time;
    f.epsilon = s.epsilon;
    f.values = s.values;
    return f;
}

inline void save_field_csv(const ScalarField& f, std::ostream& os) {
    char buf[32];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << buf;
    };
    os << "# strata-field-csv 1\n";
    os << "# nx " << f.grid->nx() << "\n# nz " << f.grid->nz() << "\n";
    os << "# tag " << f.tag << "\n";
    os << "# time ";
    put(f.time);
    os << "\n# epsilon ";
    put(f.epsilon);
    os << "\n# period ";
    put(f.grid->period());
    os << "\n# z";
    for (double z : f.grid->z()) {
        os << ' ';
        put(z);
    }
    os << "\n";
    for (int j = 0; j < f.grid->nz(); ++j) {
        for (int i = 0; i < f.grid->nx(); ++i) {
            if (i) os << ',';
            put(f.at(j, i));
        }
        os << "\n";
    }
}

}  // namespace strata
