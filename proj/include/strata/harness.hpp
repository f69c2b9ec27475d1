#pragma once

/**
 * @file harness.hpp
 * @brief Convergence experiments: solver-vs-benchmark grid refinement, the
 *        small-permeability rate for the elliptic benchmark and for the full
 *        dynamics, and the long-run trajectory-distance diagnostic.
 *
 * The dynamic study runs the degenerate solve as the reference and compares
 * runs at each positive permeability against it on identical grids and time
 * steps, then fits the log-log slope of the combined error
 * || (u - u0, psi - psi0) ||_L2 + || p - p0 ||_H1 against the permeability.
 * Because the discrete regular path converges to the discrete degenerate
 * path as the permeability vanishes, the same-grid differences carry no
 * additive discretization floor; the floor gate (points below 10x the
 * measured self-refinement floor are dropped from the fit) therefore tends
 * to over-exclude and is protected: it always keeps at least three points,
 * dropping the smallest permeabilities first, and records what it dropped.
 */

#include <cmath>
#include <future>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "strata/config.hpp"
#include "strata/estimates.hpp"
#include "strata/fields.hpp"
#include "strata/oracle.hpp"
#include "strata/pressure.hpp"
#include "strata/transport.hpp"

namespace strata {

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;       ///< rms residual of the least-squares fit
    int points_used = 0;
    std::vector<double> excluded;  ///< abscissas dropped by the floor gate
};

inline SlopeFit fit_loglog(std::vector<double> xs, std::vector<double> ys,
                           double floor_value = 0.0, int min_points = 3) {
    SlopeFit f;
    // drop gated points smallest-x first, but keep a fittable set
    while (static_cast<int>(xs.size()) > min_points) {
        std::size_t imin = 0;
        for (std::size_t i = 1; i < xs.size(); ++i)
            if (xs[i] < xs[imin]) imin = i;
        if (ys[imin] >= floor_value) break;
        f.excluded.push_back(xs[imin]);
        xs.erase(xs.begin() + imin);
        ys.erase(ys.begin() + imin);
    }
    const std::size_t n = xs.size();
    if (n < 2) return f;
    double mx = 0, my = 0;
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        lx[i] = std::log(xs[i]);
        ly[i] = std::log(ys[i]);
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (lx[i] - mx) * (ly[i] - my);
        den += (lx[i] - mx) * (lx[i] - mx);
    }
    f.slope = num / den;
    f.intercept = my - f.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (f.intercept + f.slope * lx[i]);
        rss += r * r;
    }
    f.residual = std::sqrt(rss / n);
    f.points_used = static_cast<int>(n);
    return f;
}

// ---------------------------------------------------------------------------
// Elliptic benchmark study
// ---------------------------------------------------------------------------

struct EllipticCell {
    int cells = 0;        ///< outer-layer cell count (middle layer doubles it)
    double eps = 0.0;
    double error = 0.0;   ///< H1 distance of mode 1 to the benchmark profile
};

struct EllipticReport {
    std::vector<int> resolutions;
    std::vector<double> eps_list;
    std::vector<EllipticCell> cells;
    std::vector<double> rate_errors;  ///< finest-grid ||p^eps - p^0||_H1
    SlopeFit rate;                    ///< slope of the above against eps
    bool second_order = true;         ///< every refinement ratio in [3.2, 4.8]
    std::vector<double> order_ratios;

    double error_at(int res, double eps) const {
        for (const auto& c : cells)
            if (c.cells == res && c.eps == eps) return c.error;
        return -1.0;
    }
};

namespace harness_detail {

inline LayerStack elliptic_stack(double eps) {
    return build_layer_stack(2.0 * M_PI, 4.0, {-3.0, -1.0}, {1.0, 1.0, 1.0},
                             {1.0, 1.0, 1.0}, std::size_t{1}, eps);
}

inline ScalarField elliptic_forcing(GridPtr grid) {
    ScalarField f(grid, "psi");
    for (int j = 0; j < grid->nz(); ++j) {
        const double p1 = benchmark_forcing(grid->z()[j] + 2.0);
        for (int i = 0; i < grid->nx(); ++i)
            f.at(j, i) = p1 * std::cos(grid->x(i));
    }
    return f;
}

inline double profile_h1(const Grid& g, const std::vector<std::complex<double>>& v,
                         double k) {
    const auto& w = g.trapezoid_weights();
    const auto& h = g.spacings();
    double s = 0.0;
    for (int j = 0; j < g.nz(); ++j) s += w[j] * std::norm(v[j]) * (1.0 + k * k);
    for (int f = 0; f + 1 < g.nz(); ++f) s += std::norm(v[f + 1] - v[f]) / h[f];
    return std::sqrt(s);
}

inline ModeCoefficients elliptic_solve(double eps, GridPtr grid) {
    const auto stack = elliptic_stack(eps);
    const auto psi = elliptic_forcing(grid);
    const auto sol =
        eps == 0.0 ? solve_degenerate(stack, psi) : solve_regular(stack, psi);
    return sol.p_modes;
}

}  // namespace harness_detail

/// Grid-refinement and permeability-rate study on the three-layer benchmark.
inline EllipticReport converge_elliptic(
    std::vector<int> resolutions = {32, 64, 128},
    std::vector<double> eps_list = {3e-2, 1e-2, 3e-3, 1e-3, 3e-4}, int nx = 16) {
    EllipticReport rep;
    rep.resolutions = resolutions;
    rep.eps_list = eps_list;

    std::vector<double> probe_eps = {0.5, 0.1, 0.0};
    for (double eps : probe_eps) {
        std::vector<double> errs;
        for (int res : resolutions) {
            auto grid = make_grid(harness_detail::elliptic_stack(eps),
                                  std::vector<int>{res, 2 * res, res}, nx);
            auto pm = harness_detail::elliptic_solve(eps, grid);
            const auto oc = benchmark_transmission_coefficients(eps);
            std::vector<std::complex<double>> diff(grid->nz());
            for (int j = 0; j < grid->nz(); ++j)
                diff[j] = 2.0 * pm.mode(1)[j] -
                          benchmark_mode_profile(oc, grid->z()[j] + 2.0);
            const double err = harness_detail::profile_h1(*grid, diff, 1.0);
            rep.cells.push_back({res, eps, err});
            errs.push_back(err);
        }
        for (std::size_t i = 0; i + 1 < errs.size(); ++i) {
            const double ratio = errs[i] / errs[i + 1];
            rep.order_ratios.push_back(ratio);
            if (ratio < 3.2 || ratio > 4.8) rep.second_order = false;
        }
    }

    // permeability rate at the finest grid, solver against solver at zero so
    // the discretization cancels
    const int fin = resolutions.back();
    auto grid = make_grid(harness_detail::elliptic_stack(0.0),
                          std::vector<int>{fin, 2 * fin, fin}, nx);
    const auto p0 = harness_detail::elliptic_solve(0.0, grid);
    for (double eps : eps_list) {
        auto pe = harness_detail::elliptic_solve(eps, grid);
        ModeCoefficients d(grid);
        for (std::size_t i = 0; i < d.coeff.size(); ++i)
            d.coeff[i] = pe.coeff[i] - p0.coeff[i];
        rep.rate_errors.push_back(h1_norm(d));
    }
    rep.rate = fit_loglog(eps_list, rep.rate_errors);
    return rep;
}

// ---------------------------------------------------------------------------
// Dynamic (full simulation) study
// ---------------------------------------------------------------------------

struct DynamicErrorRow {
    double eps = 0.0;
    double err_psi = 0.0;     ///< L2 at the horizon
    double err_u = 0.0;       ///< L2 at the horizon, both components
    double err_p = 0.0;       ///< H1 at the horizon
    double combined = 0.0;    ///< err_psi + err_u combined L2 + err_p
    double combined_sup = 0.0;  ///< sup of the combined error over snapshots
};

struct DynamicReport {
    std::vector<DynamicErrorRow> rows;
    SlopeFit slope;           ///< fit of the terminal combined error
    SlopeFit slope_sup;       ///< fit of the sup-over-snapshots error
    double m7 = 0.0;          ///< max over rows of combined / eps
    double m7_sup = 0.0;
    double grid_floor = 0.0;  ///< eps = 0 self-refinement error (when measured)
    bool monotone = true;     ///< errors non-decreasing in eps
    bool ok = true;
    std::string note;
};

namespace harness_detail {

struct RunResult {
    std::vector<FlowState> snaps;
    bool failed = false;
    std::string why;
};

inline RunResult dynamic_run(const ProblemSetup& setup, double eps, double t_end) {
    ProblemSetup s = setup;
    s.sim.t_end = t_end;
    s.sim.adaptive = false;  // identical time grids across the sweep
    const auto stack = s.make_stack(eps);
    const auto grid = s.make_grid_for(stack);
    const auto prof = s.make_profile(stack, *grid);
    auto traj = simulate(stack, prof, grid, s.sim);
    RunResult r;
    r.failed = traj.failed;
    r.why = traj.failure;
    r.snaps = std::move(traj.snapshots);
    return r;
}

/// Error row between matched snapshot sequences.
inline DynamicErrorRow diff_row(double eps, const RunResult& a, const RunResult& b) {
    DynamicErrorRow row;
    row.eps = eps;
    const std::size_t n = std::min(a.snaps.size(), b.snaps.size());
    for (std::size_t i = 1; i < n; ++i) {
        const auto& fa = a.snaps[i];
        const auto& fb = b.snaps[i];
        auto dpsi = fa.psi;
        auto dux = fa.u_x;
        auto duz = fa.u_z;
        auto dp = fa.p;
        for (std::size_t v = 0; v < dpsi.values.size(); ++v) {
            dpsi.values[v] -= fb.psi.values[v];
            dux.values[v] -= fb.u_x.values[v];
            duz.values[v] -= fb.u_z.values[v];
            dp.values[v] -= fb.p.values[v];
        }
        const double epsi = l2_norm(dpsi);
        const double eu = std::sqrt(std::pow(l2_norm(dux), 2) +
                                    std::pow(l2_norm(duz), 2));
        const double ep = h1_norm(to_modes(dp));
        const double comb = std::sqrt(epsi * epsi + eu * eu) + ep;
        row.combined_sup = std::max(row.combined_sup, comb);
        if (i + 1 == n) {
            row.err_psi = epsi;
            row.err_u = eu;
            row.err_p = ep;
            row.combined = comb;
        }
    }
    return row;
}

/// Restrict a field to the coarse grid (every other z node, same x nodes).
inline ScalarField restrict_to(const ScalarField& fine, GridPtr coarse) {
    ScalarField out(coarse, fine.tag);
    out.time = fine.time;
    out.epsilon = fine.epsilon;
    for (int j = 0; j < coarse->nz(); ++j)
        for (int i = 0; i < coarse->nx(); ++i)
            out.at(j, i) = fine.at(2 * j, i);
    return out;
}

}  // namespace harness_detail

/// eps = 0 self-refinement error: the same reference run on the configured
/// grid and on its half-resolution coarsening (dt scaled by four), compared
/// at the horizon on the coarse nodes.
inline double measure_grid_floor(const ProblemSetup& setup, double t_end) {
    using namespace harness_detail;
    for (int c : setup.cells_per_layer)
        if (c % 2 != 0)
            throw std::invalid_argument("floor measurement needs even cell counts");
    auto fine = dynamic_run(setup, 0.0, t_end);
    ProblemSetup half = setup;
    for (int& c : half.cells_per_layer) c /= 2;
    half.sim.dt *= 4.0;
    half.sim.output_every = std::max(1, setup.sim.output_every / 4);
    auto coarse = dynamic_run(half, 0.0, t_end);
    if (fine.failed || coarse.failed) return -1.0;
    const auto& ff = fine.snaps.back();
    const auto& cf = coarse.snaps.back();
    auto rpsi = restrict_to(ff.psi, cf.psi.grid);
    auto rux = restrict_to(ff.u_x, cf.psi.grid);
    auto ruz = restrict_to(ff.u_z, cf.psi.grid);
    auto rp = restrict_to(ff.p, cf.psi.grid);
    for (std::size_t v = 0; v < rpsi.values.size(); ++v) {
        rpsi.values[v] -= cf.psi.values[v];
        rux.values[v] -= cf.u_x.values[v];
        ruz.values[v] -= cf.u_z.values[v];
        rp.values[v] -= cf.p.values[v];
    }
    const double epsi = l2_norm(rpsi);
    const double eu =
        std::sqrt(std::pow(l2_norm(rux), 2) + std::pow(l2_norm(ruz), 2));
    return std::sqrt(epsi * epsi + eu * eu) + h1_norm(to_modes(rp));
}

/// Full dynamic sweep: reference run at zero permeability, one run per
/// positive value, identical grids and time steps. `jobs` > 1 executes the
/// runs in a worker pool (each run is internally deterministic, so results
/// are identical either way).
inline DynamicReport converge_dynamic(const ProblemSetup& setup,
                                      std::vector<double> eps_list, double t_end,
                                      int jobs = 1, bool with_floor = false) {
    using namespace harness_detail;
    DynamicReport rep;
    RunResult ref = dynamic_run(setup, 0.0, t_end);
    if (ref.failed) {
        rep.ok = false;
        rep.note = "reference run failed: " + ref.why;
        return rep;
    }
    std::vector<RunResult> runs(eps_list.size());
    if (jobs > 1) {
        std::vector<std::future<RunResult>> futs;
        futs.reserve(eps_list.size());
        for (double eps : eps_list)
            futs.push_back(std::async(std::launch::async, dynamic_run, setup, eps,
                                      t_end));
        for (std::size_t i = 0; i < futs.size(); ++i) runs[i] = futs[i].get();
    } else {
        for (std::size_t i = 0; i < eps_list.size(); ++i)
            runs[i] = dynamic_run(setup, eps_list[i], t_end);
    }

    std::vector<double> errs, errs_sup;
    for (std::size_t i = 0; i < eps_list.size(); ++i) {
        if (runs[i].failed) {
            rep.ok = false;
            rep.note = "run failed: " + runs[i].why;
            return rep;
        }
        auto row = diff_row(eps_list[i], runs[i], ref);
        rep.rows.push_back(row);
        errs.push_back(row.combined);
        errs_sup.push_back(row.combined_sup);
        rep.m7 = std::max(rep.m7, row.combined / row.eps);
        rep.m7_sup = std::max(rep.m7_sup, row.combined_sup / row.eps);
    }
    // flag non-monotone sequences (rows ordered as given; sort by eps)
    std::vector<std::pair<double, double>> byeps;
    for (const auto& r : rep.rows) byeps.push_back({r.eps, r.combined});
    std::sort(byeps.begin(), byeps.end());
    for (std::size_t i = 0; i + 1 < byeps.size(); ++i)
        if (byeps[i].second > byeps[i + 1].second * (1.0 + 1e-12))
            rep.monotone = false;

    double gate = 0.0;
    if (with_floor) {
        rep.grid_floor = measure_grid_floor(setup, t_end);
        if (rep.grid_floor > 0.0) gate = 10.0 * rep.grid_floor;
    }
    rep.slope = fit_loglog(eps_list, errs, gate);
    rep.slope_sup = fit_loglog(eps_list, errs_sup, gate);
    return rep;
}

/// Long-run trajectory distance: integrate to an absorbed state at zero
/// permeability, then run both permeabilities from it and report the largest
/// L2 distance over the trailing window. A diagnostic, not an assertion.
inline double long_run_distance(const ProblemSetup& setup, double eps,
                                double t_long, double t_window) {
    ProblemSetup s = setup;
    s.sim.adaptive = false;
    const auto stack0 = s.make_stack(0.0);
    const auto grid = s.make_grid_for(stack0);
    const auto prof0 = s.make_profile(stack0, *grid);
    auto consts = compute_constants(stack0, prof0);
    const double t_absorb = std::max(1.0, consts.t1 + 1.0);

    SimConfig warm = s.sim;
    warm.t_end = t_absorb;
    auto warmup = simulate(stack0, prof0, grid, warm);
    if (warmup.failed) throw std::runtime_error("warmup failed: " + warmup.failure);
    const ScalarField absorbed = warmup.final_state().psi;

    auto run_from = [&](double e) {
        const auto stack = s.make_stack(e);
        const auto prof = s.make_profile(stack, *grid);
        Stepper st(stack, prof, grid, s.sim);
        st.set_state(absorbed, 0.0);
        std::vector<std::pair<double, ModeCoefficients>> snaps;
        long step = 0;
        while (st.time() < t_long - 1e-12) {
            st.step();
            ++step;
            if (step % s.sim.output_every == 0 || st.time() >= t_long - 1e-12)
                snaps.push_back({st.time(), st.psi_modes()});
        }
        return snaps;
    };
    auto a = run_from(eps);
    auto b = run_from(0.0);
    double dist = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
        if (a[i].first < t_long - t_window) continue;
        ModeCoefficients d = a[i].second;
        for (std::size_t v = 0; v < d.coeff.size(); ++v)
            d.coeff[v] -= b[i].second.coeff[v];
        dist = std::max(dist, l2_norm(d));
    }
    return dist;
}

// ---------------------------------------------------------------------------
// CSV renderings
// ---------------------------------------------------------------------------

inline void write_elliptic_csv(const EllipticReport& rep, std::ostream& os) {
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "section,cells,eps,value\n";
    for (const auto& c : rep.cells)
        os << "grid_error," << c.cells << ',' << num(c.eps) << ',' << num(c.error)
           << "\n";
    for (std::size_t i = 0; i < rep.order_ratios.size(); ++i)
        os << "order_ratio,,," << num(rep.order_ratios[i]) << "\n";
    for (std::size_t i = 0; i < rep.eps_list.size(); ++i)
        os << "rate_error," << rep.resolutions.back() << ',' << num(rep.eps_list[i])
           << ',' << num(rep.rate_errors[i]) << "\n";
    os << "rate_slope,,," << num(rep.rate.slope) << "\n";
}

inline void write_dynamic_csv(const DynamicReport& rep, std::ostream& os) {
    char buf[32];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    os << "eps,err_psi,err_u,err_p_h1,combined,combined_sup\n";
    for (const auto& r : rep.rows)
        os << num(r.eps) << ',' << num(r.err_psi) << ',' << num(r.err_u) << ','
           << num(r.err_p) << ',' << num(r.combined) << ',' << num(r.combined_sup)
           << "\n";
    os << "# slope_terminal " << num(rep.slope.slope) << "\n";
    os << "# slope_sup " << num(rep.slope_sup.slope) << "\n";
    os << "# m7 " << num(rep.m7) << "\n";
    os << "# m7_sup " << num(rep.m7_sup) << "\n";
    os << "# monotone " << (rep.monotone ? 1 : 0) << "\n";
    if (rep.grid_floor > 0.0) os << "# grid_floor " << num(rep.grid_floor) << "\n";
}

}  // namespace strata
