#pragma once

/**
 * @file transport.hpp
 * @brief IMEX time integration of the shifted concentration equation
 *
 *     psi_t + u . grad(psi) + s'(z) u_z - div(D grad psi) = D s''(z),
 *
 * with s the background profile, u refreshed from the per-mode pressure
 * solve every step.
 *
 * Scheme: diffusion is treated implicitly (Crank-Nicolson, per-mode
 * tridiagonal solves since D depends on z only); advection, the background
 * feedback and the source are explicit second-order Adams-Bashforth. The
 * first step (and the first step after any dt change) is the
 * backward-Euler / forward-Euler pair that bootstraps the multistep history.
 * Advection is evaluated in advective form, pseudo-spectrally in x with 2/3
 * dealiasing and centered differences in z. Wall rows are pinned to zero.
 */

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "strata/diffusion.hpp"
#include "strata/estimates.hpp"
#include "strata/fields.hpp"
#include "strata/geometry.hpp"
#include "strata/grid.hpp"
#include "strata/pressure.hpp"
#include "strata/tridiag.hpp"

namespace strata {

struct InitialCondition {
    enum class Preset { Zero, SingleMode, Random, File };
    Preset preset = Preset::SingleMode;
    double amplitude = 0.1;
    int mode = 1;           ///< horizontal wavenumber index
    int vertical = 1;       ///< vertical half-waves
    std::uint64_t seed = 1; ///< for the random preset
    std::string path;       ///< for the file preset
};

struct SimConfig {
    double dt = 1e-3;
    double t_end = 1.0;
    double cfl = 0.9;              ///< safety factor in the step-size invariant
    bool adaptive = true;          ///< halve dt on violation instead of failing
    bool velocity_off = false;     ///< verification control: pure diffusion+source
    bool single_threaded = true;   ///< bitwise-deterministic mode (the default)
    int output_every = 50;         ///< snapshot cadence in accepted steps
    int diagnostics_every = 1;     ///< record cadence (1 keeps per-step checks exact)
    InitialCondition initial;
};

struct FlowState {
    ScalarField psi, p, u_x, u_z;
    double time = 0.0;
    double epsilon = 0.0;
};

struct Trajectory {
    std::vector<DiagnosticsRecord> diagnostics;
    std::vector<FlowState> snapshots;   ///< cadence states, final state included
    bool failed = false;
    std::string failure;
    double final_dt = 0.0;
    long steps = 0;

    const FlowState& final_state() const { return snapshots.back(); }
};

namespace detail {

/// splitmix64, kept here so randomized initial data reproduce bit-for-bit
/// on any platform.
struct SplitMix64 {
    std::uint64_t state;
    explicit SplitMix64(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        state += 0x9e3779b97f4a7c15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    double sym() { return 2.0 * (static_cast<double>(next() >> 11) * 0x1.0p-53) - 1.0; }
};

}  // namespace detail

inline ScalarField build_initial_condition(GridPtr grid, const InitialCondition& ic) {
    ScalarField f(grid, "psi");
    const double H = grid->depth();
    switch (ic.preset) {
        case InitialCondition::Preset::Zero:
            break;
        case InitialCondition::Preset::SingleMode: {
            const double k = grid->wavenumber(ic.mode);
            for (int j = 0; j < grid->nz(); ++j) {
                const double vert = std::sin(ic.vertical * M_PI * (grid->z()[j] + H) / H);
                for (int i = 0; i < grid->nx(); ++i)
                    f.at(j, i) = ic.amplitude * vert * std::cos(k * grid->x(i));
            }
            break;
        }
        case InitialCondition::Preset::Random: {
            detail::SplitMix64 rng(ic.seed);
            const int nmax = std::min(4, grid->nx() / 3);
            for (int n = 0; n <= nmax; ++n)
                for (int m = 1; m <= 4; ++m) {
                    const double ac = rng.sym() / (1.0 + n + m);
                    const double as = (n == 0) ? 0.0 : rng.sym() / (1.0 + n + m);
                    const double k = grid->wavenumber(n);
                    for (int j = 0; j < grid->nz(); ++j) {
                        const double vert =
                            std::sin(m * M_PI * (grid->z()[j] + H) / H);
                        for (int i = 0; i < grid->nx(); ++i)
                            f.at(j, i) += ic.amplitude * vert *
                                          (ac * std::cos(k * grid->x(i)) +
                                           as * std::sin(k * grid->x(i)));
                    }
                }
            break;
        }
        case InitialCondition::Preset::File: {
            f = field_from_snapshot(load_field(ic.path), grid);
            f.tag = "psi";
            break;
        }
    }
    // homogeneous walls
    for (int i = 0; i < grid->nx(); ++i) {
        f.at(0, i) = 0.0;
        f.at(grid->nz() - 1, i) = 0.0;
    }
    return f;
}

/// One integrator instance: owns the mode-space state and the factored
/// implicit matrices. Immutable inputs are shared; stepping mutates only the
/// instance, so independent instances may run on independent threads.
class Stepper {
public:
    Stepper(LayerStack stack, BackgroundProfile profile, GridPtr grid, SimConfig cfg)
        : stack_(std::move(stack)),
          profile_(std::move(profile)),
          grid_(std::move(grid)),
          cfg_(cfg),
          op_(stack_, grid_),
          psi_(grid_),
          prev_explicit_(grid_),
          p_modes_(grid_),
          ux_modes_(grid_),
          uz_modes_(grid_) {
        if (profile_.z != grid_->z())
            throw std::invalid_argument("background profile grid mismatch");
        const int nk = grid_->num_modes();
        dealias_.assign(nk, 1.0);
        for (int n = 0; n < nk; ++n)
            if (3 * n > grid_->nx()) dealias_[n] = 0.0;
        node_d_ = op_.node_diffusivity();
        set_dt(cfg_.dt);
        set_state(build_initial_condition(grid_, cfg_.initial), 0.0);
    }

    const Grid& grid() const { return *grid_; }
    const LayerStack& stack() const { return stack_; }
    const DiffusionOperator& diffusion() const { return op_; }
    double time() const { return time_; }
    double dt() const { return dt_; }

    void set_state(const ScalarField& psi, double t) {
        psi_ = to_modes(psi);
        pin_walls(psi_);
        time_ = t;
        have_history_ = false;
        refresh_flow();
    }

    /// Velocity magnitude bound for the step-size invariant.
    double max_velocity() const {
        double m = 0.0;
        for (const auto& v : ux_phys_.values) m = std::max(m, std::abs(v));
        for (const auto& v : uz_phys_.values) m = std::max(m, std::abs(v));
        return m;
    }

    /// dt admissible per the invariant dt <= cfl min(dx/max|u|, dz^2/max D).
    double admissible_dt() const {
        const double dparab =
            grid_->min_spacing() * grid_->min_spacing() / stack_.max_diffusivity();
        const double umax = max_velocity();
        const double dadv =
            umax > 0.0 ? grid_->dx() / umax : std::numeric_limits<double>::infinity();
        return cfg_.cfl * std::min(dparab, dadv);
    }

    /// Advance one accepted step. In adaptive mode dt halves until the
    /// invariant holds (each change re-bootstraps the multistep history);
    /// otherwise a violation throws.
    void step() {
        while (dt_ > admissible_dt()) {
            if (!cfg_.adaptive)
                throw std::runtime_error("step-size invariant violated");
            set_dt(0.5 * dt_);
        }
        advance(dt_);
    }

    /// Advance by a specific dt (used for the final partial step).
    void advance(double dt) {
        if (dt != dt_) set_dt(dt);
        const ModeCoefficients expl = explicit_term();
        const int nz = grid_->nz();
        std::vector<std::complex<double>> rhs(nz);
        for (int n = 0; n < grid_->num_modes(); ++n) {
            const auto* cur = psi_.mode(n);
            const auto* ex = expl.mode(n);
            const auto* exp_prev = prev_explicit_.mode(n);
            if (!have_history_) {
                // backward-Euler / forward-Euler bootstrap
                for (int j = 0; j < nz; ++j) rhs[j] = cur[j] / dt_ + ex[j];
                rhs[0] = 0.0;
                rhs[nz - 1] = 0.0;
                be_[n].solve(rhs);
            } else {
                // Crank-Nicolson + Adams-Bashforth 2
                op_.apply_mode(grid_->wavenumber(n), cur, lbuf_.data());
                for (int j = 0; j < nz; ++j)
                    rhs[j] = cur[j] / dt_ - 0.5 * lbuf_[j] + 1.5 * ex[j] -
                             0.5 * exp_prev[j];
                rhs[0] = 0.0;
                rhs[nz - 1] = 0.0;
                cn_[n].solve(rhs);
            }
            for (int j = 0; j < nz; ++j) psi_.mode(n)[j] = rhs[j];
        }
        prev_explicit_ = expl;
        have_history_ = true;
        time_ += dt_;
        refresh_flow();
    }

    DiagnosticsRecord diagnostics_record(double dt_used) const {
        return make_record(op_, stack_, psi_, p_modes_, ux_modes_, uz_modes_, time_,
                           dt_used);
    }

    FlowState state() const {
        FlowState s;
        s.psi = from_modes(psi_, "psi");
        s.p = from_modes(p_modes_, "p");
        s.u_x = from_modes(ux_modes_, "u_x");
        s.u_z = from_modes(uz_modes_, "u_z");
        s.time = time_;
        s.epsilon = stack_.epsilon;
        s.psi.time = s.p.time = s.u_x.time = s.u_z.time = time_;
        s.psi.epsilon = s.p.epsilon = s.u_x.epsilon = s.u_z.epsilon = stack_.epsilon;
        return s;
    }

    const ModeCoefficients& psi_modes() const { return psi_; }
    const ModeCoefficients& pressure_modes() const { return p_modes_; }

    /// N = -(u . grad psi) - s' u_z + D s'' for the current state (the
    /// explicit part of the update), dealiased; exposed as a diagnostic.
    ModeCoefficients explicit_term() const {
        const int nz = grid_->nz(), nx = grid_->nx();
        ModeCoefficients dx_modes(grid_);
        for (int n = 0; n < grid_->num_modes(); ++n) {
            const double k = grid_->wavenumber(n);
            const std::complex<double> ik{0.0, k};
            for (int j = 0; j < nz; ++j)
                dx_modes.mode(n)[j] = ik * psi_.mode(n)[j] * dealias_[n];
        }
        const ScalarField psi_phys = from_modes(masked(psi_), "psi");
        const ScalarField dxpsi = from_modes(dx_modes, "dxpsi");
        const ScalarField dzpsi = vertical_derivative(psi_phys);

        ScalarField n_phys(grid_, "N");
        for (int j = 1; j + 1 < nz; ++j) {
            const double sp = profile_.slope[j];
            const double src = node_d_[j] * profile_.curvature[j];
            for (int i = 0; i < nx; ++i) {
                const double adv = ux_phys_.at(j, i) * dxpsi.at(j, i) +
                                   uz_phys_.at(j, i) * dzpsi.at(j, i);
                n_phys.at(j, i) = -adv - sp * uz_phys_.at(j, i) + src;
            }
        }
        ModeCoefficients n_modes = to_modes(n_phys);
        for (int n = 0; n < grid_->num_modes(); ++n)
            if (dealias_[n] == 0.0)
                for (int j = 0; j < nz; ++j) n_modes.mode(n)[j] = 0.0;
        pin_walls(n_modes);
        return n_modes;
    }

    bool finite() const {
        for (const auto& c : psi_.coeff)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) return false;
        return true;
    }

private:
    void set_dt(double dt) {
        dt_ = dt;
        have_history_ = false;
        const int nk = grid_->num_modes();
        be_.clear();
        cn_.clear();
        be_.reserve(nk);
        cn_.reserve(nk);
        std::vector<double> lo, di, up;
        for (int n = 0; n < nk; ++n) {
            op_.bands(grid_->wavenumber(n), lo, di, up);
            std::vector<double> dlo = lo, ddi = di, dup = up;
            const int nz = grid_->nz();
            for (int j = 1; j + 1 < nz; ++j) ddi[j] += 1.0 / dt_;
            be_.emplace_back(dlo, ddi, dup);
            std::vector<double> clo = lo, cdi = di, cup = up;
            for (int j = 1; j + 1 < nz; ++j) {
                clo[j] *= 0.5;
                cup[j] *= 0.5;
                cdi[j] = 0.5 * di[j] + 1.0 / dt_;
            }
            cn_.emplace_back(clo, cdi, cup);
        }
        lbuf_.assign(grid_->nz(), {0.0, 0.0});
    }

    void pin_walls(ModeCoefficients& m) const {
        for (int n = 0; n < grid_->num_modes(); ++n) {
            m.mode(n)[0] = 0.0;
            m.mode(n)[grid_->nz() - 1] = 0.0;
        }
    }

    void refresh_flow() {
        if (cfg_.velocity_off) {
            for (auto& c : p_modes_.coeff) c = 0.0;
            for (auto& c : ux_modes_.coeff) c = 0.0;
            for (auto& c : uz_modes_.coeff) c = 0.0;
        } else {
            std::vector<double> residuals;
            p_modes_ = solve_pressure_modes(stack_, grid_, psi_, residuals);
            velocity_modes(stack_, *grid_, p_modes_, psi_, ux_modes_, uz_modes_);
        }
        ux_phys_ = from_modes(masked(ux_modes_), "u_x");
        uz_phys_ = from_modes(masked(uz_modes_), "u_z");
    }

    ModeCoefficients masked(const ModeCoefficients& m) const {
        ModeCoefficients out = m;
        for (int n = 0; n < grid_->num_modes(); ++n)
            if (dealias_[n] == 0.0)
                for (int j = 0; j < grid_->nz(); ++j) out.mode(n)[j] = 0.0;
        return out;
    }

    LayerStack stack_;
    BackgroundProfile profile_;
    GridPtr grid_;
    SimConfig cfg_;
    DiffusionOperator op_;
    std::vector<double> dealias_;
    std::vector<double> node_d_;
    std::vector<Tridiagonal> be_, cn_;
    ModeCoefficients psi_, prev_explicit_, p_modes_, ux_modes_, uz_modes_;
    ScalarField ux_phys_, uz_phys_;
    std::vector<std::complex<double>> lbuf_;
    bool have_history_ = false;
    double time_ = 0.0;
    double dt_ = 1e-3;
};

/// Integrate to t_end, recording diagnostics and cadence snapshots.
/// Deterministic for a fixed config. On blow-up the partial trajectory is
/// returned with the failure flagged.
inline Trajectory simulate(const LayerStack& stack, const BackgroundProfile& profile,
                           GridPtr grid, const SimConfig& cfg) {
    Stepper st(stack, profile, grid, cfg);
    Trajectory traj;
    traj.diagnostics.push_back(st.diagnostics_record(cfg.dt));
    traj.snapshots.push_back(st.state());
    const double t_end = cfg.t_end;
    long step = 0;
    while (st.time() < t_end - 1e-12 * std::max(1.0, t_end)) {
        const double remaining = t_end - st.time();
        try {
            if (remaining < st.dt() * (1.0 - 1e-12)) {
                st.advance(remaining);
            } else {
                st.step();
            }
        } catch (const std::exception& e) {
            traj.failed = true;
            traj.failure = e.what();
            break;
        }
        ++step;
        if (!st.finite()) {
            traj.failed = true;
            traj.failure = "non-finite state at t = " + std::to_string(st.time());
            break;
        }
        if (cfg.diagnostics_every > 0 && step % cfg.diagnostics_every == 0)
            traj.diagnostics.push_back(st.diagnostics_record(st.dt()));
        if (cfg.output_every > 0 && step % cfg.output_every == 0)
            traj.snapshots.push_back(st.state());
    }
    traj.steps = step;
    traj.final_dt = st.dt();
    if (traj.snapshots.empty() || traj.snapshots.back().time != st.time())
        traj.snapshots.push_back(st.state());
    return traj;
}

/// Inequality checks over a trajectory (see estimates.hpp).
inline TrajectoryCheckReport check_trajectory(const Trajectory& traj,
                                              const EstimateConstants& consts,
                                              const Grid& grid,
                                              double tol_scale = 10.0) {
    const double h = std::max(grid.max_spacing(), grid.dx());
    return check_diagnostics(traj.diagnostics, consts, h, tol_scale);
}

}  // namespace strata
