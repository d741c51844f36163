#pragma once

//! \file integrator.hpp
//! \brief Stress-driven time integration of the Chaboche internal variables.
//!
//! Each output step [t0, t1] sees a stress that varies linearly between the
//! history values at its ends. Inside a step the integrator splits at the
//! instants where the over-stress changes sign, so every Runge-Kutta stage is
//! evaluated on one smooth branch of the <.> bracket:
//!
//!  - elastic branch: the internal state is frozen; the over-stress is a convex
//!    function of time (norm of an affine tensor path), so a sign change is
//!    detected from the step end value alone and located by bisection;
//!  - plastic branch: classical RK4, optionally with step-doubling error control;
//!    an exit from the plastic branch is located by bisection on the substep length.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "vpid/chaboche.hpp"
#include "vpid/csv.hpp"
#include "vpid/errors.hpp"
#include "vpid/sym_tensor.hpp"

namespace vpid {

struct IntegratorOptions {
    double dt = 0.01;          //!< output step [s]
    bool adaptive = true;      //!< error-controlled substepping in plastic branches
    double rel_tol = 1e-8;     //!< local relative error target per substep
    int max_halvings = 40;     //!< minimum substep is dt / 2^max_halvings
    int store_every = 1;       //!< store every n-th output step (the final step is always stored)

    friend bool operator==(const IntegratorOptions&, const IntegratorOptions&) = default;
};

struct TrajectoryPoint {
    double t = 0.0;
    SymTensor2 sigma;
    SymTensor2 eps;  //!< total strain, elastic + viscoplastic
    InternalState state;
};

using Trajectory = std::vector<TrajectoryPoint>;

namespace detail {

inline InternalState advance_state(const InternalState& s, const RateBundle& r, double h) {
    InternalState out;
    out.eps_vp = s.eps_vp + r.d_eps_vp * h;
    out.r = s.r + r.d_r * h;
    out.chi = s.chi + r.d_chi * h;
    out.p = s.p + r.d_p * h;
    return out;
}

//! Linear stress ramp over one output step.
struct StressRamp {
    double t0;
    double t1;
    SymTensor2 s0;
    SymTensor2 s1;

    SymTensor2 operator()(double t) const {
        if (t1 <= t0) return s1;
        const double a = (t - t0) / (t1 - t0);
        return s0 + (s1 - s0) * a;
    }
};

inline double yield_function(const MaterialParams& params, const SymTensor2& sigma, const InternalState& s) {
    return overstress(equivalent_stress(sigma, s.chi), s.r, params.sigma_y);
}

inline InternalState rk4(const MaterialParams& params, const StressRamp& ramp, double t, const InternalState& y,
                         double h) {
    const SymTensor2 s_mid = ramp(t + 0.5 * h);
    const RateBundle k1 = state_rates(params, ramp(t), y);
    const RateBundle k2 = state_rates(params, s_mid, advance_state(y, k1, 0.5 * h));
    const RateBundle k3 = state_rates(params, s_mid, advance_state(y, k2, 0.5 * h));
    const RateBundle k4 = state_rates(params, ramp(t + h), advance_state(y, k3, h));
    RateBundle sum;
    sum.d_eps_vp = k1.d_eps_vp + (k2.d_eps_vp + k3.d_eps_vp) * 2.0 + k4.d_eps_vp;
    sum.d_r = k1.d_r + 2.0 * (k2.d_r + k3.d_r) + k4.d_r;
    sum.d_chi = k1.d_chi + (k2.d_chi + k3.d_chi) * 2.0 + k4.d_chi;
    sum.d_p = k1.d_p + 2.0 * (k2.d_p + k3.d_p) + k4.d_p;
    return advance_state(y, sum, h / 6.0);
}

//! Scaled max-norm of the difference between two states.
inline double relative_difference(const MaterialParams& params, const InternalState& a, const InternalState& b) {
    const double strain_ref = params.sigma_y / params.youngs_modulus();
    const double stress_ref = params.sigma_y;
    double err = 0.0;
    auto acc = [&err](double x, double y, double ref) {
        err = std::max(err, std::abs(x - y) / (std::abs(y) + ref));
    };
    for (std::size_t i = 0; i < SymTensor2::size; ++i) {
        acc(a.eps_vp[i], b.eps_vp[i], strain_ref);
        acc(a.chi[i], b.chi[i], stress_ref);
    }
    acc(a.r, b.r, stress_ref);
    acc(a.p, b.p, strain_ref);
    return err;
}

class StepAdvancer {
  public:
    StepAdvancer(const MaterialParams& params, const IntegratorOptions& options)
        : params_(params), options_(options) {}

    //! Advances the state across one output step.
    InternalState advance(const StressRamp& ramp, InternalState y) {
        const double t1 = ramp.t1;
        const double span = ramp.t1 - ramp.t0;
        const double t_eps = 1e-14 * std::max(1.0, std::abs(t1));
        const double min_h = span * std::ldexp(1.0, -options_.max_halvings);
        double t = ramp.t0;
        bool plastic = yield_function(params_, ramp(t), y) > 0.0;
        int guard = 0;
        while (t1 - t > t_eps) {
            if (++guard > 1000000) throw StepRejected("too many substeps in one output step at t=" + csv::format(t));
            if (!plastic) {
                if (yield_function(params_, ramp(t1), y) <= 0.0) return y;
                t = locate_entry(ramp, y, t, t1);
                plastic = true;
                continue;
            }
            double h = std::min(h_hint_ > 0.0 ? h_hint_ : span, t1 - t);
            if (t1 - (t + h) < t_eps) h = t1 - t;
            InternalState next;
            if (options_.adaptive) {
                while (true) {
                    const InternalState full = rk4(params_, ramp, t, y, h);
                    next = double_step(ramp, t, y, h);
                    const double err = relative_difference(params_, full, next) / 15.0;
                    if (err <= options_.rel_tol) {
                        const double grow = err > 0.0 ? 0.9 * std::pow(options_.rel_tol / err, 0.2) : 2.0;
                        h_hint_ = h * std::clamp(grow, 1.0, 2.0);
                        break;
                    }
                    h *= std::clamp(0.9 * std::pow(options_.rel_tol / err, 0.2), 0.1, 0.5);
                    if (h < min_h)
                        throw StepRejected("local error target " + csv::format(options_.rel_tol) +
                                           " not met at minimum substep near t=" + csv::format(t));
                }
            } else {
                next = rk4(params_, ramp, t, y, h);
            }
            if (yield_function(params_, ramp(t + h), next) < 0.0) {
                const double h_exit = locate_exit(ramp, y, t, h);
                y = step(ramp, t, y, h_exit);
                t += h_exit;
                plastic = false;
                continue;
            }
            y = next;
            t += h;
        }
        return y;
    }

  private:
    InternalState double_step(const StressRamp& ramp, double t, const InternalState& y, double h) const {
        const InternalState half = rk4(params_, ramp, t, y, 0.5 * h);
        return rk4(params_, ramp, t + 0.5 * h, half, 0.5 * h);
    }

    InternalState step(const StressRamp& ramp, double t, const InternalState& y, double h) const {
        return options_.adaptive ? double_step(ramp, t, y, h) : rk4(params_, ramp, t, y, h);
    }

    //! First instant in (lo, hi] with positive over-stress; state frozen.
    double locate_entry(const StressRamp& ramp, const InternalState& y, double lo, double hi) const {
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++i) {
            const double mid = 0.5 * (lo + hi);
            if (yield_function(params_, ramp(mid), y) > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    //! Substep length at which the plastic branch exits, on the elastic side.
    double locate_exit(const StressRamp& ramp, const InternalState& y, double t, double h) const {
        double lo = 0.0;
        double hi = h;
        for (int i = 0; i < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(t + hi)); ++i) {
            const double mid = 0.5 * (lo + hi);
            if (yield_function(params_, ramp(t + mid), step(ramp, t, y, mid)) < 0.0)
                hi = mid;
            else
                lo = mid;
        }
        return hi;
    }

    const MaterialParams& params_;
    const IntegratorOptions& options_;
    double h_hint_ = 0.0;
};

}  // namespace detail

//! \brief Integrates the internal variables along a prescribed stress history
//! \param history callable t -> SymTensor2, defined on [0, t_end]
//! \throws StepRejected when adaptive substepping fails
template <typename StressHistory>
Trajectory integrate_stress_driven(const MaterialParams& params, StressHistory&& history, double t_end,
                                   const IntegratorOptions& options = {}) {
    if (!(options.dt > 0.0)) throw InvalidArgument("dt must be positive");
    if (!(t_end >= options.dt * (1.0 - 1e-12))) throw InvalidArgument("t_end must be at least dt");
    if (options.store_every < 1) throw InvalidArgument("store_every must be at least 1");

    const auto n_steps = static_cast<std::size_t>(std::llround(std::ceil(t_end / options.dt - 1e-9)));
    Trajectory traj;
    traj.reserve(n_steps / static_cast<std::size_t>(options.store_every) + 2);

    auto record = [&](double t, const SymTensor2& sigma, const InternalState& s) {
        traj.push_back({t, sigma, hooke_inverse(params, sigma) + s.eps_vp, s});
    };

    detail::StepAdvancer advancer(params, options);
    InternalState state;
    SymTensor2 s_prev = history(0.0);
    record(0.0, s_prev, state);
    for (std::size_t i = 1; i <= n_steps; ++i) {
        const double t0 = static_cast<double>(i - 1) * options.dt;
        const double t1 = i == n_steps ? t_end : static_cast<double>(i) * options.dt;
        const SymTensor2 s_next = history(t1);
        state = advancer.advance(detail::StressRamp{t0, t1, s_prev, s_next}, state);
        s_prev = s_next;
        if (i % static_cast<std::size_t>(options.store_every) == 0 || i == n_steps) record(t1, s_next, state);
    }
    return traj;
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
    static constexpr const char* suffix[] = {"11", "22", "33", "12", "13", "23"};
    std::vector<std::string> header{"time_s"};
    for (const char* s : suffix) header.push_back(std::string("sig") + s);
    for (const char* s : suffix) header.push_back(std::string("eps") + s);
    for (const char* s : suffix) header.push_back(std::string("epsvp") + s);
    header.emplace_back("R_Pa");
    for (const char* s : suffix) header.push_back(std::string("chi") + s);
    header.emplace_back("p");
    csv::write_row(os, header);

    std::vector<double> row;
    for (const auto& pt : traj) {
        row.clear();
        row.push_back(pt.t);
        for (double v : pt.sigma.components()) row.push_back(v);
        for (double v : pt.eps.components()) row.push_back(v);
        for (double v : pt.state.eps_vp.components()) row.push_back(v);
        row.push_back(pt.state.r);
        for (double v : pt.state.chi.components()) row.push_back(v);
        row.push_back(pt.state.p);
        csv::write_row(os, row);
    }
}

}  // namespace vpid
