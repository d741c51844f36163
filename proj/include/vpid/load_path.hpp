#pragma once

//! \file load_path.hpp
//! \brief Piecewise-linear traction histories for the two cyclic load cases.

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "vpid/csv.hpp"
#include "vpid/errors.hpp"
#include "vpid/sym_tensor.hpp"

namespace vpid {

struct Traction {
    double normal = 0.0;   //!< normal traction on the front face [Pa]
    double inplane = 0.0;  //!< in-plane traction on the front face [Pa]
};

struct LoadKnot {
    double t = 0.0;
    Traction f;
};

//! \brief Linearly interpolated traction history
class LoadPath {
  public:
    LoadPath() = default;
    //! \param period cycle length used to check time resolution; 0 when the path is not cyclic
    LoadPath(std::string label, std::vector<LoadKnot> knots, double period = 0.0)
        : label_(std::move(label)), knots_(std::move(knots)), period_(period) {
        if (knots_.empty() || knots_.front().t != 0.0) throw InvalidArgument("load path must start at t = 0");
        for (std::size_t i = 1; i < knots_.size(); ++i)
            if (!(knots_[i].t > knots_[i - 1].t)) throw InvalidArgument("load path knot times must increase");
    }

    const std::string& label() const { return label_; }
    const std::vector<LoadKnot>& knots() const { return knots_; }
    double duration() const { return knots_.empty() ? 0.0 : knots_.back().t; }
    double period() const { return period_; }

    //! Linear interpolant; constant extrapolation outside the knot range.
    Traction operator()(double t) const {
        if (knots_.empty()) return {};
        if (t <= knots_.front().t) return knots_.front().f;
        if (t >= knots_.back().t) return knots_.back().f;
        const auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                                         [](double v, const LoadKnot& k) { return v < k.t; });
        const LoadKnot& b = *it;
        const LoadKnot& a = *(it - 1);
        const double w = (t - a.t) / (b.t - a.t);
        return {a.f.normal + w * (b.f.normal - a.f.normal), a.f.inplane + w * (b.f.inplane - a.f.inplane)};
    }

  private:
    std::string label_;
    std::vector<LoadKnot> knots_;
    double period_ = 0.0;
};

namespace detail {

inline void check_waveform_args(double amplitude_n, double amplitude_t, double period, int n_cycles) {
    if (amplitude_n < 0.0 || amplitude_t < 0.0) throw InvalidArgument("amplitudes must be non-negative");
    if (!(period > 0.0)) throw InvalidArgument("period must be positive");
    if (n_cycles < 1) throw InvalidArgument("n_cycles must be at least 1");
}

//! Triangular wave knots 0, +1, -1, 0 at quarter/three-quarter period, both channels in phase.
inline std::vector<LoadKnot> triangular_knots(double amplitude_n, double amplitude_t, double period, int n_cycles) {
    static constexpr double phase[] = {0.25, 0.75, 1.0};
    static constexpr double shape[] = {1.0, -1.0, 0.0};
    std::vector<LoadKnot> knots{{0.0, {}}};
    for (int c = 0; c < n_cycles; ++c)
        for (int j = 0; j < 3; ++j)
            knots.push_back({(c + phase[j]) * period, {shape[j] * amplitude_n, shape[j] * amplitude_t}});
    return knots;
}

}  // namespace detail

//! Constant-amplitude triangular cycles.
inline LoadPath build_case1(double amplitude_n, double amplitude_t, double period, int n_cycles) {
    detail::check_waveform_args(amplitude_n, amplitude_t, period, n_cycles);
    return LoadPath("case1", detail::triangular_knots(amplitude_n, amplitude_t, period, n_cycles), period);
}

//! Case-1 knots scaled by the linear envelope t / (n_cycles period).
inline LoadPath build_case2(double amplitude_n, double amplitude_t, double period, int n_cycles) {
    detail::check_waveform_args(amplitude_n, amplitude_t, period, n_cycles);
    auto knots = detail::triangular_knots(amplitude_n, amplitude_t, period, n_cycles);
    const double total = period * n_cycles;
    for (auto& k : knots) {
        const double env = k.t / total;
        k.f.normal *= env;
        k.f.inplane *= env;
    }
    return LoadPath("case2", std::move(knots), period);
}

//! Front-face normal along axis 3, in-plane direction along axis 1.
constexpr SymTensor2 traction_to_stress(double f_normal, double f_inplane) {
    return {0.0, 0.0, f_normal, 0.0, f_inplane, 0.0};
}

inline SymTensor2 traction_to_stress(const Traction& f) { return traction_to_stress(f.normal, f.inplane); }

//! Samples the path on a uniform grid of spacing dt (knots are exact when they fall on the grid).
inline void write_load_path_csv(std::ostream& os, const LoadPath& path, double dt) {
    csv::write_row(os, std::vector<std::string>{"time_s", "f_normal_Pa", "f_inplane_Pa"});
    const auto n = static_cast<long>(std::llround(std::ceil(path.duration() / dt - 1e-9)));
    for (long i = 0; i <= n; ++i) {
        const double t = i == n ? path.duration() : static_cast<double>(i) * dt;
        const Traction f = path(t);
        csv::write_row(os, std::vector<double>{t, f.normal, f.inplane});
    }
}

}  // namespace vpid
