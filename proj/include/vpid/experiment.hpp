#pragma once

//! \file experiment.hpp
//! \brief Virtual experiments on a homogeneous-stress material point: displacement
//! observations, noisy measurements and principal-stress exports.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "vpid/chaboche.hpp"
#include "vpid/csv.hpp"
#include "vpid/errors.hpp"
#include "vpid/integrator.hpp"
#include "vpid/load_path.hpp"

namespace vpid {

//! \brief Front-face node displacements at the sample times
struct ObservationSet {
    std::vector<double> times;
    std::vector<double> u_normal;   //!< [m]
    std::vector<double> u_inplane;  //!< [m]

    std::size_t size() const { return times.size(); }

    //! Interleaved [u_n(t1), u_t(t1), u_n(t2), ...]
    std::vector<double> stacked() const {
        std::vector<double> out;
        out.reserve(2 * times.size());
        for (std::size_t i = 0; i < times.size(); ++i) {
            out.push_back(u_normal[i]);
            out.push_back(u_inplane[i]);
        }
        return out;
    }
};

struct ExperimentOptions {
    IntegratorOptions integrator;
    int n_obs = 60;            //!< samples per channel
    double edge_length = 1.0;  //!< [m]

    friend bool operator==(const ExperimentOptions&, const ExperimentOptions&) = default;
};

struct ExperimentResult {
    ObservationSet obs;
    Trajectory trajectory;
};

//! Indices into a trajectory of n_steps + 1 points for n_obs equally spaced samples (t = 0 excluded).
inline std::vector<std::size_t> sample_indices(std::size_t n_steps, int n_obs) {
    std::vector<std::size_t> idx;
    idx.reserve(static_cast<std::size_t>(n_obs));
    for (int i = 1; i <= n_obs; ++i)
        idx.push_back(static_cast<std::size_t>(
            std::llround(static_cast<double>(i) * static_cast<double>(n_steps) / static_cast<double>(n_obs))));
    return idx;
}

//! \brief Integrates the material point under the path and samples node displacements
//! \details u_normal = eps33 L, u_inplane = 2 eps13 L (engineering shear).
inline ExperimentResult run_experiment(const MaterialParams& params, const LoadPath& path,
                                       const ExperimentOptions& options = {}) {
    if (options.n_obs < 1) throw InvalidArgument("n_obs must be at least 1");
    if (!(options.edge_length > 0.0)) throw InvalidArgument("edge_length must be positive");
    if (path.period() > 0.0 && options.integrator.dt > path.period() / 100.0 * (1.0 + 1e-12))
        throw InvalidArgument("dt does not resolve the load path (need at least 100 steps per cycle)");

    IntegratorOptions iopt = options.integrator;
    iopt.store_every = 1;
    ExperimentResult out;
    out.trajectory = integrate_stress_driven(
        params, [&path](double t) { return traction_to_stress(path(t)); }, path.duration(), iopt);

    const std::size_t n_steps = out.trajectory.size() - 1;
    for (std::size_t i : sample_indices(n_steps, options.n_obs)) {
        const auto& pt = out.trajectory[i];
        out.obs.times.push_back(pt.t);
        out.obs.u_normal.push_back(pt.eps(2, 2) * options.edge_length);
        out.obs.u_inplane.push_back(2.0 * pt.eps(0, 2) * options.edge_length);
    }
    return out;
}

//! \brief Additive Gaussian measurement error with diagonal covariance
struct NoiseModel {
    double relative_std = 0.01;   //!< fraction of the per-channel RMS
    double absolute_floor = 0.0;  //!< [m]
    std::uint64_t seed = 20180701;

    friend bool operator==(const NoiseModel&, const NoiseModel&) = default;
};

struct Measurement {
    std::vector<double> z;            //!< stacked like ObservationSet::stacked()
    std::vector<double> c_eps;        //!< diagonal of the noise covariance
    double std_normal = 0.0;          //!< per-channel noise std [m]
    double std_inplane = 0.0;
};

inline double rms(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s / static_cast<double>(v.size()));
}

//! \throws InvalidArgument if a channel ends up with zero noise variance
inline Measurement synthesize_measurement(const ObservationSet& obs, const NoiseModel& noise) {
    if (obs.size() == 0) throw InvalidArgument("observation set is empty");
    if (noise.relative_std < 0.0 || noise.absolute_floor < 0.0)
        throw InvalidArgument("noise parameters must be non-negative");
    Measurement m;
    m.std_normal = noise.relative_std * rms(obs.u_normal) + noise.absolute_floor;
    m.std_inplane = noise.relative_std * rms(obs.u_inplane) + noise.absolute_floor;
    if (!(m.std_normal > 0.0) || !(m.std_inplane > 0.0))
        throw InvalidArgument("measurement covariance must be positive; set absolute_floor > 0");

    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    m.z = obs.stacked();
    m.c_eps.resize(m.z.size());
    for (std::size_t i = 0; i < m.z.size(); ++i) {
        const double sd = i % 2 == 0 ? m.std_normal : m.std_inplane;
        m.c_eps[i] = sd * sd;
        m.z[i] += sd * normal(rng);
    }
    return m;
}

//! \brief One row of the principal-stress export
struct PrincipalRow {
    double t = 0.0;
    double s1 = 0.0;  //!< largest principal stress
    double s2 = 0.0;
    double s3 = 0.0;
    double cylinder_radius = 0.0;  //!< sqrt(2/3) (sigma_y + R)
    bool outside_yield = false;
};

struct PrincipalExport {
    std::vector<PrincipalRow> rows;
    double outside_fraction = 0.0;  //!< fraction of stored steps with positive over-stress
    int transitions = 0;            //!< elastic-to-plastic switches along the trajectory
};

//! Eigenvalues of a symmetric tensor in descending order.
inline std::array<double, 3> principal_stresses(const SymTensor2& s) {
    Eigen::Matrix3d m;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) m(i, j) = s(i, j);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(m, Eigen::EigenvaluesOnly);
    const Eigen::Vector3d ev = solver.eigenvalues();  // ascending
    return {ev(2), ev(1), ev(0)};
}

inline PrincipalExport export_principal_trajectory(const Trajectory& traj, const MaterialParams& params) {
    PrincipalExport out;
    out.rows.reserve(traj.size());
    bool prev = false;
    std::size_t outside = 0;
    for (const auto& pt : traj) {
        PrincipalRow row;
        row.t = pt.t;
        const auto ps = principal_stresses(pt.sigma);
        row.s1 = ps[0];
        row.s2 = ps[1];
        row.s3 = ps[2];
        row.cylinder_radius = std::sqrt(2.0 / 3.0) * (params.sigma_y + pt.state.r);
        row.outside_yield =
            overstress(equivalent_stress(pt.sigma, pt.state.chi), pt.state.r, params.sigma_y) > 0.0;
        if (row.outside_yield) {
            ++outside;
            if (!prev) ++out.transitions;
        }
        prev = row.outside_yield;
        out.rows.push_back(row);
    }
    if (!traj.empty()) out.outside_fraction = static_cast<double>(outside) / static_cast<double>(traj.size());
    return out;
}

//! Stress work per unit volume, trapezoidal sum of sigma : d eps over [t_begin, t_end].
inline double stress_work(const Trajectory& traj, double t_begin, double t_end) {
    double w = 0.0;
    for (std::size_t i = 1; i < traj.size(); ++i) {
        if (traj[i - 1].t < t_begin || traj[i].t > t_end) continue;
        const SymTensor2 mean_sigma = (traj[i].sigma + traj[i - 1].sigma) * 0.5;
        w += ddot(mean_sigma, traj[i].eps - traj[i - 1].eps);
    }
    return w;
}

inline void write_observations_csv(std::ostream& os, const ObservationSet& obs) {
    csv::write_row(os, std::vector<std::string>{"time_s", "u_normal_m", "u_inplane_m"});
    for (std::size_t i = 0; i < obs.size(); ++i)
        csv::write_row(os, std::vector<double>{obs.times[i], obs.u_normal[i], obs.u_inplane[i]});
}

inline void write_measurement_csv(std::ostream& os, const ObservationSet& obs, const Measurement& m,
                                  const NoiseModel& noise) {
    os << "# seed=" << noise.seed << " relative_std=" << csv::format(noise.relative_std) << '\n';
    csv::write_row(os, std::vector<std::string>{"time_s", "u_normal_m", "u_inplane_m", "z_normal_m", "z_inplane_m"});
    for (std::size_t i = 0; i < obs.size(); ++i)
        csv::write_row(os, std::vector<double>{obs.times[i], obs.u_normal[i], obs.u_inplane[i], m.z[2 * i],
                                               m.z[2 * i + 1]});
}

inline void write_principal_csv(std::ostream& os, const PrincipalExport& pe) {
    csv::write_row(os, std::vector<std::string>{"time_s", "s1_Pa", "s2_Pa", "s3_Pa", "cylinder_radius_Pa",
                                                "outside_yield"});
    for (const auto& r : pe.rows)
        csv::write_row(os, std::vector<double>{r.t, r.s1, r.s2, r.s3, r.cylinder_radius, r.outside_yield ? 1.0 : 0.0});
    os << "# outside_fraction=" << csv::format(pe.outside_fraction) << " transitions=" << pe.transitions << '\n';
}

//! (time, eps33, sig33, 2 eps13, sig13): the two hysteresis loops of the front-face node.
inline void write_hysteresis_csv(std::ostream& os, const Trajectory& traj) {
    csv::write_row(os, std::vector<std::string>{"time_s", "eps33", "sig33_Pa", "gamma13", "sig13_Pa"});
    for (const auto& pt : traj)
        csv::write_row(os, std::vector<double>{pt.t, pt.eps(2, 2), pt.sigma(2, 2), 2.0 * pt.eps(0, 2), pt.sigma(0, 2)});
}

}  // namespace vpid
