#pragma once

//! \file gmkf.hpp
//! \brief Gauss-Markov-Kalman filter on polynomial chaos coefficients.
//!
//! The prior parameters q_f and the predicted observations u_f are both held as
//! PCE vectors on the same germs. The linear posterior estimate
//!   q_a = q_f + K (z - u_f),   K = C_{q u} (C_u + C_eps)^{-1}
//! acts column-wise on the coefficients: the measurement z is deterministic, so it
//! only enters the zero-index column. The measurement error enters u_f as extra
//! Gaussian germs with linear coefficients sqrt(C_eps), which carries the
//! K C_eps K^T part of the posterior covariance into the coefficients.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "vpid/chaboche.hpp"
#include "vpid/errors.hpp"
#include "vpid/experiment.hpp"
#include "vpid/kde.hpp"
#include "vpid/load_path.hpp"
#include "vpid/pce.hpp"

namespace vpid {

//! Names of the identified parameters, in the order of the parameter vector q.
inline constexpr std::array<const char*, 5> kParameterNames = {"kappa", "g", "b_r", "b_chi", "sigma_y"};

inline double& parameter_ref(MaterialParams& p, std::size_t i) {
    switch (i) {
        case 0: return p.kappa;
        case 1: return p.g;
        case 2: return p.b_r;
        case 3: return p.b_chi;
        case 4: return p.sigma_y;
        default: throw InvalidArgument("parameter index out of range");
    }
}

inline double parameter_value(const MaterialParams& p, std::size_t i) {
    return parameter_ref(const_cast<MaterialParams&>(p), i);
}

struct ParameterPrior {
    std::string name;
    double mean = 0.0;
    double cov = 0.0;  //!< coefficient of variation

    friend bool operator==(const ParameterPrior&, const ParameterPrior&) = default;
};

//! \brief Lognormal priors for q = [kappa, G, b_R, b_chi, sigma_y]; the other constants are fixed
struct PriorSpec {
    std::array<ParameterPrior, 5> uncertain;
    MaterialParams fixed;  //!< n, k, h_r, h_chi are taken from here

    //! Prior means at factor x truth, all with the same coefficient of variation.
    static PriorSpec around(const MaterialParams& truth, double mean_factor, double cov) {
        PriorSpec spec;
        spec.fixed = truth;
        for (std::size_t i = 0; i < 5; ++i)
            spec.uncertain[i] = {kParameterNames[i], mean_factor * parameter_value(truth, i), cov};
        return spec;
    }

    MaterialParams materialize(const Eigen::VectorXd& q) const {
        MaterialParams p = fixed;
        for (std::size_t i = 0; i < 5; ++i) parameter_ref(p, i) = q(static_cast<Eigen::Index>(i));
        return p;
    }

    //! One germ per parameter.
    PceVector prior_pce(int degree) const {
        std::vector<PceVector> parts;
        for (std::size_t i = 0; i < 5; ++i)
            parts.push_back(lognormal_pce(uncertain[i].mean, uncertain[i].cov, static_cast<int>(i), degree, 5));
        return stack(parts);
    }
};

struct ForwardOptions {
    int threads = 1;
    bool require_positive_inputs = false;  //!< throw NonPositiveParameter on a non-positive node value
};

//! \brief Projects forward(prior(xi)) onto the prior's Hermite basis by quadrature
//! \details u^(alpha) = (1/alpha!) sum_j w_j forward(prior(xi_j)) psi_alpha(xi_j). Node results are
//! reduced in node order, so the output does not depend on the thread count.
//! \throws ForwardFailure wrapping the lowest-numbered failing node
template <typename Forward>
PceVector propagate_forward(const PceVector& prior, Forward&& forward, const QuadratureRule& rule,
                            const ForwardOptions& options = {}) {
    if (rule.nodes.rows() != prior.germs()) throw InvalidArgument("quadrature rule dimension differs from germ count");
    const std::size_t n_nodes = rule.size();
    const Eigen::MatrixXd inputs = pce_evaluate_many(prior, rule.nodes);
    if (options.require_positive_inputs)
        for (Eigen::Index j = 0; j < inputs.cols(); ++j)
            for (Eigen::Index i = 0; i < inputs.rows(); ++i)
                if (!(inputs(i, j) > 0.0))
                    throw NonPositiveParameter("quadrature node " + std::to_string(j) + " maps parameter " +
                                               std::to_string(i) + " to " + std::to_string(inputs(i, j)));

    std::vector<Eigen::VectorXd> outputs(n_nodes);
    std::vector<std::exception_ptr> errors(n_nodes);
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (std::size_t j = next++; j < n_nodes; j = next++) {
            try {
                outputs[j] = forward(Eigen::VectorXd(inputs.col(static_cast<Eigen::Index>(j))));
            } catch (...) {
                errors[j] = std::current_exception();
            }
        }
    };
    const int n_threads = std::max(1, std::min<int>(options.threads, static_cast<int>(n_nodes)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t j = 0; j < n_nodes; ++j) {
        if (!errors[j]) continue;
        try {
            std::rethrow_exception(errors[j]);
        } catch (const std::exception& e) {
            throw ForwardFailure(j, e.what());
        }
    }

    const Eigen::Index n_out = outputs.empty() ? 0 : outputs.front().size();
    Eigen::MatrixXd values(n_out, static_cast<Eigen::Index>(n_nodes));
    for (std::size_t j = 0; j < n_nodes; ++j) {
        if (outputs[j].size() != n_out) throw ForwardFailure(j, "forward output has inconsistent length");
        values.col(static_cast<Eigen::Index>(j)) = outputs[j] * rule.weights[j];
    }
    const auto& idx = prior.index_set();
    Eigen::MatrixXd basis(static_cast<Eigen::Index>(n_nodes), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < n_nodes; ++j)
        for (std::size_t a = 0; a < idx.size(); ++a)
            basis(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(a)) =
                hermite_eval(idx[a], rule.node(j)) / factorial_norm(idx[a]);
    return {idx, values * basis};
}

//! \brief K = C_qu (C_u + C_eps)^{-1} through a Cholesky factorization
//! \throws NotSPD if C_u + C_eps is not positive definite
inline Eigen::MatrixXd kalman_gain(const Eigen::MatrixXd& c_qu, const Eigen::MatrixXd& c_u,
                                   const Eigen::MatrixXd& c_eps) {
    if (c_u.rows() != c_u.cols() || c_eps.rows() != c_u.rows() || c_eps.cols() != c_u.cols() ||
        c_qu.cols() != c_u.rows())
        throw InvalidArgument("kalman_gain: incompatible covariance shapes");
    const Eigen::MatrixXd s = c_u + c_eps;
    const Eigen::MatrixXd sym = 0.5 * (s + s.transpose());
    Eigen::LLT<Eigen::MatrixXd> llt(sym);
    if (llt.info() != Eigen::Success) throw NotSPD("C_u + C_eps is not positive definite");
    return llt.solve(c_qu.transpose()).transpose();
}

//! \brief q_a^(0) = q_f^(0) + K (z - u_f^(0)),  q_a^(alpha) = q_f^(alpha) - K u_f^(alpha)
//! \throws IndexMismatch if q_f and u_f are on different bases
inline PceVector update_coefficients(const PceVector& q_f, const PceVector& u_f, const Eigen::MatrixXd& k_gain,
                                     const Eigen::VectorXd& z_hat) {
    if (!q_f.same_basis(u_f)) throw IndexMismatch("prior and predicted observation use different index sets");
    if (k_gain.rows() != q_f.dim() || k_gain.cols() != u_f.dim() || z_hat.size() != u_f.dim())
        throw InvalidArgument("update_coefficients: incompatible gain or measurement size");
    Eigen::MatrixXd c = q_f.coefficients() - k_gain * u_f.coefficients();
    c.col(0) += k_gain * z_hat;
    return {q_f.index_set(), std::move(c)};
}

//! \brief The complete linear Bayesian update for a given prior, predicted observation and noise
struct LinearUpdate {
    Eigen::MatrixXd gain;
    PceVector q_f;  //!< prior on the extended germs (parameters + noise)
    PceVector u_f;  //!< predicted observation incl. noise germs
    PceVector q_a;  //!< posterior on the extended germs
};

//! Builds K from the noise-free u_f and C_eps, then updates on the noise-extended basis.
inline LinearUpdate linear_bayes_update(const PceVector& prior, const PceVector& predicted,
                                        const Eigen::VectorXd& c_eps_diag, const Eigen::VectorXd& z_hat) {
    if (!prior.same_basis(predicted)) throw IndexMismatch("prior and predicted observation use different index sets");
    if (c_eps_diag.size() != predicted.dim()) throw InvalidArgument("noise covariance size differs from observation size");
    LinearUpdate out;
    const Eigen::MatrixXd c_qu = pce_cov(prior, predicted);
    const Eigen::MatrixXd c_u = pce_cov(predicted, predicted);
    out.gain = kalman_gain(c_qu, c_u, Eigen::MatrixXd(c_eps_diag.asDiagonal()));

    const int n_z = predicted.dim();
    out.q_f = append_linear_germs(prior, n_z);
    out.u_f = append_linear_germs(predicted, n_z);
    const auto base = static_cast<Eigen::Index>(predicted.size());
    for (Eigen::Index i = 0; i < n_z; ++i) out.u_f.coefficients()(i, base + i) = std::sqrt(c_eps_diag(i));
    out.q_a = update_coefficients(out.q_f, out.u_f, out.gain, z_hat);
    return out;
}

struct PceSettings {
    int degree = 2;
    int level = 3;
    double quadrature_cap = 1e6;
    int posterior_samples = 100000;
    std::uint64_t sample_seed = 7;
    int threads = 1;

    friend bool operator==(const PceSettings&, const PceSettings&) = default;
};

struct IdentificationInputs {
    PriorSpec prior;
    LoadPath path;
    NoiseModel noise;
    MaterialParams truth;
    ExperimentOptions experiment;
    PceSettings pce;
};

struct IdentificationResult {
    PceVector prior;            //!< dim 5 on the 5 parameter germs
    PceVector posterior;        //!< dim 5 on parameter + noise germs
    Eigen::MatrixXd gain;       //!< 5 x n_z
    Eigen::VectorXd prior_mean, prior_std, post_mean, post_std;
    Eigen::VectorXd z_hat;
    Eigen::VectorXd c_eps;       //!< diagonal
    Eigen::VectorXd predicted_mean;
    Eigen::MatrixXd prior_samples;  //!< 5 x posterior_samples
    Eigen::MatrixXd post_samples;
    ObservationSet truth_observations;
    Trajectory truth_trajectory;
    PrincipalExport truth_principal;
    std::size_t quadrature_nodes = 0;
    std::vector<std::string> warnings;

    //! Posterior restricted to the parameter germs (noise-germ columns dropped).
    PceVector posterior_parametric() const {
        const auto n = prior.size();
        std::vector<MultiIndex> idx;
        for (std::size_t a = 0; a < n; ++a)
            idx.emplace_back(prior.index_set()[a]);
        return {std::move(idx), posterior.coefficients().leftCols(static_cast<Eigen::Index>(n))};
    }

    //! Posterior loading on the noise germs, 5 x n_z.
    Eigen::MatrixXd posterior_noise_loading() const {
        return posterior.coefficients().rightCols(static_cast<Eigen::Index>(posterior.size() - prior.size()));
    }
};

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
    return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

//! \brief Joint draws of prior and posterior at the same fresh standard-normal germs
//! \details The prior's germs are the leading germs of the posterior's basis.
struct JointSamples {
    Eigen::MatrixXd prior;      //!< dim x n
    Eigen::MatrixXd posterior;  //!< dim x n
};

inline JointSamples sample_prior_posterior(const PceVector& prior, const PceVector& posterior, int n,
                                           std::uint64_t seed) {
    if (prior.germs() > posterior.germs()) throw InvalidArgument("prior has more germs than posterior");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    JointSamples out{Eigen::MatrixXd(prior.dim(), n), Eigen::MatrixXd(posterior.dim(), n)};
    constexpr int block = 4096;
    for (int start = 0; start < n; start += block) {
        const int cnt = std::min(block, n - start);
        Eigen::MatrixXd xi(posterior.germs(), cnt);
        for (int j = 0; j < cnt; ++j)
            for (int i = 0; i < posterior.germs(); ++i) xi(i, j) = normal(rng);
        out.posterior.middleCols(start, cnt) = pce_evaluate_many(posterior, xi);
        out.prior.middleCols(start, cnt) = pce_evaluate_many(prior, xi.topRows(prior.germs()));
    }
    return out;
}

//! \brief Runs the truth experiment, propagates the prior through the forward model and updates
inline IdentificationResult identify(const IdentificationInputs& in) {
    in.truth.validate();
    for (const auto& u : in.prior.uncertain)
        if (!(u.mean > 0.0)) throw InvalidArgument("prior mean of " + u.name + " must be positive");

    IdentificationResult res;
    res.prior = in.prior.prior_pce(in.pce.degree);

    // Virtual data at the true parameters.
    const ExperimentResult truth_run = run_experiment(in.truth, in.path, in.experiment);
    const Measurement meas = synthesize_measurement(truth_run.obs, in.noise);
    res.truth_observations = truth_run.obs;
    res.truth_trajectory = truth_run.trajectory;
    res.truth_principal = export_principal_trajectory(truth_run.trajectory, in.truth);
    res.z_hat = to_eigen(meas.z);
    res.c_eps = to_eigen(meas.c_eps);

    const QuadratureRule rule = gauss_hermite_rule(5, in.pce.level, in.pce.quadrature_cap);
    res.quadrature_nodes = rule.size();
    auto forward = [&in](const Eigen::VectorXd& q) {
        const MaterialParams p = in.prior.materialize(q);
        return to_eigen(run_experiment(p, in.path, in.experiment).obs.stacked());
    };
    const PceVector u_f =
        propagate_forward(res.prior, forward, rule, ForwardOptions{in.pce.threads, /*require_positive_inputs=*/true});
    res.predicted_mean = pce_mean(u_f);

    LinearUpdate upd = linear_bayes_update(res.prior, u_f, res.c_eps, res.z_hat);
    res.gain = std::move(upd.gain);
    res.posterior = std::move(upd.q_a);

    res.prior_mean = pce_mean(res.prior);
    res.prior_std = pce_cov(res.prior, res.prior).diagonal().cwiseSqrt();
    res.post_mean = pce_mean(res.posterior);
    res.post_std = pce_cov(res.posterior, res.posterior).diagonal().cwiseMax(0.0).cwiseSqrt();

    JointSamples draws = sample_prior_posterior(res.prior, res.posterior, in.pce.posterior_samples, in.pce.sample_seed);
    res.prior_samples = std::move(draws.prior);
    res.post_samples = std::move(draws.posterior);
    for (Eigen::Index i = 0; i < res.post_samples.rows(); ++i) {
        const auto bad = (res.post_samples.row(i).array() <= 0.0).count();
        if (bad > 0)
            res.warnings.push_back(std::string("posterior of ") + kParameterNames[static_cast<std::size_t>(i)] +
                                   " has " + std::to_string(bad) + " non-positive samples");
    }
    return res;
}

//! \brief Prior and posterior densities of one parameter on 512 points spanning prior mean +- 5 prior std
struct DensityTable {
    std::vector<double> value, prior_density, post_density;
};

inline DensityTable parameter_densities(const IdentificationResult& res, std::size_t i, int n_grid = 512) {
    const auto r = static_cast<Eigen::Index>(i);
    DensityTable t;
    const double lo = res.prior_mean(r) - 5.0 * res.prior_std(r);
    const double hi = res.prior_mean(r) + 5.0 * res.prior_std(r);
    for (int g = 0; g < n_grid; ++g) t.value.push_back(lo + (hi - lo) * g / (n_grid - 1));
    const Eigen::VectorXd prior_row = res.prior_samples.row(r).transpose();
    const Eigen::VectorXd post_row = res.post_samples.row(r).transpose();
    t.prior_density = kde_density({prior_row.data(), static_cast<std::size_t>(prior_row.size())}, t.value);
    t.post_density = kde_density({post_row.data(), static_cast<std::size_t>(post_row.size())}, t.value);
    return t;
}

}  // namespace vpid
