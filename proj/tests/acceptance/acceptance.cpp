// Acceptance checks: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "vpid/config.hpp"
#include "vpid/experiment.hpp"
#include "vpid/gmkf.hpp"
#include "vpid/integrator.hpp"
#include "vpid/pce.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void check(int id, const char* title, double time_limit_s, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < time_limit_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::printf("%s criterion %d: %s | %s | %.3f s (limit %.0f s)%s\n", pass ? "PASS" : "FAIL", id, title,
                o.detail.c_str(), secs, time_limit_s, in_time ? "" : " TIMEOUT");
    std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof(buf), f, a);
    return buf;
}

vpid::Trajectory case1_trajectory(double dt, bool adaptive) {
    const auto path = vpid::build_case1(3e8, 1.5e8, 10.0, 10);
    vpid::IntegratorOptions o;
    o.dt = dt;
    o.adaptive = adaptive;
    return vpid::integrate_stress_driven(
        vpid::MaterialParams{}, [&](double t) { return vpid::traction_to_stress(path(t)); }, path.duration(), o);
}

// Max over shared output times, relative to the max magnitude of p and eps along the finer run.
double trajectory_error(const vpid::Trajectory& coarse, const vpid::Trajectory& fine) {
    const std::size_t stride = (fine.size() - 1) / (coarse.size() - 1);
    double dp = 0.0, pmax = 0.0, de = 0.0, emax = 0.0;
    for (std::size_t i = 0; i < coarse.size(); ++i) {
        const auto& a = coarse[i];
        const auto& b = fine[i * stride];
        dp = std::max(dp, std::abs(a.state.p - b.state.p));
        pmax = std::max(pmax, std::abs(b.state.p));
        de = std::max(de, vpid::norm(a.eps - b.eps));
        emax = std::max(emax, vpid::norm(b.eps));
    }
    return std::max(dp / pmax, de / emax);
}

double rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

vpid::IdentificationResult identify_default(int load_case) {
    vpid::RunConfig c;
    c.load.load_case = load_case;
    return vpid::identify(c.identification_inputs());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

int main() {
    check(1, "sub-yield uniaxial ramp is elastic with E = 9 kappa G / (3 kappa + G)", 1.0, [] {
        const vpid::MaterialParams p;
        const double e = 9.0 * p.kappa * p.g / (3.0 * p.kappa + p.g);
        const auto traj = vpid::integrate_stress_driven(
            p, [&](double t) { return vpid::SymTensor2::diag(0.95 * p.sigma_y * t, 0, 0); }, 1.0);
        double worst = 0.0;
        bool vp_zero = true;
        for (const auto& pt : traj) {
            vp_zero = vp_zero && pt.state.eps_vp == vpid::SymTensor2{} && pt.state.p == 0.0;
            if (pt.t > 0.0) worst = std::max(worst, std::abs(pt.eps(0, 0) - pt.sigma(0, 0) / e) / (pt.sigma(0, 0) / e));
        }
        const bool ok = vp_zero && worst <= 1e-10 && std::abs(e - 2.0e9) / 2.0e9 < 0.005;
        return Outcome{ok, fmt("E = %.4e Pa", e) + fmt(", max rel err %.2e", worst) +
                               (vp_zero ? ", eps_vp = 0" : ", eps_vp nonzero")};
    });

    check(2, "case-1 half-step error <= 1e-4 and 4th-order reduction +-20%", 10.0, [] {
        const auto f1 = case1_trajectory(0.01, false);
        const auto f2 = case1_trajectory(0.005, false);
        const auto f3 = case1_trajectory(0.0025, false);
        const double e1 = trajectory_error(f1, f2);
        const double e2 = trajectory_error(f2, f3);
        const double ratio = e1 / e2;
        const double ea = trajectory_error(case1_trajectory(0.01, true), case1_trajectory(0.005, true));
        const bool ok = e1 <= 1e-4 && ea <= 1e-4 && std::abs(ratio - 16.0) <= 0.2 * 16.0;
        return Outcome{ok, fmt("fixed RK4 err %.2e", e1) + fmt(" -> %.2e", e2) + fmt(", ratio %.2f (16)", ratio) +
                               fmt(", adaptive err %.2e", ea)};
    });

    check(3, "<psi_a psi_b> = a! delta_ab for m = 5, p <= 3", 5.0, [] {
        double worst = 0.0;
        for (int p = 0; p <= 3; ++p) {
            const auto idx = vpid::multi_index_set(5, p);
            const auto rule = vpid::gauss_hermite_rule(5, p + 1);
            Eigen::MatrixXd psi(static_cast<Eigen::Index>(rule.size()), static_cast<Eigen::Index>(idx.size()));
            for (std::size_t j = 0; j < rule.size(); ++j)
                for (std::size_t a = 0; a < idx.size(); ++a)
                    psi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(a)) =
                        vpid::hermite_eval(idx[a], rule.node(j)) * std::sqrt(rule.weights[j]);
            const Eigen::MatrixXd gram = psi.transpose() * psi;
            for (std::size_t a = 0; a < idx.size(); ++a)
                for (std::size_t b = 0; b < idx.size(); ++b) {
                    const double na = vpid::factorial_norm(idx[a]), nb = vpid::factorial_norm(idx[b]);
                    const double expected = a == b ? na : 0.0;
                    worst = std::max(worst, std::abs(gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                                                     expected) / std::sqrt(na * nb));
                }
        }
        return Outcome{worst <= 1e-10, fmt("max scaled deviation %.2e", worst)};
    });

    check(4, "degree-4 lognormal prior mean and CoV 0.15 within 0.5%, Monte Carlo oracle", 10.0, [] {
        const vpid::MaterialParams truth;
        const auto spec = vpid::PriorSpec::around(truth, 1.2, 0.15);
        std::mt19937_64 rng(2024);
        std::normal_distribution<double> n01;
        double worst = 0.0;
        for (std::size_t i = 0; i < 5; ++i) {
            const double target = spec.uncertain[i].mean;
            const auto v = vpid::lognormal_pce(target, 0.15, 0, 4, 1);
            const double mean = vpid::pce_mean(v)(0);
            const double cov = std::sqrt(vpid::pce_cov(v, v)(0, 0)) / mean;
            const double s = std::sqrt(std::log1p(0.15 * 0.15));
            const double mu = std::log(target) - 0.5 * s * s;
            double sum = 0.0, sum2 = 0.0;
            const int n = 1000000;
            for (int k = 0; k < n; ++k) {
                const double x = std::exp(mu + s * n01(rng));
                sum += x;
                sum2 += x * x;
            }
            const double mc_mean = sum / n;
            const double mc_cov = std::sqrt(sum2 / n - mc_mean * mc_mean) / mc_mean;
            worst = std::max({worst, std::abs(mean - target) / target, std::abs(cov - 0.15) / 0.15,
                              std::abs(mean - mc_mean) / mc_mean, std::abs(cov - mc_cov) / mc_cov});
        }
        return Outcome{worst <= 0.005, fmt("max rel deviation %.2e over 5 priors", worst)};
    });

    check(5, "GMKF equals analytic Kalman/Bayes posterior for linear-Gaussian models", 1.0, [] {
        // Scalar: q ~ N(m, s^2), u = q + e, e ~ N(0, r^2)
        const double m = 3.0, s = 0.8, r = 0.5, z = 4.1;
        vpid::PceVector q1(1, 1, 1);
        q1.coefficients() << m, s;
        const auto u1 = vpid::propagate_forward(q1, [](const Eigen::VectorXd& q) { return q; },
                                                vpid::gauss_hermite_rule(1, 2));
        const auto a1 = vpid::linear_bayes_update(q1, u1, Eigen::VectorXd::Constant(1, r * r),
                                                  Eigen::VectorXd::Constant(1, z));
        const double mean1 = m + s * s / (s * s + r * r) * (z - m);
        const double var1 = s * s * r * r / (s * s + r * r);
        double worst = std::max(std::abs(vpid::pce_mean(a1.q_a)(0) - mean1) / mean1,
                                std::abs(vpid::pce_cov(a1.q_a, a1.q_a)(0, 0) - var1) / var1);

        // Three parameters, four observations: u = A q + b
        Eigen::Matrix3d l;
        l << 0.5, 0.0, 0.0, 0.2, 0.3, 0.0, -0.1, 0.05, 0.4;
        const Eigen::Vector3d mq(1.0, -2.0, 0.5);
        Eigen::MatrixXd a(4, 3);
        a << 1.0, 0.5, 0.0, -0.3, 2.0, 1.0, 0.0, 0.0, 1.5, 0.7, -0.2, 0.4;
        const Eigen::Vector4d b(0.1, -0.2, 0.3, 0.0), rr(0.05, 0.1, 0.02, 0.2), zz(0.9, -4.0, 1.2, 1.0);
        vpid::PceVector q3(3, 3, 1);
        q3.coefficients().col(0) = mq;
        q3.coefficients().rightCols(3) = l;
        const auto u3 = vpid::propagate_forward(
            q3, [&](const Eigen::VectorXd& q) { return Eigen::VectorXd(a * q + b); }, vpid::gauss_hermite_rule(3, 2));
        const auto a3 = vpid::linear_bayes_update(q3, u3, rr, zz);
        const Eigen::MatrixXd p = l * l.transpose();
        const Eigen::MatrixXd sm = a * p * a.transpose() + Eigen::MatrixXd(rr.asDiagonal());
        const Eigen::MatrixXd k = p * a.transpose() * sm.inverse();
        worst = std::max({worst, rel(vpid::pce_mean(a3.q_a), mq + k * (zz - a * mq - b)),
                          rel(vpid::pce_cov(a3.q_a, a3.q_a), p - k * a * p)});
        return Outcome{worst <= 1e-10, fmt("max rel deviation %.2e", worst)};
    });

    vpid::IdentificationResult res1, res2;
    bool have_results = false;

    check(6, "posterior std < prior std on both cases; case-2 std of kappa, G, sigma_y <= 1% of mean", 300.0, [&] {
        res1 = identify_default(1);
        res2 = identify_default(2);
        have_results = true;
        bool reduced = true;
        for (int i = 0; i < 5; ++i) reduced = reduced && res1.post_std(i) < res1.prior_std(i) &&
                                              res2.post_std(i) < res2.prior_std(i);
        std::string detail = reduced ? "variance reduced for all 5 on both cases" : "variance NOT reduced everywhere";
        bool desk = true;
        for (int i : {0, 1, 4}) {
            const double cv = res2.post_std(i) / res2.post_mean(i);
            desk = desk && cv <= 0.01;
            detail += std::string(", ") + vpid::kParameterNames[static_cast<std::size_t>(i)] + fmt(" %.2f%%", 100 * cv);
        }
        return Outcome{reduced && desk, detail};
    });

    check(7, "case-2 std of b_R, b_chi <= half of case 1; case-2 means within 5% of 50", 600.0, [&] {
        if (!have_results) {
            res1 = identify_default(1);
            res2 = identify_default(2);
        }
        bool ok = true;
        std::string detail;
        for (int i : {2, 3}) {
            const double ratio = res1.post_std(i) / res2.post_std(i);
            const double bias = std::abs(res2.post_mean(i) - 50.0) / 50.0;
            ok = ok && ratio >= 2.0 && bias <= 0.05;
            detail += std::string(i == 2 ? "" : ", ") + vpid::kParameterNames[static_cast<std::size_t>(i)] +
                      fmt(" std %.3g", res1.post_std(i)) + fmt(" -> %.3g", res2.post_std(i)) +
                      fmt(" (ratio %.2f)", ratio) + fmt(", case-2 mean %.2f", res2.post_mean(i));
        }
        return Outcome{ok, detail};
    });

    check(8, "outside-yield transitions case 2 >= case 1 at default amplitudes", 60.0, [] {
        vpid::RunConfig c;
        const vpid::MaterialParams p;
        c.load.load_case = 1;
        const auto t1 = vpid::run_experiment(p, c.load_path(), c.experiment()).trajectory;
        c.load.load_case = 2;
        const auto t2 = vpid::run_experiment(p, c.load_path(), c.experiment()).trajectory;
        const auto e1 = vpid::export_principal_trajectory(t1, p);
        const auto e2 = vpid::export_principal_trajectory(t2, p);
        return Outcome{e2.transitions >= e1.transitions,
                       "case 1: " + std::to_string(e1.transitions) + fmt(" transitions (outside %.3f)", e1.outside_fraction) +
                           ", case 2: " + std::to_string(e2.transitions) +
                           fmt(" transitions (outside %.3f)", e2.outside_fraction)};
    });

    check(9, "two identical identify runs give bitwise-identical outputs", 120.0, [] {
        const fs::path root = fs::temp_directory_path() / "vpid_acceptance_determinism";
        fs::remove_all(root);
        for (const char* sub : {"a", "b"}) {
            const std::string cmd = std::string(VPID_CLI) + " identify --case 2 --out " + (root / sub).string() +
                                    " > /dev/null 2>&1";
            if (std::system(cmd.c_str()) != 0) return Outcome{false, "identify invocation failed"};
        }
        int files = 0;
        bool same = true;
        std::string first_diff;
        for (const auto& e : fs::directory_iterator(root / "a" / "case2")) {
            ++files;
            if (slurp(e.path()) != slurp(root / "b" / "case2" / e.path().filename())) {
                same = false;
                if (first_diff.empty()) first_diff = e.path().filename().string();
            }
        }
        const auto count_b = std::distance(fs::directory_iterator(root / "b" / "case2"), fs::directory_iterator{});
        same = same && count_b == files && files > 0;
        fs::remove_all(root);
        return Outcome{same, std::to_string(files) + " files compared" +
                                 (first_diff.empty() ? std::string() : ", first difference in " + first_diff)};
    });

    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
