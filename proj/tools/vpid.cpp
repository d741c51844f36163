// Command-line entry point: simulate, identify and report.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include "vpid/config.hpp"
#include "vpid/experiment.hpp"
#include "vpid/gmkf.hpp"
#include "vpid/results.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode : int { kOk = 0, kFailure = 1, kConfig = 2, kIntegrator = 3, kLinearAlgebra = 4 };

struct Overrides {
    std::string config_path;
    int load_case = 0;
    std::string out = "runs";
    std::uint64_t seed = 0;
    int threads = 0;
    int degree = 0;
    int level = 0;
    CLI::Option* seed_opt = nullptr;
};

void add_run_options(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    cmd.add_option("--case", o.load_case, "load case")->check(CLI::IsMember({1, 2}));
    cmd.add_option("--out", o.out, "parent directory of the run directory")->capture_default_str();
    o.seed_opt = cmd.add_option("--seed", o.seed, "measurement noise seed");
    cmd.add_option("--threads", o.threads, "worker threads for forward propagation")->check(CLI::PositiveNumber);
    cmd.add_option("--degree", o.degree, "PCE truncation degree")->check(CLI::PositiveNumber);
    cmd.add_option("--level", o.level, "Gauss-Hermite points per germ")->check(CLI::PositiveNumber);
}

vpid::RunConfig effective_config(const Overrides& o) {
    vpid::RunConfig c = o.config_path.empty() ? vpid::RunConfig{} : vpid::load_config(o.config_path);
    if (o.load_case != 0) c.load.load_case = o.load_case;
    if (o.seed_opt && o.seed_opt->count() > 0) c.noise.seed = o.seed;
    if (o.threads != 0) c.pce.threads = o.threads;
    if (o.degree != 0) c.pce.degree = o.degree;
    if (o.level != 0) c.pce.level = o.level;
    c.name = c.run_name();
    c.validate();
    return c;
}

//! Writes into a hidden staging directory and swaps it into place once every file is complete.
class StagedRunDir {
  public:
    StagedRunDir(const fs::path& parent, const std::string& name)
        : final_(parent / name), staging_(parent / ("." + name + ".partial")) {
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    ~StagedRunDir() {
        std::error_code ec;
        if (!committed_) fs::remove_all(staging_, ec);
    }
    StagedRunDir(const StagedRunDir&) = delete;
    StagedRunDir& operator=(const StagedRunDir&) = delete;

    void write(const std::string& file, const std::function<void(std::ostream&)>& body) const {
        std::ofstream os(staging_ / file, std::ios::binary);
        if (!os) throw std::runtime_error("cannot create " + (staging_ / file).string());
        body(os);
        if (!os) throw std::runtime_error("write failed: " + (staging_ / file).string());
    }

    void commit() {
        fs::remove_all(final_);
        fs::rename(staging_, final_);
        committed_ = true;
    }

    const fs::path& path() const { return final_; }

  private:
    fs::path final_;
    fs::path staging_;
    bool committed_ = false;
};

void write_simulation_files(const StagedRunDir& dir, const vpid::RunConfig& c, const vpid::LoadPath& path,
                            const vpid::Trajectory& traj, const vpid::ObservationSet& obs,
                            const vpid::Measurement& meas) {
    dir.write("config.json", [&](std::ostream& os) { os << vpid::render(c); });
    dir.write("load_path.csv", [&](std::ostream& os) { vpid::write_load_path_csv(os, path, c.integrator.dt); });
    vpid::Trajectory stored;
    for (std::size_t i = 0; i < traj.size(); ++i)
        if (i % static_cast<std::size_t>(c.integrator.store_every) == 0 || i + 1 == traj.size())
            stored.push_back(traj[i]);
    dir.write("trajectory.csv", [&](std::ostream& os) { vpid::write_trajectory_csv(os, stored); });
    dir.write("hysteresis.csv", [&](std::ostream& os) { vpid::write_hysteresis_csv(os, stored); });
    dir.write("principal.csv", [&](std::ostream& os) {
        vpid::write_principal_csv(os, vpid::export_principal_trajectory(stored, c.material));
    });
    dir.write("observations.csv", [&](std::ostream& os) { vpid::write_observations_csv(os, obs); });
    dir.write("measurement.csv", [&](std::ostream& os) { vpid::write_measurement_csv(os, obs, meas, c.noise); });
}

int cmd_simulate(const Overrides& o) {
    const vpid::RunConfig c = effective_config(o);
    const vpid::LoadPath path = c.load_path();
    const vpid::ExperimentResult run = vpid::run_experiment(c.material, path, c.experiment());
    const vpid::Measurement meas = vpid::synthesize_measurement(run.obs, c.noise);

    StagedRunDir dir(o.out, c.run_name());
    write_simulation_files(dir, c, path, run.trajectory, run.obs, meas);
    dir.commit();
    const auto pe = vpid::export_principal_trajectory(run.trajectory, c.material);
    std::cout << "simulated " << path.label() << ": " << run.trajectory.size() << " steps, outside fraction "
              << vpid::csv::format(pe.outside_fraction) << ", " << pe.transitions << " transitions\n"
              << "wrote " << dir.path().string() << "\n";
    return kOk;
}

void print_summary(std::ostream& os, const vpid::RunConfig& c, const vpid::IdentificationResult& res) {
    os << "case " << c.load.load_case << ", degree " << c.pce.degree << ", " << res.quadrature_nodes
       << " quadrature nodes\n";
    os << std::left << std::setw(10) << "parameter" << std::right;
    for (const char* h : {"true", "prior_mean", "prior_std", "post_mean", "post_std"}) os << std::setw(14) << h;
    os << '\n';
    for (std::size_t i = 0; i < vpid::kParameterNames.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        os << std::left << std::setw(10) << vpid::kParameterNames[i] << std::right << std::setprecision(6);
        for (double v : {vpid::parameter_value(c.material, i), res.prior_mean(r), res.prior_std(r), res.post_mean(r),
                         res.post_std(r)})
            os << std::setw(14) << v;
        os << '\n';
    }
}

int cmd_identify(const Overrides& o) {
    const vpid::RunConfig c = effective_config(o);
    const vpid::IdentificationInputs in = c.identification_inputs();
    const vpid::IdentificationResult res = vpid::identify(in);

    StagedRunDir dir(o.out, c.run_name());
    const vpid::Measurement meas{std::vector<double>(res.z_hat.data(), res.z_hat.data() + res.z_hat.size()),
                                 std::vector<double>(res.c_eps.data(), res.c_eps.data() + res.c_eps.size()),
                                 std::sqrt(res.c_eps(0)), std::sqrt(res.c_eps(1))};
    write_simulation_files(dir, c, in.path, res.truth_trajectory, res.truth_observations, meas);
    dir.write("result.json", [&](std::ostream& os) { os << vpid::result_to_json(c, res).dump(2) << '\n'; });
    for (std::size_t i = 0; i < vpid::kParameterNames.size(); ++i) {
        const vpid::DensityTable t = vpid::parameter_densities(res, i);
        dir.write(vpid::density_file_name(i), [&](std::ostream& os) {
            vpid::csv::write_row(os, std::vector<std::string>{"value", "prior_density", "post_density"});
            for (std::size_t g = 0; g < t.value.size(); ++g)
                vpid::csv::write_row(os, std::vector<double>{t.value[g], t.prior_density[g], t.post_density[g]});
        });
    }
    dir.write("prior_pce.csv", [&](std::ostream& os) { vpid::write_pce_csv(os, res.prior); });
    dir.write("posterior_pce.csv", [&](std::ostream& os) { vpid::write_pce_csv(os, res.posterior_parametric()); });
    dir.write("posterior_noise_loading.csv", [&](std::ostream& os) {
        const Eigen::MatrixXd l = res.posterior_noise_loading();
        std::vector<std::string> header{"parameter"};
        for (Eigen::Index j = 0; j < l.cols(); ++j) header.push_back("noise_" + std::to_string(j + 1));
        vpid::csv::write_row(os, header);
        for (Eigen::Index i = 0; i < l.rows(); ++i) {
            std::vector<std::string> row{vpid::kParameterNames[static_cast<std::size_t>(i)]};
            for (Eigen::Index j = 0; j < l.cols(); ++j) row.push_back(vpid::csv::format(l(i, j)));
            vpid::csv::write_row(os, row);
        }
    });
    dir.commit();

    print_summary(std::cout, c, res);
    for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
    std::cout << "wrote " << dir.path().string() << "\n";
    return kOk;
}

int cmd_report(const std::vector<std::string>& run_dirs, const std::string& out) {
    std::vector<vpid::RunSummary> runs;
    for (const auto& d : run_dirs) {
        const fs::path file = fs::path(d) / "result.json";
        std::ifstream in(file, std::ios::binary);
        if (!in) throw vpid::ConfigError("missing " + file.string());
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw vpid::ConfigError(file.string() + ": " + e.what());
        }
        runs.push_back(vpid::summary_from_json(j, d));
    }
    const vpid::ReportTable table = vpid::merge_runs(runs);

    StagedRunDir dir(fs::path(out).parent_path().empty() ? fs::path(".") : fs::path(out).parent_path(),
                     fs::path(out).filename().string());
    dir.write("report.csv", [&](std::ostream& os) { vpid::write_report_csv(os, table); });
    dir.write("report.md", [&](std::ostream& os) { vpid::write_report_markdown(os, table); });
    dir.commit();
    vpid::write_report_markdown(std::cout, table);
    return kOk;
}

int guarded(const std::function<int()>& body) {
    try {
        return body();
    } catch (const vpid::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const vpid::NotSPD& e) {
        std::cerr << "linear algebra error: " << e.what() << '\n';
        return kLinearAlgebra;
    } catch (const vpid::StepRejected& e) {
        std::cerr << "integrator error: " << e.what() << '\n';
        return kIntegrator;
    } catch (const vpid::DegenerateDirection& e) {
        std::cerr << "integrator error: " << e.what() << '\n';
        return kIntegrator;
    } catch (const vpid::ForwardFailure& e) {
        std::cerr << "integrator error: " << e.what() << '\n';
        return kIntegrator;
    } catch (const vpid::NonPositiveParameter& e) {
        std::cerr << "config error: prior too wide: " << e.what() << '\n';
        return kConfig;
    } catch (const vpid::InvalidArgument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Chaboche viscoplastic material point: virtual experiments and PCE Kalman identification"};
    app.require_subcommand(1);

    Overrides sim, idf;
    auto* simulate = app.add_subcommand("simulate", "run the forward model at the true parameters");
    add_run_options(*simulate, sim);
    auto* identify = app.add_subcommand("identify", "identify the uncertain parameters from virtual data");
    add_run_options(*identify, idf);

    std::vector<std::string> run_dirs;
    std::string report_out = "runs/report";
    auto* report = app.add_subcommand("report", "merge identify runs into one table");
    report->add_option("run_dirs", run_dirs, "run directories holding result.json")->required();
    report->add_option("--out", report_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    if (simulate->parsed()) return guarded([&] { return cmd_simulate(sim); });
    if (identify->parsed()) return guarded([&] { return cmd_identify(idf); });
    return guarded([&] { return cmd_report(run_dirs, report_out); });
}
