#pragma once

//! \file results.hpp
//! \brief JSON rendering of identification results and the side-by-side case report.

#include <json.hpp>

#include <array>
#include <cmath>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "vpid/config.hpp"
#include "vpid/csv.hpp"
#include "vpid/errors.hpp"
#include "vpid/gmkf.hpp"

namespace vpid {

inline nlohmann::ordered_json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::ordered_json row = nlohmann::ordered_json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::string density_file_name(std::size_t i) { return std::string("density_") + kParameterNames[i] + ".csv"; }

//! \brief Document written as result.json by the identify command
inline nlohmann::ordered_json result_to_json(const RunConfig& config, const IdentificationResult& res) {
    nlohmann::ordered_json j;
    j["config"] = to_json(config);
    j["load_case"] = config.load.load_case;

    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < kParameterNames.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        params.push_back({{"name", kParameterNames[i]},
                          {"true", parameter_value(config.material, i)},
                          {"prior_mean", res.prior_mean(r)},
                          {"prior_std", res.prior_std(r)},
                          {"post_mean", res.post_mean(r)},
                          {"post_std", res.post_std(r)},
                          {"density_csv", density_file_name(i)}});
    }
    j["parameters"] = std::move(params);

    j["observation"] = {{"n_z", res.z_hat.size()},
                        {"noise_std_normal", res.c_eps.size() > 0 ? std::sqrt(res.c_eps(0)) : 0.0},
                        {"noise_std_inplane", res.c_eps.size() > 1 ? std::sqrt(res.c_eps(1)) : 0.0}};
    j["pce"] = {{"germs", res.prior.germs()},
                {"degree", res.prior.degree()},
                {"terms", res.prior.size()},
                {"quadrature_nodes", res.quadrature_nodes},
                {"propagation", "tensor Gauss-Hermite quadrature projection"},
                {"note", "degree and quadrature level are run choices, not values from a reference"}};
    j["truth_path"] = {{"outside_fraction", res.truth_principal.outside_fraction},
                       {"transitions", res.truth_principal.transitions}};
    j["gain"] = matrix_to_json(res.gain);
    j["files"] = {{"prior_pce", "prior_pce.csv"},
                  {"posterior_pce", "posterior_pce.csv"},
                  {"posterior_noise_loading", "posterior_noise_loading.csv"},
                  {"measurement", "measurement.csv"},
                  {"principal", "principal.csv"}};
    j["warnings"] = res.warnings;
    return j;
}

//! \brief Posterior summary of one run as read back from result.json
struct RunSummary {
    std::string source;
    int load_case = 0;
    std::array<double, 5> truth{}, mean{}, std{};
};

//! \throws ConfigError on a missing or malformed field
inline RunSummary summary_from_json(const nlohmann::json& j, const std::string& source) {
    RunSummary s;
    s.source = source;
    try {
        s.load_case = j.at("load_case").get<int>();
        if (s.load_case != 1 && s.load_case != 2) throw ConfigError(source + ": load_case must be 1 or 2");
        const auto& params = j.at("parameters");
        if (!params.is_array() || params.size() != kParameterNames.size())
            throw ConfigError(source + ": expected 5 parameter entries");
        for (std::size_t i = 0; i < kParameterNames.size(); ++i) {
            const auto& p = params[i];
            if (p.at("name").get<std::string>() != kParameterNames[i])
                throw ConfigError(source + ": parameter " + std::to_string(i) + " should be " + kParameterNames[i]);
            s.truth[i] = p.at("true").get<double>();
            s.mean[i] = p.at("post_mean").get<double>();
            s.std[i] = p.at("post_std").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return s;
}

//! \brief Rows of the merged table: parameter, true, mean/std for case 1 and case 2
struct ReportTable {
    struct Row {
        std::string name;
        double truth = 0.0;
        std::optional<double> mean1, std1, mean2, std2;
    };
    std::vector<Row> rows;
};

//! \throws ConfigError on duplicate cases or runs that disagree on a true value
inline ReportTable merge_runs(const std::vector<RunSummary>& runs) {
    if (runs.empty()) throw ConfigError("report needs at least one run");
    const RunSummary& ref = runs.front();
    for (const auto& r : runs)
        for (std::size_t i = 0; i < kParameterNames.size(); ++i)
            if (r.truth[i] != ref.truth[i])
                throw ConfigError(std::string("true value of parameter '") + kParameterNames[i] + "' differs between '" +
                                  ref.source + "' and '" + r.source + "'");
    const RunSummary* by_case[2] = {nullptr, nullptr};
    for (const auto& r : runs) {
        auto& slot = by_case[r.load_case - 1];
        if (slot)
            throw ConfigError("runs '" + slot->source + "' and '" + r.source + "' are both case " +
                              std::to_string(r.load_case));
        slot = &r;
    }

    ReportTable t;
    for (std::size_t i = 0; i < kParameterNames.size(); ++i) {
        ReportTable::Row row{kParameterNames[i], ref.truth[i], {}, {}, {}, {}};
        if (by_case[0]) {
            row.mean1 = by_case[0]->mean[i];
            row.std1 = by_case[0]->std[i];
        }
        if (by_case[1]) {
            row.mean2 = by_case[1]->mean[i];
            row.std2 = by_case[1]->std[i];
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

namespace detail {
inline std::string cell(const std::optional<double>& v) { return v ? csv::format(*v) : std::string(); }
}  // namespace detail

inline void write_report_csv(std::ostream& os, const ReportTable& t) {
    csv::write_row(os, std::vector<std::string>{"parameter", "true", "mean_case1", "std_case1", "mean_case2", "std_case2"});
    for (const auto& r : t.rows)
        csv::write_row(os, std::vector<std::string>{r.name, csv::format(r.truth), detail::cell(r.mean1),
                                                    detail::cell(r.std1), detail::cell(r.mean2), detail::cell(r.std2)});
}

inline void write_report_markdown(std::ostream& os, const ReportTable& t) {
    os << "| parameter | true | mean_case1 | std_case1 | mean_case2 | std_case2 |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const auto& r : t.rows)
        os << "| " << r.name << " | " << csv::format(r.truth) << " | " << detail::cell(r.mean1) << " | "
           << detail::cell(r.std1) << " | " << detail::cell(r.mean2) << " | " << detail::cell(r.std2) << " |\n";
}

}  // namespace vpid
