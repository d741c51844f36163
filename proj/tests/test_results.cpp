#include <gtest/gtest.h>

#include <sstream>

#include "vpid/results.hpp"

namespace {

vpid::RunSummary summary(int load_case, const std::string& source, double scale = 1.0) {
    vpid::RunSummary s;
    s.source = source;
    s.load_case = load_case;
    for (std::size_t i = 0; i < 5; ++i) {
        s.truth[i] = vpid::parameter_value(vpid::MaterialParams{}, i);
        s.mean[i] = scale * s.truth[i];
        s.std[i] = 0.01 * load_case * s.truth[i];
    }
    return s;
}

std::string merge_error(const std::vector<vpid::RunSummary>& runs) {
    try {
        vpid::merge_runs(runs);
    } catch (const vpid::ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Report, TwoRunsGiveFiveFullRows) {
    const auto t = vpid::merge_runs({summary(2, "b", 1.1), summary(1, "a", 1.05)});
    ASSERT_EQ(t.rows.size(), 5u);
    EXPECT_EQ(t.rows[2].name, "b_r");
    EXPECT_DOUBLE_EQ(*t.rows[2].mean1, 1.05 * 50.0);
    EXPECT_DOUBLE_EQ(*t.rows[2].mean2, 1.1 * 50.0);
    std::ostringstream os;
    vpid::write_report_csv(os, t);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    EXPECT_EQ(line, "parameter,true,mean_case1,std_case1,mean_case2,std_case2");
    std::getline(is, line);
    EXPECT_EQ(line, "kappa,1.66e+09,1.743e+09,16600000,1826000000.0000002,33200000");
}

TEST(Report, SingleRunLeavesBlanks) {
    const auto t = vpid::merge_runs({summary(2, "b")});
    ASSERT_EQ(t.rows.size(), 5u);
    EXPECT_FALSE(t.rows[0].mean1.has_value());
    std::ostringstream os;
    vpid::write_report_csv(os, t);
    EXPECT_NE(os.str().find("\nsigma_y,1.7e+08,,,1.7e+08,3400000\n"), std::string::npos) << os.str();
    std::ostringstream md;
    vpid::write_report_markdown(md, t);
    EXPECT_NE(md.str().find("| b_chi | 50 |  |  | 50 | 1 |"), std::string::npos) << md.str();
}

TEST(Report, MismatchedTruthNamesParameter) {
    auto b = summary(2, "b");
    b.truth[3] = 51.0;
    const std::string msg = merge_error({summary(1, "a"), b});
    EXPECT_NE(msg.find("b_chi"), std::string::npos) << msg;
}

TEST(Report, DuplicateCaseIsRejected) {
    EXPECT_NE(merge_error({summary(1, "a"), summary(1, "c")}).find("both case 1"), std::string::npos);
    EXPECT_FALSE(merge_error({}).empty());
}

TEST(Report, SummaryRoundTripsThroughResultJson) {
    vpid::RunConfig c;
    c.load.load_case = 2;
    vpid::IdentificationResult res;
    res.prior = vpid::PriorSpec::around(c.material, 1.2, 0.15).prior_pce(1);
    res.prior_mean = res.prior_std = res.post_mean = res.post_std = Eigen::VectorXd::LinSpaced(5, 1.0, 5.0);
    res.gain = Eigen::MatrixXd::Zero(5, 2);
    res.z_hat = res.c_eps = Eigen::Vector2d(1.0, 4.0);
    const auto j = nlohmann::json::parse(vpid::result_to_json(c, res).dump());
    const auto s = vpid::summary_from_json(j, "x");
    EXPECT_EQ(s.load_case, 2);
    EXPECT_EQ(s.truth[1], c.material.g);
    EXPECT_EQ(s.mean[4], 5.0);
    EXPECT_EQ(j["parameters"][0]["density_csv"], "density_kappa.csv");
    EXPECT_EQ(j["observation"]["noise_std_inplane"], 2.0);

    auto broken = j;
    broken["parameters"][2].erase("post_std");
    EXPECT_THROW(vpid::summary_from_json(broken, "x"), vpid::ConfigError);
}
