#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "vpid/config.hpp"
#include "vpid/csv.hpp"

namespace fs = std::filesystem;

namespace {

class Cli : public ::testing::Test {
  protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() / (std::string("vpid_cli_") + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const {
        const std::string cmd = std::string(VPID_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() +
                                " 2> " + (dir_ / "stderr.txt").string();
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    fs::path write(const std::string& name, const std::string& text) const {
        std::ofstream(dir_ / name) << text;
        return dir_ / name;
    }

    fs::path dir_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty() && line[0] != '#') rows.push_back(vpid::csv::split(line));
    return rows;
}

}  // namespace

TEST_F(Cli, SimulateCase1WritesNonEmptyFiles) {
    ASSERT_EQ(run("simulate --case 1 --out " + (dir_ / "runs").string()), 0);
    for (const char* f : {"config.json", "load_path.csv", "trajectory.csv", "hysteresis.csv", "principal.csv",
                          "observations.csv", "measurement.csv"})
        EXPECT_GT(fs::file_size(dir_ / "runs" / "case1" / f), 100u) << f;
    EXPECT_EQ(read_csv(dir_ / "runs" / "case1" / "observations.csv").size(), 61u);
}

TEST_F(Cli, SimulateCase2ShowsGrowingEnvelope) {
    ASSERT_EQ(run("simulate --case 2 --out " + (dir_ / "runs").string()), 0);
    const auto rows = read_csv(dir_ / "runs" / "case2" / "load_path.csv");
    ASSERT_GT(rows.size(), 1000u);
    const double t_end = vpid::csv::parse_double(rows.back()[0]);
    double first = 0.0, last = 0.0;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double t = vpid::csv::parse_double(rows[i][0]);
        const double f = std::max(std::abs(vpid::csv::parse_double(rows[i][1])),
                                  std::abs(vpid::csv::parse_double(rows[i][2])));
        if (t <= 0.25 * t_end) first = std::max(first, f);
        if (t >= 0.75 * t_end) last = std::max(last, f);
    }
    EXPECT_LT(first, 0.5 * last);
}

TEST_F(Cli, SimulateTwiceIsBitwiseIdentical) {
    ASSERT_EQ(run("simulate --case 2 --out " + (dir_ / "a").string()), 0);
    ASSERT_EQ(run("simulate --case 2 --out " + (dir_ / "b").string()), 0);
    for (const auto& e : fs::directory_iterator(dir_ / "a" / "case2"))
        EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / "case2" / e.path().filename())) << e.path().filename();
}

TEST_F(Cli, CorruptedConfigExitsTwoWithoutFiles) {
    const auto cfg = write("bad.json", "{\"load\": {\"case\": 2,, }");
    EXPECT_EQ(run("identify --config " + cfg.string() + " --out " + (dir_ / "runs").string()), 2);
    EXPECT_FALSE(fs::exists(dir_ / "runs"));
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("line 1"), std::string::npos);

    const auto unknown = write("unknown.json", "{\"noise\": {\"sd\": 0.1}}");
    EXPECT_EQ(run("simulate --config " + unknown.string() + " --out " + (dir_ / "runs").string()), 2);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("noise.sd"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "runs"));

    EXPECT_EQ(run("simulate --case 5"), 2);
    EXPECT_EQ(run("simulate --config " + (dir_ / "missing.json").string()), 2);
}

TEST_F(Cli, IntegratorFailureExitsThree) {
    const auto cfg = write("tight.json", R"({"integrator": {"rel_tol": 1e-30, "max_halvings": 0}})");
    EXPECT_EQ(run("simulate --config " + cfg.string() + " --out " + (dir_ / "runs").string()), 3);
    EXPECT_FALSE(fs::exists(dir_ / "runs" / "case1"));
}

TEST_F(Cli, DegenerateNoiseExitsFour) {
    const auto cfg = write("noise.json", R"({"noise": {"relative_std": 0.0, "absolute_floor": 1e-14}})");
    EXPECT_EQ(run("identify --config " + cfg.string() + " --out " + (dir_ / "runs").string()), 4);
    EXPECT_FALSE(fs::exists(dir_ / "runs" / "case1"));
}

TEST_F(Cli, IdentifyEchoesEffectiveConfigAndReducesVariance) {
    const auto cfg = write("c.json", R"({"name": "trial", "pce": {"posterior_samples": 2000}})");
    ASSERT_EQ(run("identify --config " + cfg.string() + " --case 2 --seed 99 --threads 2 --out " +
                  (dir_ / "runs").string()),
              0);
    const fs::path run_dir = dir_ / "runs" / "trial";
    const vpid::RunConfig echoed = vpid::load_config((run_dir / "config.json").string());
    EXPECT_EQ(echoed.load.load_case, 2);
    EXPECT_EQ(echoed.noise.seed, 99u);
    EXPECT_EQ(echoed.pce.threads, 2);
    EXPECT_EQ(echoed.pce.posterior_samples, 2000);
    EXPECT_EQ(echoed.pce.degree, 2);

    const auto j = nlohmann::json::parse(slurp(run_dir / "result.json"));
    ASSERT_EQ(j["parameters"].size(), 5u);
    for (const auto& p : j["parameters"]) {
        EXPECT_LT(p["post_std"].get<double>(), p["prior_std"].get<double>()) << p["name"];
        const auto rows = read_csv(run_dir / p["density_csv"].get<std::string>());
        ASSERT_EQ(rows.size(), 513u);
        EXPECT_EQ(rows[0], (std::vector<std::string>{"value", "prior_density", "post_density"}));
    }
    EXPECT_EQ(j["gain"].size(), 5u);
    EXPECT_EQ(j["gain"][0].size(), 120u);
    std::ifstream pce(run_dir / "posterior_pce.csv");
    EXPECT_EQ(vpid::read_pce_csv(pce).size(), 21u);
    const std::string summary = slurp(dir_ / "stdout.txt");
    for (const char* name : {"kappa", "g", "b_r", "b_chi", "sigma_y"})
        EXPECT_NE(summary.find(name), std::string::npos) << name;
}

TEST_F(Cli, ReportMergesCasesAndGuardsTruth) {
    const auto cfg = write("c.json", R"({"pce": {"posterior_samples": 1000}})");
    const std::string runs = (dir_ / "runs").string();
    ASSERT_EQ(run("identify --config " + cfg.string() + " --case 1 --out " + runs), 0);
    ASSERT_EQ(run("identify --config " + cfg.string() + " --case 2 --out " + runs), 0);

    ASSERT_EQ(run("report " + runs + "/case1 " + runs + "/case2 --out " + runs + "/report"), 0);
    auto rows = read_csv(dir_ / "runs" / "report" / "report.csv");
    ASSERT_EQ(rows.size(), 6u);
    for (std::size_t i = 1; i < rows.size(); ++i)
        for (const auto& cell : rows[i]) EXPECT_FALSE(cell.empty());
    EXPECT_TRUE(fs::exists(dir_ / "runs" / "report" / "report.md"));

    ASSERT_EQ(run("report " + runs + "/case2 --out " + runs + "/single"), 0);
    rows = read_csv(dir_ / "runs" / "single" / "report.csv");
    ASSERT_EQ(rows.size(), 6u);
    EXPECT_TRUE(rows[1][2].empty());
    EXPECT_FALSE(rows[1][4].empty());

    const auto other = write("o.json", R"({"name": "other", "material": {"sigma_y": 1.8e8},
                                           "pce": {"posterior_samples": 1000}})");
    ASSERT_EQ(run("identify --config " + other.string() + " --case 2 --out " + runs), 0);
    EXPECT_EQ(run("report " + runs + "/case1 " + runs + "/other --out " + runs + "/bad"), 2);
    EXPECT_NE(slurp(dir_ / "stderr.txt").find("sigma_y"), std::string::npos);
    EXPECT_FALSE(fs::exists(dir_ / "runs" / "bad"));
    EXPECT_EQ(run("report " + (dir_ / "nowhere").string()), 2);
}
