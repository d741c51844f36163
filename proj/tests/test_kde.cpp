#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "vpid/kde.hpp"

namespace {

std::vector<double> normal_samples(int n, double mu, double sd, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> d(mu, sd);
    std::vector<double> s(static_cast<std::size_t>(n));
    for (auto& x : s) x = d(rng);
    return s;
}

}  // namespace

TEST(Kde, IntegratesToOneAndTracksGaussianPdf) {
    const auto samples = normal_samples(20000, 5.0, 2.0, 11);
    std::vector<double> grid;
    for (int i = 0; i < 512; ++i) grid.push_back(5.0 - 10.0 + 20.0 * i / 511.0);
    const auto f = vpid::kde_density(samples, grid);
    double integral = 0.0;
    for (std::size_t i = 1; i < grid.size(); ++i) integral += 0.5 * (f[i] + f[i - 1]) * (grid[i] - grid[i - 1]);
    EXPECT_NEAR(integral, 1.0, 1e-3);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double u = (grid[i] - 5.0) / 2.0;
        const double pdf = std::exp(-0.5 * u * u) / (2.0 * std::sqrt(2.0 * std::numbers::pi));
        EXPECT_NEAR(f[i], pdf, 0.01);
    }
}

TEST(Kde, MatchesBruteForceSum) {
    const auto samples = normal_samples(300, 0.0, 1.0, 3);
    const std::vector<double> grid{-1.0, 0.0, 0.4, 2.5};
    const auto f = vpid::kde_density(samples, grid);
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= samples.size();
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double h = 1.06 * std::sqrt(var / (samples.size() - 1.0)) * std::pow(samples.size(), -0.2);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double acc = 0.0;
        for (double s : samples) acc += std::exp(-0.5 * std::pow((grid[g] - s) / h, 2));
        EXPECT_NEAR(f[g], acc / (samples.size() * h * std::sqrt(2.0 * std::numbers::pi)), 1e-14);
    }
}

TEST(Kde, RejectsSmallOrDegenerateSamples) {
    const std::vector<double> grid{0.0};
    EXPECT_THROW(vpid::kde_density(std::vector<double>(99, 1.0), grid), vpid::InvalidArgument);
    EXPECT_THROW(vpid::kde_density(std::vector<double>(500, 1.0), grid), vpid::DegenerateSample);
}
