#pragma once

//! \file kde.hpp
//! \brief Gaussian kernel density estimate with Silverman's bandwidth.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "vpid/errors.hpp"

namespace vpid {

//! \throws InvalidArgument with fewer than 100 samples, DegenerateSample if the sample std is zero
inline std::vector<double> kde_density(std::span<const double> samples, std::span<const double> grid) {
    if (samples.size() < 100) throw InvalidArgument("kernel density estimate needs at least 100 samples");
    const auto [min_it, max_it] = std::minmax_element(samples.begin(), samples.end());
    if (*min_it == *max_it) throw DegenerateSample("kernel density estimate on a zero-variance sample");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double sd = std::sqrt(var / (n - 1.0));
    if (!(sd > 0.0)) throw DegenerateSample("kernel density estimate on a zero-variance sample");

    const double h = 1.06 * sd * std::pow(n, -0.2);
    const double norm = 1.0 / (n * h * std::sqrt(2.0 * std::numbers::pi));
    // Kernels beyond 9 bandwidths contribute below exp(-40) and are skipped.
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    std::vector<double> out(grid.size(), 0.0);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const auto lo = std::lower_bound(sorted.begin(), sorted.end(), grid[g] - 9.0 * h);
        const auto hi = std::upper_bound(lo, sorted.end(), grid[g] + 9.0 * h);
        double acc = 0.0;
        for (auto it = lo; it != hi; ++it) {
            const double u = (grid[g] - *it) / h;
            acc += std::exp(-0.5 * u * u);
        }
        out[g] = acc * norm;
    }
    return out;
}

}  // namespace vpid
