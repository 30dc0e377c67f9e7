#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "bolab/grid.hpp"

namespace bolab::testing {

inline constexpr double pi = std::numbers::pi;

inline Field gaussian(const Grid& g, double center = 0.0, double width = 1.0) {
    return sample(g, [&](double x) {
        const double y = (x - center) / width;
        return std::exp(-y * y);
    });
}

/// Hand-rolled generator of smooth localized data: sums of 1 to 4 Gaussians
/// with random amplitude, center and width.
struct BumpGenerator {
    std::mt19937_64 rng;
    double center_range = 4.0;

    explicit BumpGenerator(std::uint64_t seed) : rng(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
    int count() { return std::uniform_int_distribution<int>(1, 4)(rng); }

    Field operator()(const Grid& g) {
        const int n = count();
        std::vector<double> a, c, w;
        for (int i = 0; i < n; ++i) {
            a.push_back(uniform(-1.0, 1.0));
            c.push_back(uniform(-center_range, center_range));
            w.push_back(uniform(0.7, 2.0));
        }
        return sample(g, [&](double x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const double y = (x - c[static_cast<std::size_t>(i)]) / w[static_cast<std::size_t>(i)];
                s += a[static_cast<std::size_t>(i)] * std::exp(-y * y);
            }
            return s;
        });
    }

    /// Mean-zero data: the x-derivative of a random bump sum, in closed form.
    Field mean_zero(const Grid& g) {
        const int n = count();
        std::vector<double> a, c, w;
        for (int i = 0; i < n; ++i) {
            a.push_back(uniform(-1.0, 1.0));
            c.push_back(uniform(-center_range, center_range));
            w.push_back(uniform(0.7, 2.0));
        }
        return sample(g, [&](double x) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) {
                const auto k = static_cast<std::size_t>(i);
                const double y = (x - c[k]) / w[k];
                s += a[k] * (-2.0 * y / w[k]) * std::exp(-y * y);
            }
            return s;
        });
    }
};

} // namespace bolab::testing
