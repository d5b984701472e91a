#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "sgdelta/core.hpp"

namespace testing {

// Smooth random field vanishing at both ends: random sine series on [-L, L].
inline std::vector<double> random_field(const sgd::Grid1D& g, unsigned seed, int modes = 8) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);
    std::vector<double> f(g.size(), 0.0);
    const double L = g.half_width();
    for (int k = 1; k <= modes; ++k) {
        const double c = coef(rng) / k;
        for (std::size_t i = 0; i < g.size(); ++i) f[i] += c * std::sin(k * M_PI * (g.x(i) + L) / (2.0 * L));
    }
    f.front() = f.back() = 0.0;
    return f;
}

inline std::vector<double> sampled(const sgd::Grid1D& g, double (*fn)(double)) {
    std::vector<double> f(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) f[i] = fn(g.x(i));
    return f;
}

inline std::filesystem::path scratch_dir(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("sgdelta_test_" + name);
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace testing
