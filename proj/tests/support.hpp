#pragma once

#include <cstdint>
#include <random>

#include "rostf/raster.hpp"

namespace rostf::test {

inline Vector random_vector(std::mt19937_64& rng, std::size_t n, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    Vector v(n);
    for (double& x : v) x = u(rng);
    return v;
}

inline MultiBandImage random_image(const Geometry& g, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
    std::mt19937_64 rng(seed);
    return MultiBandImage(g, random_vector(rng, g.size(), lo, hi));
}

inline double rel_gap(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

}  // namespace rostf::test
