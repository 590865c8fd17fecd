#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace rostf {

using Vector = std::vector<double>;

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double l1_norm(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += std::abs(v);
    return s;
}

inline double l2_norm(std::span<const double> x) { return std::sqrt(dot(x, x)); }

inline double l2_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

/// Grouped l1,2 norm. `x` is a sequence of chunks, each holding `group_size`
/// runs of length `stride`; group n of a chunk collects element n of every run.
/// A band-major image is one chunk with group_size = bands, stride = pixels.
inline double l12_norm(std::span<const double> x, std::size_t group_size, std::size_t stride) {
    const std::size_t chunk = group_size * stride;
    double total = 0.0;
    for (std::size_t base = 0; base + chunk <= x.size(); base += chunk) {
        for (std::size_t n = 0; n < stride; ++n) {
            double s = 0.0;
            for (std::size_t g = 0; g < group_size; ++g) {
                const double v = x[base + g * stride + n];
                s += v * v;
            }
            total += std::sqrt(s);
        }
    }
    return total;
}

/// y += a * x
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

inline bool all_finite(std::span<const double> x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

}  // namespace rostf
