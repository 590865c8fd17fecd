#include "rostf/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "rostf/error.hpp"

namespace rostf {

void prox_l12(std::span<double> x, std::size_t group_size, std::size_t stride, double gamma) {
    const std::size_t chunk = group_size * stride;
    if (chunk == 0 || x.size() % chunk != 0)
        throw GeometryError("prox_l12: length " + std::to_string(x.size()) + " is not a multiple of " +
                            std::to_string(group_size) + " x " + std::to_string(stride));
    for (std::size_t base = 0; base < x.size(); base += chunk) {
        for (std::size_t n = 0; n < stride; ++n) {
            double s = 0.0;
            for (std::size_t g = 0; g < group_size; ++g) {
                const double v = x[base + g * stride + n];
                s += v * v;
            }
            const double norm = std::sqrt(s);
            // zero groups stay zero; no 0/0
            const double shrink = norm > gamma ? 1.0 - gamma / norm : 0.0;
            for (std::size_t g = 0; g < group_size; ++g) x[base + g * stride + n] *= shrink;
        }
    }
}

void project_hyperslab(std::span<double> x, const HyperslabSpec& spec) {
    if (spec.radius < 0.0) throw Error("hyperslab radius must be non-negative");
    double total = 0.0;
    for (double v : x) total += v;
    double target;
    if (total < spec.lower())
        target = spec.lower();
    else if (total > spec.upper())
        target = spec.upper();
    else
        return;
    const double shift = (target - total) / static_cast<double>(x.size());
    for (double& v : x) v += shift;
}

void project_l2_ball(std::span<double> x, const BallSpec& spec) {
    if (spec.radius < 0.0) throw Error("ball radius must be non-negative");
    const bool centered = !spec.center.empty();
    if (centered && spec.center.size() != x.size())
        throw GeometryError("ball center has length " + std::to_string(spec.center.size()) + ", operand " +
                            std::to_string(x.size()));
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - (centered ? spec.center[i] : 0.0);
        s += d * d;
    }
    const double dist = std::sqrt(s);
    if (dist <= spec.radius) return;
    const double scale = spec.radius / dist;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = centered ? spec.center[i] : 0.0;
        x[i] = c + scale * (x[i] - c);
    }
}

void project_l1_ball(std::span<double> x, double radius) {
    if (radius < 0.0) throw Error("ball radius must be non-negative");
    if (l1_norm(x) <= radius) return;
    if (radius == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        return;
    }
    // The threshold is at least (sum of kept magnitudes - radius) / #kept, so
    // entries at or below that bound vanish either way. A few filtering
    // passes shrink what has to be sorted.
    Vector mag(x.size());
    std::transform(x.begin(), x.end(), mag.begin(), [](double v) { return std::abs(v); });
    for (int pass = 0; pass < 4; ++pass) {
        double sum = 0.0;
        for (double m : mag) sum += m;
        const double floor = (sum - radius) / static_cast<double>(mag.size());
        const auto kept = std::remove_if(mag.begin(), mag.end(), [floor](double m) { return m <= floor; });
        if (kept == mag.end()) break;
        mag.erase(kept, mag.end());
    }
    std::sort(mag.begin(), mag.end(), std::greater<>());

    // Largest rho with mag[rho] > (sum_{i<=rho} mag[i] - radius) / (rho + 1).
    double prefix = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < mag.size(); ++i) {
        prefix += mag[i];
        const double t = (prefix - radius) / static_cast<double>(i + 1);
        if (mag[i] > t)
            theta = t;
        else
            break;
    }
    for (double& v : x) {
        const double a = std::abs(v) - theta;
        v = a > 0.0 ? std::copysign(a, v) : 0.0;
    }
}

void project_ball(std::span<double> x, const BallSpec& spec) {
    if (spec.p == 2) {
        project_l2_ball(x, spec);
    } else if (spec.p == 1) {
        for (double c : spec.center)
            if (c != 0.0) throw Error("l1-ball projection supports only origin-centred balls");
        project_l1_ball(x, spec.radius);
    } else {
        throw Error("ball norm must be 1 or 2, got " + std::to_string(spec.p));
    }
}

void prox_conjugate(const ProxFn& prox_f, std::span<double> x, double gamma) {
    if (!(gamma > 0.0)) throw Error("prox index must be positive");
    Vector scaled(x.begin(), x.end());
    const double inv = 1.0 / gamma;
    for (double& v : scaled) v *= inv;
    prox_f(scaled, inv);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] -= gamma * scaled[i];
}

}  // namespace rostf
