#pragma once

#include <cstddef>
#include <functional>
#include <span>

#include "rostf/vecmath.hpp"

namespace rostf {

/// {z : |center - 1^T z| <= radius}
struct HyperslabSpec {
    double center = 0.0;
    double radius = 0.0;

    double lower() const { return center - radius; }
    double upper() const { return center + radius; }
};

/// {z : ||z - center||_p <= radius}. An empty center means the origin.
struct BallSpec {
    int p = 2;
    std::span<const double> center;
    double radius = 0.0;
};

// All operators below work in place on `x`.

/// Group soft-thresholding, the prox of gamma * ||.||_{1,2}. Grouping as in
/// l12_norm(): chunks of `group_size` runs of length `stride`.
void prox_l12(std::span<double> x, std::size_t group_size, std::size_t stride, double gamma);

/// Projection onto a hyperslab, shifting every entry by the same amount.
void project_hyperslab(std::span<double> x, const HyperslabSpec& spec);

/// Projection onto the l2 ball; points on the boundary are left unchanged.
void project_l2_ball(std::span<double> x, const BallSpec& spec);

/// Projection onto the origin-centred l1 ball of the given radius. Sorts the
/// magnitudes and locates the soft threshold from prefix sums, O(n log n).
void project_l1_ball(std::span<double> x, double radius);

/// Dispatches on spec.p (1 requires an origin center).
void project_ball(std::span<double> x, const BallSpec& spec);

/// In-place prox oracle: x <- prox_{gamma f}(x).
using ProxFn = std::function<void(std::span<double> x, double gamma)>;

/// x <- prox_{gamma f*}(x) = x - gamma * prox_{f/gamma}(x / gamma).
void prox_conjugate(const ProxFn& prox_f, std::span<double> x, double gamma);

}  // namespace rostf
