#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "rostf/error.hpp"
#include "rostf/prox.hpp"
#include "support.hpp"

using namespace rostf;

namespace {

using Projection = std::function<Vector(const Vector&)>;
using Sampler = std::function<Vector(std::mt19937_64&, const Vector& near)>;

double sum(const Vector& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Soft threshold found by bisection on sum(max(|x| - t, 0)) = r.
Vector l1_projection_by_bisection(const Vector& x, double r) {
    if (l1_norm(x) <= r) return x;
    double lo = 0.0, hi = 0.0;
    for (double v : x) hi = std::max(hi, std::abs(v));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        double s = 0.0;
        for (double v : x) s += std::max(std::abs(v) - mid, 0.0);
        (s > r ? lo : hi) = mid;
    }
    Vector out(x);
    for (double& v : out) v = std::copysign(std::max(std::abs(v) - hi, 0.0), v);
    return out;
}

// Pulls z toward `center` until it lies in {||z - center||_p <= r}.
Vector shrink_into_ball(Vector z, const Vector& center, int p, double r) {
    Vector d(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) d[i] = z[i] - center[i];
    const double n = p == 1 ? l1_norm(d) : l2_norm(d);
    if (n > r) {
        const double t = r / n * (1.0 - 1e-15);
        for (std::size_t i = 0; i < z.size(); ++i) z[i] = center[i] + t * d[i];
    }
    return z;
}

void check_projection(const Projection& P, const Sampler& feasible, std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    double idempotence = 0.0, violation = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x = test::random_vector(rng, n, -3.0, 3.0);
        const Vector px = P(x);
        const Vector ppx = P(px);
        idempotence = std::max(idempotence, l2_distance(px, ppx));
        const double best = l2_distance(x, px);
        std::normal_distribution<double> jitter(0.0, 0.05);
        for (int s = 0; s < 1000; ++s) {
            Vector near = px;
            if (s % 2 == 0)
                for (double& v : near) v += jitter(rng);
            else
                near = test::random_vector(rng, n, -3.0, 3.0);
            const Vector z = feasible(rng, near);
            violation = std::max(violation, best - l2_distance(x, z));
        }
    }
    CHECK(idempotence <= 1e-12);
    CHECK(violation <= 1e-10);
}

}  // namespace

TEST_CASE("prox of the l12 norm") {
    Vector zero(8, 0.0);
    prox_l12(zero, 2, 4, 0.7);
    CHECK(zero == Vector(8, 0.0));

    Vector v{3.0, 4.0};
    prox_l12(v, 2, 1, 1.0);
    CHECK(v[0] == doctest::Approx(2.4).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(3.2).epsilon(1e-15));

    std::mt19937_64 rng(4);
    const Vector x = test::random_vector(rng, 30);
    Vector tiny = x;
    prox_l12(tiny, 3, 10, 1e-300);
    CHECK(l2_distance(tiny, x) <= 1e-12);

    CHECK_THROWS_AS(prox_l12(tiny, 4, 10, 1.0), GeometryError);
}

TEST_CASE("prox_l12 keeps group directions") {
    std::mt19937_64 rng(8);
    for (int t = 0; t < 200; ++t) {
        const std::size_t groups = 6, size = 3;
        const Vector x = test::random_vector(rng, groups * size);
        Vector y = x;
        prox_l12(y, size, groups, 0.5);
        for (std::size_t n = 0; n < groups; ++n) {
            double gx = 0.0, gy = 0.0, cross = 0.0;
            for (std::size_t g = 0; g < size; ++g) {
                gx += x[g * groups + n] * x[g * groups + n];
                gy += y[g * groups + n] * y[g * groups + n];
                cross += x[g * groups + n] * y[g * groups + n];
            }
            if (gy == 0.0) {
                CHECK(std::sqrt(gx) <= 0.5 + 1e-15);
            } else {
                CHECK(cross == doctest::Approx(std::sqrt(gx * gy)).epsilon(1e-12));
                CHECK(std::sqrt(gy) == doctest::Approx(std::sqrt(gx) - 0.5).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("hyperslab projection") {
    Vector inside{0.5, 1.0};
    project_hyperslab(inside, {1.2, 0.5});
    CHECK(inside == Vector{0.5, 1.0});

    Vector v{2.0, 2.0};
    project_hyperslab(v, {2.0, 1.0});
    CHECK(v == Vector{1.5, 1.5});

    Vector low{-1.0, 0.0, 1.0};
    project_hyperslab(low, {3.0, 0.0});
    CHECK(sum(low) == doctest::Approx(3.0).epsilon(1e-15));

    CHECK_THROWS_AS(project_hyperslab(v, {0.0, -1.0}), Error);
}

TEST_CASE("l2 ball projection") {
    Vector inside{0.3, -0.4};
    project_l2_ball(inside, {2, {}, 1.0});
    CHECK(inside == Vector{0.3, -0.4});

    Vector v{3.0, 0.0};
    project_l2_ball(v, {2, {}, 1.0});
    CHECK(v == Vector{1.0, 0.0});

    const Vector c{1.0, -2.0, 0.5};
    Vector w{7.0, 7.0, 7.0};
    project_l2_ball(w, {2, c, 0.0});
    CHECK(w == c);

    Vector boundary{0.6, 0.8};
    project_l2_ball(boundary, {2, {}, 1.0});
    CHECK(boundary == Vector{0.6, 0.8});
}

TEST_CASE("l1 ball projection") {
    Vector inside{0.2, -0.3};
    project_l1_ball(inside, 1.0);
    CHECK(inside == Vector{0.2, -0.3});

    Vector a{2.0, 0.0};
    project_l1_ball(a, 1.0);
    CHECK(a == Vector{1.0, 0.0});

    Vector b{1.0, 1.0};
    project_l1_ball(b, 1.0);
    CHECK(b == Vector{0.5, 0.5});

    Vector c{-4.0, 2.0, 0.5};
    project_l1_ball(c, 0.0);
    CHECK(c == Vector{0.0, 0.0, 0.0});

    std::mt19937_64 rng(12);
    for (int t = 0; t < 300; ++t) {
        const std::size_t n = 1 + t % 40;
        const Vector x = test::random_vector(rng, n, -2.0, 2.0);
        const double r = 0.05 * (t % 30);
        Vector fast = x;
        project_l1_ball(fast, r);
        const Vector slow = l1_projection_by_bisection(x, r);
        CHECK(l2_distance(fast, slow) <= 1e-12);
        CHECK(l1_norm(fast) <= std::max(r, 0.0) * (1 + 1e-12) + 1e-15);
    }

    CHECK_THROWS_AS(project_ball(a, {1, Vector{1.0, 0.0}, 1.0}), Error);
    CHECK_THROWS_AS(project_ball(a, {3, {}, 1.0}), Error);
}

TEST_CASE("projections are idempotent and distance-optimal") {
    const std::size_t n = 6;

    SUBCASE("hyperslab") {
        const HyperslabSpec spec{1.5, 0.75};
        check_projection(
            [&](const Vector& x) {
                Vector y = x;
                project_hyperslab(y, spec);
                return y;
            },
            [&](std::mt19937_64& rng, const Vector& near) {
                std::uniform_real_distribution<double> u(spec.lower(), spec.upper());
                Vector z = near;
                const double shift = (u(rng) - sum(z)) / double(n);
                for (double& v : z) v += shift;
                return z;
            },
            n, 1);
    }
    SUBCASE("l2 ball") {
        const Vector center{0.5, -0.5, 0.0, 1.0, 0.2, -1.0};
        check_projection(
            [&](const Vector& x) {
                Vector y = x;
                project_l2_ball(y, {2, center, 1.25});
                return y;
            },
            [&](std::mt19937_64&, const Vector& near) { return shrink_into_ball(near, center, 2, 1.25); }, n, 2);
    }
    SUBCASE("l1 ball") {
        const Vector origin(n, 0.0);
        check_projection(
            [&](const Vector& x) {
                Vector y = x;
                project_l1_ball(y, 2.0);
                return y;
            },
            [&](std::mt19937_64&, const Vector& near) { return shrink_into_ball(near, origin, 1, 2.0); }, n, 3);
    }
}

TEST_CASE("projections are nonexpansive") {
    std::mt19937_64 rng(31);
    for (int t = 0; t < 500; ++t) {
        Vector x = test::random_vector(rng, 8, -3, 3), y = test::random_vector(rng, 8, -3, 3);
        const double before = l2_distance(x, y);
        Vector a = x, b = y;
        project_l1_ball(a, 1.5);
        project_l1_ball(b, 1.5);
        CHECK(l2_distance(a, b) <= before + 1e-14);
        a = x, b = y;
        prox_l12(a, 2, 4, 0.8);
        prox_l12(b, 2, 4, 0.8);
        CHECK(l2_distance(a, b) <= before + 1e-14);
        a = x, b = y;
        project_hyperslab(a, {0.0, 1.0});
        project_hyperslab(b, {0.0, 1.0});
        CHECK(l2_distance(a, b) <= before + 1e-14);
    }
}

TEST_CASE("conjugate prox through the Moreau identity") {
    std::mt19937_64 rng(77);

    SUBCASE("indicator of an l2 ball") {
        const ProxFn ball = [](std::span<double> x, double) { project_l2_ball(x, {2, {}, 0.7}); };
        for (int t = 0; t < 200; ++t) {
            const Vector x = test::random_vector(rng, 5, -2, 2);
            const double gamma = 0.1 + 0.05 * t;
            Vector got = x;
            prox_conjugate(ball, got, gamma);
            Vector expect = x;
            for (double& v : expect) v /= gamma;
            project_l2_ball(expect, {2, {}, 0.7});
            for (std::size_t i = 0; i < x.size(); ++i) expect[i] = x[i] - gamma * expect[i];
            CHECK(l2_distance(got, expect) <= 1e-12);
        }
    }
    SUBCASE("l12 norm, whose conjugate is the indicator of unit groups") {
        const std::size_t groups = 5, size = 3;
        const ProxFn l12 = [&](std::span<double> x, double g) { prox_l12(x, size, groups, g); };
        Vector zero(groups * size, 0.0);
        prox_conjugate(l12, zero, 0.3);
        CHECK(zero == Vector(groups * size, 0.0));
        for (int t = 0; t < 200; ++t) {
            const Vector x = test::random_vector(rng, groups * size, -2, 2);
            const double gamma = 0.05 + 0.02 * t;
            Vector got = x;
            prox_conjugate(l12, got, gamma);
            // Group-wise projection onto the unit l2 ball.
            Vector expect = x;
            for (std::size_t n = 0; n < groups; ++n) {
                double s = 0.0;
                for (std::size_t g = 0; g < size; ++g) s += x[g * groups + n] * x[g * groups + n];
                const double scale = std::min(1.0, 1.0 / std::sqrt(s));
                for (std::size_t g = 0; g < size; ++g) expect[g * groups + n] *= scale;
            }
            CHECK(l2_distance(got, expect) <= 1e-12);

            // prox_{gamma f*}(x) + gamma prox_{f/gamma}(x/gamma) = x
            Vector inner = x;
            for (double& v : inner) v /= gamma;
            prox_l12(inner, size, groups, 1.0 / gamma);
            double residual = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i)
                residual = std::max(residual, std::abs(got[i] + gamma * inner[i] - x[i]));
            CHECK(residual <= 1e-12);
        }
    }
    CHECK_THROWS_AS(prox_conjugate([](std::span<double>, double) {}, std::span<double>(), 0.0), Error);
}
