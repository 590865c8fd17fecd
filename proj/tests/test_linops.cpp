#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <string>

#include "rostf/error.hpp"
#include "rostf/linops.hpp"
#include "support.hpp"

using namespace rostf;

namespace {

void check_adjoint(const LinearOperator& op, std::uint64_t seed, int trials = 100) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int t = 0; t < trials; ++t) {
        const Vector x = test::random_vector(rng, op.cols());
        const Vector y = test::random_vector(rng, op.rows());
        const double lhs = dot(op.apply(x), y);
        const double rhs = dot(x, op.apply_adjoint(y));
        worst = std::max(worst, test::rel_gap(lhs, rhs));
    }
    CHECK(worst <= 1e-12);
}

// Mean over the k x k window anchored at (i, j), clamping indices at the
// bottom and right edges.
Vector naive_blur(const MultiBandImage& img, std::size_t k) {
    const std::size_t h = img.height(), w = img.width();
    Vector out(img.size());
    for (std::size_t b = 0; b < img.bands(); ++b)
        for (std::size_t i = 0; i < h; ++i)
            for (std::size_t j = 0; j < w; ++j) {
                double s = 0.0;
                for (std::size_t di = 0; di < k; ++di)
                    for (std::size_t dj = 0; dj < k; ++dj)
                        s += img(b, std::min(i + di, h - 1), std::min(j + dj, w - 1));
                out[b * h * w + i * w + j] = s / double(k * k);
            }
    return out;
}

Vector permute_bands(const Vector& v, const Geometry& g, const std::vector<std::size_t>& perm) {
    Vector out(v.size());
    const std::size_t n = g.pixels();
    for (std::size_t b = 0; b < g.bands; ++b)
        std::copy_n(v.begin() + perm[b] * n, n, out.begin() + b * n);
    return out;
}

}  // namespace

TEST_CASE("difference operator on a 2x2 band") {
    const double a = 0.1, b = 0.7, c = 0.4, d = 1.3;
    const Vector x{a, b, c, d};
    const Geometry g{2, 2, 1};
    const Vector dv = DiffOperator(g, DiffDirection::Vertical).apply(x);
    CHECK(dv == Vector{c - a, d - b, 0.0, 0.0});
    const Vector dh = DiffOperator(g, DiffDirection::Horizontal).apply(x);
    CHECK(dh == Vector{b - a, 0.0, d - c, 0.0});
    const Vector stacked = DiffOperator(g).apply(x);
    REQUIRE(stacked.size() == 8);
    CHECK(std::equal(dv.begin(), dv.end(), stacked.begin()));
    CHECK(std::equal(dh.begin(), dh.end(), stacked.begin() + 4));
}

TEST_CASE("difference operator annihilates constants") {
    const Geometry g{7, 5, 3};
    const Vector d = DiffOperator(g).apply(MultiBandImage(g, 0.42).values());
    CHECK(d.size() == 2 * g.size());
    CHECK(std::all_of(d.begin(), d.end(), [](double v) { return v == 0.0; }));
}

TEST_CASE("geometry mismatch is rejected") {
    const DiffOperator d({4, 4, 1});
    Vector out(d.rows());
    CHECK_THROWS_AS(d.apply(Vector(15), out), GeometryError);
    CHECK_THROWS_AS(BlurOperator({3, 3, 1}, 4), GeometryError);
    CHECK_THROWS_AS(BlurOperator({3, 3, 1}, 0), GeometryError);
    try {
        DownsampleOperator({6, 8, 1}, 4);
        FAIL("expected a divisibility error");
    } catch (const GeometryError& e) {
        CHECK(std::string(e.what()).find("crop") != std::string::npos);
    }
}

TEST_CASE("blur matches a direct window average") {
    const Geometry g{9, 7, 2};
    const MultiBandImage img = test::random_image(g, 5);
    for (std::size_t k : {1u, 2u, 3u, 7u}) {
        const Vector fast = BlurOperator(g, k).apply(img.values());
        const Vector slow = naive_blur(img, k);
        for (std::size_t i = 0; i < fast.size(); ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-13));
    }
    CHECK(BlurOperator(g, 1).apply(img.values()) == img.data());
    const Vector flat = BlurOperator(g, 4).apply(MultiBandImage(g, 0.37).values());
    for (double v : flat) CHECK(v == doctest::Approx(0.37).epsilon(1e-14));
}

TEST_CASE("downsampling keeps top-left samples") {
    const Geometry g{4, 4, 1};
    Vector x(16);
    for (std::size_t i = 0; i < 16; ++i) x[i] = double(i);
    const DownsampleOperator s(g, 2);
    CHECK(s.lr_geometry() == Geometry{2, 2, 1});
    CHECK(s.apply(x) == Vector{0.0, 2.0, 8.0, 10.0});
    CHECK(DownsampleOperator(g, 1).apply(x) == x);

    // S^T S is the 0/1 mask of the sampled positions.
    const Vector mask = s.apply_adjoint(s.apply(Vector(16, 1.0)));
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = 0; j < 4; ++j) CHECK(mask[i * 4 + j] == ((i % 2 == 0 && j % 2 == 0) ? 1.0 : 0.0));
}

TEST_CASE("blur then downsample is the block mean") {
    const Geometry g{8, 12, 3};
    const MultiBandImage img = test::random_image(g, 9);
    const auto blur = std::make_shared<BlurOperator>(g, 4);
    const auto down = std::make_shared<DownsampleOperator>(g, 4);
    const ComposedOperator composed(down, blur, 2.0);
    const BlurDownsampleOperator direct(g, 4);
    const Vector a = composed.apply(img.values());
    const Vector b = direct.apply(img.values());
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-13));

    const Vector constant = direct.apply(MultiBandImage(g, 0.8).values());
    for (double v : constant) CHECK(v == doctest::Approx(0.8).epsilon(1e-14));
}

TEST_CASE("adjoint identity") {
    const Geometry g{12, 10, 3};
    SUBCASE("identity") { check_adjoint(IdentityOperator(50), 1); }
    SUBCASE("vertical") { check_adjoint(DiffOperator(g, DiffDirection::Vertical), 2); }
    SUBCASE("horizontal") { check_adjoint(DiffOperator(g, DiffDirection::Horizontal), 3); }
    SUBCASE("stacked") { check_adjoint(DiffOperator(g), 4); }
    SUBCASE("blur") {
        check_adjoint(BlurOperator(g, 3), 5);
        check_adjoint(BlurOperator({11, 13, 2}, 5), 6);
    }
    SUBCASE("downsample") { check_adjoint(DownsampleOperator(g, 2), 7); }
    SUBCASE("blur-downsample") { check_adjoint(BlurDownsampleOperator({16, 24, 2}, 8), 8); }
    SUBCASE("composed") {
        const auto blur = std::make_shared<BlurOperator>(g, 2);
        const auto down = std::make_shared<DownsampleOperator>(g, 2);
        check_adjoint(ComposedOperator(down, blur, 2.0), 9);
    }
}

TEST_CASE("declared norm bounds") {
    const Geometry g{8, 8, 1};
    CHECK(DiffOperator(g).norm_sq_bound() == 8.0);
    CHECK(DiffOperator(g, DiffDirection::Vertical).norm_sq_bound() == 4.0);
    CHECK(IdentityOperator(10).norm_sq_bound() == 1.0);
    CHECK(BlurDownsampleOperator(g, 2).norm_sq_bound() == 2.0);
    CHECK(BlurOperator(g, 3).norm_sq_bound() == 4.0);
}

TEST_CASE("power iteration stays under the declared bounds") {
    CHECK(power_iteration_norm(IdentityOperator(64), 20, 3) == doctest::Approx(1.0).epsilon(1e-9));

    const DiffOperator d({32, 32, 1});
    const double dn = power_iteration_norm(d, 300, 1);
    CHECK(dn <= std::sqrt(8.0));
    CHECK(dn > 2.5);

    const BlurDownsampleOperator sb({8, 8, 1}, 2);
    const double sbn = power_iteration_norm(sb, 100, 1);
    CHECK(sbn <= std::sqrt(2.0));
    CHECK(sbn == doctest::Approx(0.5).epsilon(1e-9));

    const BlurOperator b({16, 16, 2}, 3);
    const double bn = power_iteration_norm(b, 200, 2);
    CHECK(bn > 1.0);
    CHECK(bn * bn <= b.norm_sq_bound());
    CHECK(power_iteration_norm(BlurOperator({16, 16, 2}, 1), 5, 2) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK(power_iteration_norm(d, 50, 9) == power_iteration_norm(d, 50, 9));
}

TEST_CASE("blur and downsampling act band-wise") {
    const Geometry g{8, 8, 4};
    const std::vector<std::size_t> perm{2, 0, 3, 1};
    const MultiBandImage img = test::random_image(g, 21);
    const Vector permuted = permute_bands(img.data(), g, perm);

    const BlurOperator b(g, 3);
    CHECK(b.apply(permuted) == permute_bands(b.apply(img.values()), g, perm));

    const DownsampleOperator s(g, 2);
    CHECK(s.apply(permuted) == permute_bands(s.apply(img.values()), s.lr_geometry(), perm));
}

TEST_CASE("nearest-neighbour upsampling") {
    const Geometry lr{1, 2, 1};
    const Vector up = upsample_nearest(Vector{1.0, 2.0}, lr, 2);
    CHECK(up == Vector{1, 1, 2, 2, 1, 1, 2, 2});
    CHECK(lr_geometry_for({16, 8, 3}, 4) == Geometry{4, 2, 3});
    CHECK_THROWS_AS(lr_geometry_for({10, 8, 1}, 4), GeometryError);
}
