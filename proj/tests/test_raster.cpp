#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "rostf/error.hpp"
#include "rostf/raster.hpp"
#include "support.hpp"

using namespace rostf;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("rostf_test_raster_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::vector<unsigned char> replace_header(const std::vector<unsigned char>& bytes, const std::string& header) {
    auto nl = std::find(bytes.begin() + 8, bytes.end(), '\n');
    std::vector<unsigned char> out(bytes.begin(), bytes.begin() + 8);
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), nl, bytes.end());
    return out;
}

}  // namespace

TEST_CASE("image construction checks its shape") {
    CHECK_THROWS_AS(MultiBandImage({2, 2, 1}, Vector(3)), GeometryError);
    CHECK_THROWS_AS(MultiBandImage({0, 2, 1}), GeometryError);
    CHECK_THROWS_AS(MultiBandImage({1, 1, 1}, Vector{std::nan("")}), Error);

    const MultiBandImage img({2, 3, 2}, Vector{0, 1, 2, 3, 4, 5, 10, 11, 12, 13, 14, 15});
    CHECK(img(1, 1, 2) == 15);
    CHECK(img.band(1).values()[0] == 10);
    CHECK(img.band(0)(1, 0) == 3);
    CHECK_THROWS_AS(img.band(2), GeometryError);
}

TEST_CASE("band_mean") {
    CHECK(band_mean(MultiBandImage({5, 7, 2}, 0.3), 1) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(band_mean(MultiBandImage({1, 1, 1}, 1.0), 0) == 1.0);
    const MultiBandImage img({2, 2, 1}, Vector{0.0, 0.2, 0.4, 0.6});
    CHECK(band_mean(img, 0) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_AS(band_mean(img, 1), GeometryError);
}

TEST_CASE("norms") {
    const Norms zero = norms(MultiBandImage({3, 3, 2}));
    CHECK(zero.l1 == 0.0);
    CHECK(zero.l2 == 0.0);
    CHECK(zero.l12 == 0.0);

    const Norms n = norms(MultiBandImage({1, 1, 2}, Vector{3, 4}));
    CHECK(n.l1 == 7.0);
    CHECK(n.l2 == 5.0);
    CHECK(n.l12 == 5.0);

    const MultiBandImage single = test::random_image({4, 5, 1}, 3, -1.0, 1.0);
    CHECK(norms(single).l12 == doctest::Approx(norms(single).l1).epsilon(1e-14));
}

TEST_CASE("norm ordering and mean identity on random images") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const std::size_t b = 1 + seed % 5;
        const MultiBandImage img = test::random_image({3 + seed % 4, 2 + seed % 3, b}, seed, -2.0, 2.0);
        const Norms n = norms(img);
        CHECK(n.l12 <= n.l1 * (1 + 1e-14));
        CHECK(n.l2 <= n.l12 * (1 + 1e-14));
    }
    const MultiBandImage pos = test::random_image({6, 6, 1}, 11);
    CHECK(band_mean(pos, 0) == doctest::Approx(norms(pos).l1 / 36.0).epsilon(1e-14));
}

TEST_CASE("raster round trip is bit exact") {
    const fs::path dir = scratch_dir("roundtrip");
    const MultiBandImage img = test::random_image({4, 4, 3}, 42, -5.0, 5.0);
    write_raster(img, dir / "a.bmr");
    const MultiBandImage back = read_raster(dir / "a.bmr");
    REQUIRE(back.geometry() == img.geometry());
    CHECK(std::memcmp(back.data().data(), img.data().data(), img.size() * sizeof(double)) == 0);
    CHECK(encode_raster(back) == encode_raster(img));

    const Vector odd{-0.0, 5e-324, 1.7976931348623157e308, 0.1};
    const MultiBandImage edge({2, 2, 1}, odd);
    const MultiBandImage edge_back = decode_raster(encode_raster(edge));
    CHECK(std::memcmp(edge_back.data().data(), odd.data(), sizeof(double) * 4) == 0);
}

TEST_CASE("decode errors") {
    const std::vector<unsigned char> good = encode_raster(MultiBandImage({2, 2, 1}, 0.5));

    SUBCASE("zero bands") {
        const auto bad = replace_header(
            good, R"({"height":2,"width":2,"bands":0,"dtype":"f64","layout":"band-major"})");
        CHECK_THROWS_AS(decode_raster(bad), DecodeError);
    }
    SUBCASE("malformed header") {
        CHECK_THROWS_AS(decode_raster(replace_header(good, "{not json")), DecodeError);
    }
    SUBCASE("bad magic") {
        auto bad = good;
        bad[0] = 'X';
        CHECK_THROWS_AS(decode_raster(bad), DecodeError);
    }
    SUBCASE("truncated payload names both byte counts") {
        auto bad = good;
        bad.resize(bad.size() - 3);
        try {
            decode_raster(bad);
            FAIL("expected a decode error");
        } catch (const DecodeError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("32") != std::string::npos);
            CHECK(msg.find("29") != std::string::npos);
        }
    }
    SUBCASE("non-finite sample") {
        auto bad = good;
        const double inf = std::numeric_limits<double>::infinity();
        std::memcpy(bad.data() + bad.size() - 8, &inf, 8);
        CHECK_THROWS_AS(decode_raster(bad), DecodeError);
    }
    SUBCASE("missing file names the path") {
        try {
            read_raster("/nonexistent/where.bmr");
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("/nonexistent/where.bmr") != std::string::npos);
        }
    }
}

TEST_CASE("png preview is written") {
    const fs::path dir = scratch_dir("png");
    write_png(test::random_image({8, 8, 4}, 1), dir / "rgb.png");
    write_png(test::random_image({8, 8, 1}, 2, -3, 3), dir / "gray.png", PngScaling::MinMax);
    std::ifstream in(dir / "rgb.png", std::ios::binary);
    char sig[8];
    in.read(sig, 8);
    CHECK(std::memcmp(sig, "\x89PNG\r\n\x1a\n", 8) == 0);
    CHECK(fs::file_size(dir / "gray.png") > 0);
}
