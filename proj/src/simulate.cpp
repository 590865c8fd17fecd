#include "rostf/simulate.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "rostf/error.hpp"
#include "rostf/linops.hpp"
#include "rostf/random.hpp"

namespace rostf {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

void CaseConfig::validate() const {
    if (!(sigma_h >= 0.0) || !(sigma_l >= 0.0)) throw Error("noise standard deviations must be non-negative");
    if (!(r_h >= 0.0 && r_h <= 1.0) || !(r_l >= 0.0 && r_l <= 1.0))
        throw Error("salt-and-pepper rates must lie in [0, 1]");
}

CaseConfig CaseConfig::preset(const std::string& name, std::uint64_t seed) {
    CaseConfig c;
    c.name = name;
    c.seed = seed;
    if (name == "case1") {
    } else if (name == "case2") {
        c.sigma_h = 0.05;
    } else if (name == "case3") {
        c.r_h = 0.05;
    } else if (name == "case4") {
        c.sigma_h = 0.05;
        c.r_h = 0.05;
    } else {
        throw Error("unknown case '" + name + "' (expected case1..case4)");
    }
    return c;
}

void to_json(nlohmann::json& j, const CaseConfig& c) {
    j = nlohmann::json{{"name", c.name}, {"sigma_h", c.sigma_h}, {"sigma_l", c.sigma_l},
                       {"r_h", c.r_h},   {"r_l", c.r_l},         {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, CaseConfig& c) {
    j.at("name").get_to(c.name);
    j.at("sigma_h").get_to(c.sigma_h);
    j.at("sigma_l").get_to(c.sigma_l);
    j.at("r_h").get_to(c.r_h);
    j.at("r_l").get_to(c.r_l);
    j.at("seed").get_to(c.seed);
}

MultiBandImage make_lr(const MultiBandImage& hr, std::size_t k) {
    const BlurDownsampleOperator sb(hr.geometry(), k);
    return MultiBandImage(sb.lr_geometry(), sb.apply(hr.values()));
}

MultiBandImage add_noise(const MultiBandImage& img, double sigma, double rate, std::uint64_t seed) {
    if (!(sigma >= 0.0)) throw Error("noise standard deviation must be non-negative");
    if (!(rate >= 0.0 && rate <= 1.0)) throw Error("salt-and-pepper rate must lie in [0, 1]");
    Vector data = img.data();
    if (sigma == 0.0 && rate == 0.0) return img;

    Rng rng(seed);
    if (sigma > 0.0)
        for (double& v : data) v += sigma * rng.normal();

    const std::size_t n = data.size();
    const auto count = static_cast<std::size_t>(std::llround(rate * static_cast<double>(n)));
    if (count > 0) {
        // partial Fisher-Yates: the first `count` entries are the corrupted positions
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t i = 0; i < count; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
            std::swap(idx[i], idx[j]);
            data[idx[i]] = (rng.next() >> 63) ? 1.0 : 0.0;
        }
    }
    return MultiBandImage(img.geometry(), std::move(data));
}

MultiBandImage add_noise(const MultiBandImage& img, const CaseConfig& cfg, Sensor which, unsigned stream) {
    cfg.validate();
    const bool hr = which == Sensor::HR;
    const std::uint64_t tag = (static_cast<std::uint64_t>(hr ? 1 : 2) << 32) | stream;
    return add_noise(img, hr ? cfg.sigma_h : cfg.sigma_l, hr ? cfg.r_h : cfg.r_l, splitmix64(cfg.seed ^ splitmix64(tag)));
}

void FixtureSpec::validate() const {
    if (height == 0 || width == 0 || bands == 0) throw GeometryError("fixture dimensions must be positive");
    if (regions == 0) throw Error("fixture needs at least one region");
    if (k == 0 || height % k != 0 || width % k != 0)
        throw GeometryError("fixture size " + std::to_string(height) + "x" + std::to_string(width) +
                            " is not divisible by k = " + std::to_string(k));
    if (!(shift >= 0.0) || !(region_shift >= 0.0)) throw Error("brightness shifts must be non-negative");
}

void to_json(nlohmann::json& j, const FixtureSpec& s) {
    j = nlohmann::json{{"height", s.height}, {"width", s.width},         {"bands", s.bands},
                       {"k", s.k},           {"regions", s.regions},     {"seed", s.seed},
                       {"shift", s.shift},   {"region_shift", s.region_shift}};
}

void from_json(const nlohmann::json& j, FixtureSpec& s) {
    j.at("height").get_to(s.height);
    j.at("width").get_to(s.width);
    j.at("bands").get_to(s.bands);
    j.at("k").get_to(s.k);
    j.at("regions").get_to(s.regions);
    j.at("seed").get_to(s.seed);
    j.at("shift").get_to(s.shift);
    j.at("region_shift").get_to(s.region_shift);
}

Fixture make_fixture(const FixtureSpec& spec, const CaseConfig& noise) {
    spec.validate();
    noise.validate();
    const Geometry g{spec.height, spec.width, spec.bands};
    const std::size_t N = g.pixels(), B = g.bands, R = spec.regions;
    Rng rng(spec.seed);

    std::vector<double> cy(R), cx(R);
    for (std::size_t r = 0; r < R; ++r) {
        cy[r] = rng.uniform() * static_cast<double>(spec.height);
        cx[r] = rng.uniform() * static_cast<double>(spec.width);
    }
    // reference-date reflectance per region and band
    std::vector<double> ref(R * B), tgt(R * B), global(B);
    for (double& v : ref) v = 0.2 + 0.5 * rng.uniform();
    for (double& v : global) v = spec.shift * (2.0 * rng.uniform() - 1.0);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t b = 0; b < B; ++b)
            tgt[r * B + b] = ref[r * B + b] + global[b] + spec.region_shift * (2.0 * rng.uniform() - 1.0);

    std::vector<std::size_t> label(N);
    for (std::size_t i = 0; i < spec.height; ++i)
        for (std::size_t j = 0; j < spec.width; ++j) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t arg = 0;
            for (std::size_t r = 0; r < R; ++r) {
                const double dy = static_cast<double>(i) + 0.5 - cy[r];
                const double dx = static_cast<double>(j) + 0.5 - cx[r];
                const double d = dy * dy + dx * dx;
                if (d < best) {
                    best = d;
                    arg = r;
                }
            }
            label[i * spec.width + j] = arg;
        }

    Vector hr(g.size()), ht(g.size());
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t n = 0; n < N; ++n) {
            hr[b * N + n] = ref[label[n] * B + b];
            ht[b * N + n] = tgt[label[n] * B + b];
        }
    MultiBandImage h_r_true(g, std::move(hr));
    MultiBandImage h_t_true(g, std::move(ht));

    FusionInput inputs{add_noise(h_r_true, noise, Sensor::HR, 0),
                       add_noise(make_lr(h_r_true, spec.k), noise, Sensor::LR, 0),
                       add_noise(make_lr(h_t_true, spec.k), noise, Sensor::LR, 1)};
    return Fixture{std::move(h_r_true), std::move(h_t_true), std::move(inputs)};
}

void write_fixture(const Fixture& fixture, const FixtureSpec& spec, const CaseConfig& noise,
                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    write_raster(fixture.inputs.h_r, dir / "h_r.bmr");
    write_raster(fixture.inputs.l_r, dir / "l_r.bmr");
    write_raster(fixture.inputs.l_t, dir / "l_t.bmr");
    write_raster(fixture.h_t_true, dir / "h_t.bmr");

    nlohmann::json manifest;
    manifest["schema"] = "rostf.fixture/1";
    manifest["rng"] = Rng::kVersion;
    manifest["fixture"] = spec;
    manifest["case"] = noise;
    manifest["files"] = {{"h_r", "h_r.bmr"}, {"l_r", "l_r.bmr"}, {"l_t", "l_t.bmr"}, {"h_t_truth", "h_t.bmr"}};
    std::ofstream out(dir / "manifest.json");
    if (!out) throw Error("cannot write " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

}  // namespace rostf
