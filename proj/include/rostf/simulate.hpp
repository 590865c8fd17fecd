#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "rostf/fusion.hpp"
#include "rostf/raster.hpp"

namespace rostf {

/// Noise levels of the observation model h = h_clean + n + s: Gaussian
/// standard deviations and salt-and-pepper rates for HR and LR images.
struct CaseConfig {
    std::string name = "custom";
    double sigma_h = 0.0;
    double sigma_l = 0.0;
    double r_h = 0.0;
    double r_l = 0.0;
    std::uint64_t seed = 0;

    void validate() const;

    /// case1 noiseless; case2 sigma_h = 0.05; case3 r_h = 0.05;
    /// case4 sigma_h = r_h = 0.05. LR images are clean in all four.
    static CaseConfig preset(const std::string& name, std::uint64_t seed = 0);
};

void to_json(nlohmann::json& j, const CaseConfig& c);
void from_json(const nlohmann::json& j, CaseConfig& c);

enum class Sensor { HR, LR };

/// S B hr: k x k block means sampled on the LR grid.
MultiBandImage make_lr(const MultiBandImage& hr, std::size_t k);

/// Gaussian noise of standard deviation `sigma`, then exactly
/// round(rate * size) samples, chosen without replacement, replaced by 0 or
/// 1 with equal probability. Deterministic in `seed`.
MultiBandImage add_noise(const MultiBandImage& img, double sigma, double rate, std::uint64_t seed);

/// Noise for one observation. `stream` separates images of the same sensor
/// (0 for the reference date, 1 for the target date).
MultiBandImage add_noise(const MultiBandImage& img, const CaseConfig& cfg, Sensor which, unsigned stream = 0);

struct FixtureSpec {
    std::size_t height = 64;
    std::size_t width = 64;
    std::size_t bands = 4;
    std::size_t k = 8;
    std::size_t regions = 6;
    std::uint64_t seed = 7;
    /// Per-band brightness change shared by every region, drawn in [-shift, shift].
    double shift = 0.1;
    /// Additional per-region, per-band change, drawn in [-region_shift, region_shift].
    double region_shift = 5e-4;

    void validate() const;
};

void to_json(nlohmann::json& j, const FixtureSpec& s);
void from_json(const nlohmann::json& j, FixtureSpec& s);

struct Fixture {
    MultiBandImage h_r_true;
    MultiBandImage h_t_true;
    FusionInput inputs;
};

/// Piecewise-constant scene on a seeded Voronoi partition. Both dates share
/// the partition and differ by per-region brightness shifts; LR images come
/// from make_lr and every observation is then corrupted per `noise`.
Fixture make_fixture(const FixtureSpec& spec, const CaseConfig& noise);

/// Writes h_r.bmr, l_r.bmr, l_t.bmr, h_t.bmr (target-date ground truth) and
/// manifest.json into `dir`. The manifest holds only the fixture spec and
/// noise case, so equal seeds give byte-identical directories.
void write_fixture(const Fixture& fixture, const FixtureSpec& spec, const CaseConfig& noise,
                   const std::filesystem::path& dir);

}  // namespace rostf
