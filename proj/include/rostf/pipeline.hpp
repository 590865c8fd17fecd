#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rostf/fusion.hpp"
#include "rostf/metrics.hpp"
#include "rostf/simulate.hpp"

namespace rostf::ppds {
void to_json(nlohmann::json& j, const StoppingRule& s);
void from_json(const nlohmann::json& j, StoppingRule& s);
}  // namespace rostf::ppds

// Library side of the rostf command-line tool. Each command reads and
// writes files only; the executable adds flag parsing and exit codes.
namespace rostf::pipeline {

inline constexpr const char* kManifestSchema = "rostf.run/1";
inline constexpr const char* kReportSchema = "rostf.report/1";
inline constexpr const char* kVersion = ROSTF_VERSION;

enum ExitCode : int { kSuccess = 0, kUsageError = 1, kNotConverged = 2 };

/// Everything needed to repeat a run. Timestamps are the only fields that
/// differ between two repetitions.
struct RunManifest {
    std::string command;
    std::string case_name;
    std::uint64_t seed = 0;
    Geometry geometry;
    std::size_t k = 0;
    std::optional<RostfParams> params;
    std::optional<ppds::StoppingRule> stop;
    std::optional<CaseConfig> noise;
    std::string started;
    std::string finished;
    std::map<std::string, std::string> inputs;
    std::map<std::string, std::string> outputs;
};

void to_json(nlohmann::json& j, const RunManifest& m);

/// Current UTC time as YYYY-MM-DDTHH:MM:SSZ.
std::string utc_timestamp();

struct SimulateOptions {
    std::string case_name = "case1";
    std::size_t size = 64;
    std::size_t bands = 4;
    std::size_t k = 8;
    std::uint64_t seed = 7;
    std::size_t regions = 6;
    std::filesystem::path out;
};

FixtureSpec fixture_spec(const SimulateOptions& opt);

/// Writes the four rasters and manifest.json of simulate::write_fixture.
void simulate(const SimulateOptions& opt);

/// Explicit values replacing entries of default_params.
struct ParamOverrides {
    std::optional<double> lambda, alpha, eps_h, eps_l, eta_h, eta_l;
    std::optional<std::vector<double>> beta, c;

    void apply(RostfParams& p) const;
};

struct FuseOptions {
    std::filesystem::path hr, lr_ref, lr_tgt, out;
    int p = 2;
    std::size_t k = 8;
    CaseConfig noise;  ///< assumed noise levels feeding the defaults
    ParamOverrides overrides;
    ppds::StoppingRule stop;
    bool png = false;
    PngScaling png_scaling = PngScaling::UnitRange;
};

struct FuseResult {
    RostfParams params;
    FusionOutput output;
};

/// Fusion of in-memory inputs, writing h_t_est.bmr, h_r_denoised.bmr,
/// s_hr.bmr, s_lr.bmr, s_lt.bmr, trace.csv and params.json into `out`
/// (plus PNG previews when asked). No manifest.
FuseResult fuse_to_dir(const FusionInput& input, const RostfParams& params, const ppds::StoppingRule& stop,
                       const std::filesystem::path& out, bool png = false,
                       PngScaling scaling = PngScaling::UnitRange);

/// Reads the three rasters, derives parameters and runs fuse_to_dir; also
/// writes manifest.json.
FuseResult fuse(const FuseOptions& opt);

/// Reads both rasters, writes `report` as JSON when non-empty.
MetricsReport evaluate(const std::filesystem::path& estimate, const std::filesystem::path& truth,
                       const std::filesystem::path& report = {});

/// Fixed-precision text table of one or more labelled reports.
std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows);

struct RuncaseOptions {
    std::string case_name = "case1";
    std::uint64_t seed = 7;
    std::vector<int> p_values{1, 2};
    std::size_t size = 64;
    std::size_t bands = 4;
    std::size_t k = 8;
    ppds::StoppingRule stop;
    std::filesystem::path out;  ///< nothing is written when empty
    bool png = false;
};

struct RuncaseEntry {
    int p = 2;
    MetricsReport fused;
    std::size_t iterations = 0;
    bool converged = false;
    std::array<double, 8> residuals{};
    std::array<double, 8> radii{};
};

struct RuncaseReport {
    std::string case_name;
    std::uint64_t seed = 0;
    /// Noisy observed h_r scored against the reference-date truth.
    MetricsReport observed_hr;
    /// Observed h_r used as the target-date prediction.
    MetricsReport observed_hr_as_target;
    /// Nearest-neighbour upsampled l_t against the target-date truth.
    MetricsReport upsampled_lt;
    std::vector<RuncaseEntry> fused;

    const RuncaseEntry& entry(int p) const;
};

void to_json(nlohmann::json& j, const RuncaseReport& r);

/// simulate -> fuse (each requested p) -> evaluate. With `out` set, writes
/// fixture/, p1/, p2/, report.json (deterministic) and manifest.json.
RuncaseReport runcase(const RuncaseOptions& opt);

std::string format_runcase(const RuncaseReport& r);

}  // namespace rostf::pipeline
