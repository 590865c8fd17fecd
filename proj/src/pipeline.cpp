#include "rostf/pipeline.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "rostf/error.hpp"
#include "rostf/linops.hpp"
#include "rostf/random.hpp"

namespace rostf::ppds {

void to_json(nlohmann::json& j, const StoppingRule& s) {
    j = {{"tolerance", s.tolerance}, {"max_iterations", s.max_iterations}, {"divergence_factor", s.divergence_factor}};
}

void from_json(const nlohmann::json& j, StoppingRule& s) {
    j.at("tolerance").get_to(s.tolerance);
    j.at("max_iterations").get_to(s.max_iterations);
    j.at("divergence_factor").get_to(s.divergence_factor);
}

}  // namespace rostf::ppds

namespace rostf::pipeline {

namespace fs = std::filesystem;

namespace {

void write_json(const nlohmann::json& j, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    out << j.dump(2) << '\n';
}

nlohmann::json geometry_json(const Geometry& g) {
    return {{"height", g.height}, {"width", g.width}, {"bands", g.bands}};
}

std::array<double, 8> finite_or_zero(std::array<double, 8> v) {
    for (double& x : v)
        if (!std::isfinite(x)) x = 0.0;
    return v;
}

}  // namespace

void to_json(nlohmann::json& j, const RunManifest& m) {
    j = {{"schema", kManifestSchema},
         {"tool_version", kVersion},
         {"rng", Rng::kVersion},
         {"command", m.command},
         {"case", m.case_name},
         {"seed", m.seed},
         {"geometry", geometry_json(m.geometry)},
         {"k", m.k},
         {"started", m.started},
         {"finished", m.finished},
         {"inputs", m.inputs},
         {"outputs", m.outputs}};
    if (m.params) j["params"] = *m.params;
    if (m.stop) j["stop"] = *m.stop;
    if (m.noise) j["noise"] = *m.noise;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// simulate

FixtureSpec fixture_spec(const SimulateOptions& opt) {
    FixtureSpec spec;
    spec.height = spec.width = opt.size;
    spec.bands = opt.bands;
    spec.k = opt.k;
    spec.seed = opt.seed;
    spec.regions = opt.regions;
    spec.validate();
    return spec;
}

void simulate(const SimulateOptions& opt) {
    if (opt.out.empty()) throw Error("simulate needs an output directory");
    const FixtureSpec spec = fixture_spec(opt);
    const CaseConfig noise = CaseConfig::preset(opt.case_name, opt.seed);
    write_fixture(make_fixture(spec, noise), spec, noise, opt.out);
}

// ---------------------------------------------------------------------------
// fuse

void ParamOverrides::apply(RostfParams& p) const {
    if (lambda) p.lambda = *lambda;
    if (alpha) p.alpha = *alpha;
    if (eps_h) p.eps_h = *eps_h;
    if (eps_l) p.eps_l = *eps_l;
    if (eta_h) p.eta_h = *eta_h;
    if (eta_l) p.eta_l = *eta_l;
    if (beta) p.beta = *beta;
    if (c) p.c = *c;
}

FuseResult fuse_to_dir(const FusionInput& input, const RostfParams& params, const ppds::StoppingRule& stop,
                       const fs::path& out, bool png, PngScaling scaling) {
    FuseResult res{params, rostf::fuse(input, params, stop)};
    fs::create_directories(out);
    const FusionOutput& o = res.output;
    write_raster(o.h_t_hat, out / "h_t_est.bmr");
    write_raster(o.h_r_denoised, out / "h_r_denoised.bmr");
    write_raster(o.s_hr, out / "s_hr.bmr");
    write_raster(o.s_lr, out / "s_lr.bmr");
    write_raster(o.s_lt, out / "s_lt.bmr");
    ppds::write_trace_csv(o.trace, out / "trace.csv");
    write_json(params, out / "params.json");
    if (png) {
        write_png(o.h_t_hat, out / "h_t_est.png", scaling);
        write_png(o.h_r_denoised, out / "h_r_denoised.png", scaling);
    }
    return res;
}

FuseResult fuse(const FuseOptions& opt) {
    if (opt.out.empty()) throw Error("fuse needs an output directory");
    RunManifest manifest;
    manifest.command = "fuse";
    manifest.case_name = opt.noise.name;
    manifest.seed = opt.noise.seed;
    manifest.started = utc_timestamp();

    const FusionInput input{read_raster(opt.hr), read_raster(opt.lr_ref), read_raster(opt.lr_tgt)};
    RostfParams params = default_params(input, opt.noise, opt.p, opt.k);
    opt.overrides.apply(params);
    params.validate(input.h_r.bands());

    FuseResult res = fuse_to_dir(input, params, opt.stop, opt.out, opt.png, opt.png_scaling);

    manifest.finished = utc_timestamp();
    manifest.geometry = input.h_r.geometry();
    manifest.k = opt.k;
    manifest.params = params;
    manifest.stop = opt.stop;
    manifest.noise = opt.noise;
    manifest.inputs = {{"hr", opt.hr.string()}, {"lr_ref", opt.lr_ref.string()}, {"lr_tgt", opt.lr_tgt.string()}};
    manifest.outputs = {{"dir", opt.out.string()}};
    nlohmann::json j = manifest;
    j["iterations"] = res.output.iterations;
    j["converged"] = res.output.converged;
    write_json(j, opt.out / "manifest.json");
    return res;
}

// ---------------------------------------------------------------------------
// evaluate

MetricsReport evaluate(const fs::path& estimate, const fs::path& truth, const fs::path& report) {
    const MetricsReport r = rostf::evaluate(read_raster(estimate), read_raster(truth));
    if (!report.empty()) write_json(r, report);
    return r;
}

std::string format_table(const std::vector<std::pair<std::string, MetricsReport>>& rows) {
    std::size_t width = 8;
    for (const auto& [label, _] : rows) width = std::max(width, label.size());
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-*s %10s %10s %10s %10s\n", static_cast<int>(width), "", "RMSE", "SAM",
                  "MSSIM", "CC");
    os << line;
    for (const auto& [label, r] : rows) {
        std::snprintf(line, sizeof line, "%-*s %10.6f %10.6f %10.6f %10.6f\n", static_cast<int>(width), label.c_str(),
                      r.rmse, r.sam, r.mssim, r.cc);
        os << line;
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// runcase

const RuncaseEntry& RuncaseReport::entry(int p) const {
    for (const auto& e : fused)
        if (e.p == p) return e;
    throw Error("report has no run for p = " + std::to_string(p));
}

void to_json(nlohmann::json& j, const RuncaseReport& r) {
    nlohmann::json fused = nlohmann::json::array();
    for (const auto& e : r.fused)
        fused.push_back({{"p", e.p},
                         {"metrics", e.fused},
                         {"iterations", e.iterations},
                         {"converged", e.converged},
                         {"constraint_residuals", finite_or_zero(e.residuals)},
                         {"constraint_radii", e.radii}});
    j = {{"schema", kReportSchema},
         {"case", r.case_name},
         {"seed", r.seed},
         {"baselines",
          {{"observed_hr_vs_reference_truth", r.observed_hr},
           {"observed_hr_vs_target_truth", r.observed_hr_as_target},
           {"upsampled_lt_vs_target_truth", r.upsampled_lt}}},
         {"fused", fused}};
}

RuncaseReport runcase(const RuncaseOptions& opt) {
    if (opt.p_values.empty()) throw Error("runcase needs at least one p");
    for (int p : opt.p_values)
        if (p != 1 && p != 2) throw Error("p must be 1 or 2, got " + std::to_string(p));

    RunManifest manifest;
    manifest.command = "runcase";
    manifest.started = utc_timestamp();

    SimulateOptions sim{opt.case_name, opt.size, opt.bands, opt.k, opt.seed, 6, {}};
    const FixtureSpec spec = fixture_spec(sim);
    const CaseConfig noise = CaseConfig::preset(opt.case_name, opt.seed);
    const Fixture fx = make_fixture(spec, noise);
    if (!opt.out.empty()) write_fixture(fx, spec, noise, opt.out / "fixture");

    RuncaseReport report;
    report.case_name = opt.case_name;
    report.seed = opt.seed;
    report.observed_hr = rostf::evaluate(fx.inputs.h_r, fx.h_r_true);
    report.observed_hr_as_target = rostf::evaluate(fx.inputs.h_r, fx.h_t_true);
    const Geometry lr = fx.inputs.l_t.geometry();
    report.upsampled_lt = rostf::evaluate(
        MultiBandImage(fx.h_t_true.geometry(), upsample_nearest(fx.inputs.l_t.values(), lr, spec.k)), fx.h_t_true);

    for (int p : opt.p_values) {
        const RostfParams params = default_params(fx.inputs, noise, p, spec.k);
        const FusionOutput out =
            opt.out.empty()
                ? rostf::fuse(fx.inputs, params, opt.stop)
                : fuse_to_dir(fx.inputs, params, opt.stop, opt.out / ("p" + std::to_string(p)), opt.png).output;
        report.fused.push_back({p, rostf::evaluate(out.h_t_hat, fx.h_t_true), out.iterations, out.converged,
                                constraint_residuals(out, fx.inputs, params), constraint_radii(params)});
    }

    if (!opt.out.empty()) {
        write_json(report, opt.out / "report.json");
        manifest.finished = utc_timestamp();
        manifest.case_name = opt.case_name;
        manifest.seed = opt.seed;
        manifest.geometry = fx.h_r_true.geometry();
        manifest.k = spec.k;
        manifest.stop = opt.stop;
        manifest.noise = noise;
        manifest.outputs = {{"fixture", (opt.out / "fixture").string()}, {"report", (opt.out / "report.json").string()}};
        for (int p : opt.p_values) {
            const std::string key = "p" + std::to_string(p);
            manifest.outputs[key] = (opt.out / key).string();
        }
        nlohmann::json j = manifest;
        j["fixture"] = spec;
        j["p_values"] = opt.p_values;
        write_json(j, opt.out / "manifest.json");
    }
    return report;
}

std::string format_runcase(const RuncaseReport& r) {
    std::vector<std::pair<std::string, MetricsReport>> rows{
        {"observed h_r vs reference truth", r.observed_hr},
        {"observed h_r vs target truth", r.observed_hr_as_target},
        {"upsampled l_t vs target truth", r.upsampled_lt}};
    for (const auto& e : r.fused)
        rows.emplace_back("ROSTF-" + std::to_string(e.p) + (e.converged ? "" : " (not converged)"), e.fused);
    std::ostringstream os;
    os << r.case_name << ", seed " << r.seed << '\n' << format_table(rows);
    for (const auto& e : r.fused) os << "ROSTF-" << e.p << ": " << e.iterations << " iterations\n";
    return os.str();
}

}  // namespace rostf::pipeline
