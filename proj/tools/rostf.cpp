#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "rostf/error.hpp"
#include "rostf/pipeline.hpp"

namespace pl = rostf::pipeline;

namespace {

struct Stop {
    std::size_t max_iters = 20000;
    double tol = 1e-5;

    rostf::ppds::StoppingRule rule() const {
        rostf::ppds::StoppingRule r;
        r.max_iterations = max_iters;
        r.tolerance = tol;
        return r;
    }
};

void add_stop_flags(CLI::App* cmd, Stop& stop) {
    cmd->add_option("--max-iters", stop.max_iters, "Iteration budget")->capture_default_str();
    cmd->add_option("--tol", stop.tol, "Relative primal change that ends the run")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
}

const std::map<std::string, rostf::PngScaling> kScalings{{"unit", rostf::PngScaling::UnitRange},
                                                          {"minmax", rostf::PngScaling::MinMax}};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Robust spatiotemporal fusion of HR/LR satellite image pairs"};
    app.set_version_flag("--version", std::string("rostf ") + pl::kVersion);
    app.require_subcommand(1);

    pl::SimulateOptions sim;
    auto* simulate = app.add_subcommand("simulate", "Write a seeded synthetic fixture");
    simulate->add_option("--case", sim.case_name, "case1 | case2 | case3 | case4")
        ->check(CLI::IsMember({"case1", "case2", "case3", "case4"}))
        ->capture_default_str();
    simulate->add_option("--size", sim.size, "HR height and width")->capture_default_str();
    simulate->add_option("--bands", sim.bands, "Spectral bands")->capture_default_str();
    simulate->add_option("--k", sim.k, "HR/LR resolution factor")->capture_default_str();
    simulate->add_option("--seed", sim.seed, "Scene and noise seed")->capture_default_str();
    simulate->add_option("--regions", sim.regions, "Voronoi regions")->capture_default_str();
    simulate->add_option("--out", sim.out, "Output directory")->required();

    pl::FuseOptions fo;
    Stop fuse_stop;
    std::string fuse_scaling = "unit";
    auto* fuse = app.add_subcommand("fuse", "Estimate the target-date HR image");
    fuse->add_option("--hr", fo.hr, "Observed HR image, reference date (.bmr)")->required()->check(CLI::ExistingFile);
    fuse->add_option("--lr-ref", fo.lr_ref, "Observed LR image, reference date")->required()->check(CLI::ExistingFile);
    fuse->add_option("--lr-tgt", fo.lr_tgt, "Observed LR image, target date")->required()->check(CLI::ExistingFile);
    fuse->add_option("--out", fo.out, "Output directory")->required();
    fuse->add_option("--p", fo.p, "Norm of the edge-similarity constraint")
        ->check(CLI::IsMember({1, 2}))
        ->capture_default_str();
    fuse->add_option("--k", fo.k, "HR/LR resolution factor")->capture_default_str();
    fuse->add_option("--sigma-h", fo.noise.sigma_h, "Assumed Gaussian std of the HR image")->capture_default_str();
    fuse->add_option("--r-h", fo.noise.r_h, "Assumed salt-and-pepper rate of the HR image")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse->add_option("--sigma-l", fo.noise.sigma_l, "Assumed Gaussian std of the LR images")->capture_default_str();
    fuse->add_option("--r-l", fo.noise.r_l, "Assumed salt-and-pepper rate of the LR images")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    fuse->add_option("--lambda", fo.overrides.lambda, "Override: weight of the target-date HTV term");
    fuse->add_option("--alpha", fo.overrides.alpha, "Override: edge-similarity radius");
    fuse->add_option("--eps-h", fo.overrides.eps_h, "Override: HR fidelity radius");
    fuse->add_option("--eps-l", fo.overrides.eps_l, "Override: LR fidelity radius");
    fuse->add_option("--eta-h", fo.overrides.eta_h, "Override: HR sparse-noise l1 budget");
    fuse->add_option("--eta-l", fo.overrides.eta_l, "Override: LR sparse-noise l1 budget");
    add_stop_flags(fuse, fuse_stop);
    fuse->add_flag("--png", fo.png, "Also write PNG previews (bands 0-2 as RGB)");
    fuse->add_option("--png-scaling", fuse_scaling,
                     "unit: [0,1] mapped to 0-255 with clamping; minmax: each band stretched to its range")
        ->check(CLI::IsMember({"unit", "minmax"}))
        ->capture_default_str();

    std::string est, truth, report_path;
    auto* evaluate = app.add_subcommand("evaluate", "Score an estimate against ground truth");
    evaluate->add_option("--est", est, "Estimated image (.bmr)")->required();
    evaluate->add_option("--truth", truth, "Ground-truth image (.bmr)")->required();
    evaluate->add_option("--out", report_path, "Write the report as JSON");

    pl::RuncaseOptions rc;
    Stop rc_stop;
    std::vector<int> rc_p;
    auto* runcase = app.add_subcommand("runcase", "Simulate, fuse and evaluate one experimental case");
    runcase->add_option("--case", rc.case_name, "case1 | case2 | case3 | case4")
        ->check(CLI::IsMember({"case1", "case2", "case3", "case4"}))
        ->required();
    runcase->add_option("--seed", rc.seed, "Scene and noise seed")->capture_default_str();
    runcase->add_option("--p", rc_p, "Restrict to p = 1 or p = 2 (default: both)")->check(CLI::IsMember({1, 2}));
    runcase->add_option("--size", rc.size, "HR height and width")->capture_default_str();
    runcase->add_option("--bands", rc.bands, "Spectral bands")->capture_default_str();
    runcase->add_option("--k", rc.k, "HR/LR resolution factor")->capture_default_str();
    runcase->add_option("--out", rc.out, "Directory for fixture, fused images, report and manifest");
    add_stop_flags(runcase, rc_stop);
    runcase->add_flag("--png", rc.png, "Also write PNG previews");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? pl::kSuccess : pl::kUsageError;
    }

    try {
        if (*simulate) {
            pl::simulate(sim);
            std::cout << "wrote fixture to " << sim.out.string() << '\n';
            return pl::kSuccess;
        }
        if (*fuse) {
            fo.stop = fuse_stop.rule();
            fo.png_scaling = kScalings.at(fuse_scaling);
            const auto res = pl::fuse(fo);
            std::cout << (res.output.converged ? "converged" : "stopped at the iteration budget") << " after "
                      << res.output.iterations << " iterations; outputs in " << fo.out.string() << '\n';
            return res.output.converged ? pl::kSuccess : pl::kNotConverged;
        }
        if (*evaluate) {
            const auto r = pl::evaluate(est, truth, report_path);
            std::cout << pl::format_table({{"estimate", r}});
            return pl::kSuccess;
        }
        if (*runcase) {
            if (!rc_p.empty()) rc.p_values = rc_p;
            rc.stop = rc_stop.rule();
            const auto r = pl::runcase(rc);
            std::cout << pl::format_runcase(r);
            for (const auto& e : r.fused)
                if (!e.converged) return pl::kNotConverged;
            return pl::kSuccess;
        }
    } catch (const rostf::DivergenceError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pl::kNotConverged;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return pl::kUsageError;
    }
    return pl::kUsageError;
}
