#include "rostf/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "rostf/error.hpp"
#include "rostf/prox.hpp"
#include "rostf/simulate.hpp"

namespace rostf {

void RostfParams::validate(std::size_t bands) const {
    if (p != 1 && p != 2) throw Error("p must be 1 or 2");
    if (!(lambda > 0.0)) throw Error("lambda must be positive");
    if (k == 0) throw Error("k must be positive");
    for (double r : {alpha, eps_h, eps_l, eta_h, eta_l})
        if (!(r >= 0.0)) throw Error("constraint radii must be non-negative");
    if (beta.size() != bands || c.size() != bands)
        throw GeometryError("beta and c need one entry per band (" + std::to_string(bands) + ")");
    for (double b : beta)
        if (!(b >= 0.0)) throw Error("beta must be non-negative");
}

void to_json(nlohmann::json& j, const RostfParams& p) {
    j = nlohmann::json{{"lambda", p.lambda}, {"p", p.p},         {"alpha", p.alpha}, {"beta", p.beta},
                       {"c", p.c},           {"eps_h", p.eps_h}, {"eps_l", p.eps_l}, {"eta_h", p.eta_h},
                       {"eta_l", p.eta_l},   {"k", p.k}};
}

void from_json(const nlohmann::json& j, RostfParams& p) {
    j.at("lambda").get_to(p.lambda);
    j.at("p").get_to(p.p);
    j.at("alpha").get_to(p.alpha);
    j.at("beta").get_to(p.beta);
    j.at("c").get_to(p.c);
    j.at("eps_h").get_to(p.eps_h);
    j.at("eps_l").get_to(p.eps_l);
    j.at("eta_h").get_to(p.eta_h);
    j.at("eta_l").get_to(p.eta_l);
    j.at("k").get_to(p.k);
}

void FusionInput::validate(std::size_t k) const {
    const Geometry lr = lr_geometry_for(h_r.geometry(), k);
    if (l_r.geometry() != lr || l_t.geometry() != lr)
        throw GeometryError("LR images must be " + to_string(lr) + " for HR " + to_string(h_r.geometry()) +
                            " and k = " + std::to_string(k) + "; got l_r " + to_string(l_r.geometry()) +
                            ", l_t " + to_string(l_t.geometry()));
}

RostfParams default_params(const FusionInput& input, const CaseConfig& noise, int p, std::size_t k) {
    input.validate(k);
    const Geometry& hr = input.h_r.geometry();
    const double nhb = static_cast<double>(hr.size());
    const double nlb = static_cast<double>(input.l_r.size());

    RostfParams out;
    out.k = k;
    out.p = p;
    out.lambda = 1.0;
    out.alpha = (p == 1 ? 2e-3 : 1e-6) * nhb;
    for (std::size_t b = 0; b < hr.bands; ++b) {
        out.beta.push_back(std::max(std::abs(band_mean(input.l_r, b) - band_mean(input.h_r, b)), kBetaFloor));
        const double mt = band_mean(input.l_t, b);
        out.c.push_back(mt - noise.r_l * (0.5 - mt));
    }
    out.eps_h = 0.98 * noise.sigma_h * std::sqrt(nhb * (1.0 - noise.r_h));
    const BlurDownsampleOperator sb(hr, k);
    out.eps_l = l2_distance(input.l_r.values(), sb.apply(input.h_r.values()));
    out.eta_h = 0.5 * noise.r_h * nhb;
    out.eta_l = 0.5 * noise.r_l * nlb;
    out.validate(hr.bands);
    return out;
}


namespace {

double ball_distance(std::span<const double> v, std::span<const double> center, double radius) {
    return std::max(l2_distance(v, center) - radius, 0.0);
}

double origin_ball_distance(std::span<const double> v, int p, double radius) {
    if (p == 2) return std::max(l2_norm(v) - radius, 0.0);
    Vector proj(v.begin(), v.end());
    project_l1_ball(proj, radius);
    return l2_distance(v, proj);
}

}  // namespace

RostfProblem build_problem(const FusionInput& input, const RostfParams& params) {
    params.validate(input.h_r.bands());
    input.validate(params.k);

    RostfProblem prob;
    prob.hr = input.h_r.geometry();
    prob.lr = input.l_r.geometry();
    prob.diff = std::make_shared<DiffOperator>(prob.hr);
    prob.blur_down = std::make_shared<BlurDownsampleOperator>(prob.hr, params.k);
    const auto id_hr = std::make_shared<IdentityOperator>(prob.hr.size());
    const auto id_lr = std::make_shared<IdentityOperator>(prob.lr.size());

    const std::size_t B = prob.hr.bands, N = prob.hr.pixels();
    const std::size_t nhb = prob.hr.size(), nlb = prob.lr.size();
    const auto obs_h_r = std::make_shared<const Vector>(input.h_r.data());
    const auto obs_l_r = std::make_shared<const Vector>(input.l_r.data());
    const auto obs_l_t = std::make_shared<const Vector>(input.l_t.data());

    auto& g = prob.graph;

    // primal slots
    g.add_primal({"h_r", nhb, {}, {}});
    {
        std::vector<HyperslabSpec> slabs;
        for (std::size_t b = 0; b < B; ++b) {
            const double n = static_cast<double>(N);
            slabs.push_back({params.c[b] * n, params.beta[b] * n});
        }
        g.add_primal({"h_t", nhb, [slabs, N](std::span<double> x, double) {
                          for (std::size_t b = 0; b < slabs.size(); ++b) project_hyperslab(x.subspan(b * N, N), slabs[b]);
                      },
                      {}});
    }
    const auto l1_ball = [](double eta) {
        return [eta](std::span<double> x, double) { project_l1_ball(x, eta); };
    };
    g.add_primal({"s_hr", nhb, l1_ball(params.eta_h), {}});
    g.add_primal({"s_lr", nlb, l1_ball(params.eta_l), {}});
    g.add_primal({"s_lt", nlb, l1_ball(params.eta_l), {}});

    // dual slots
    const double lambda = params.lambda;
    g.add_dual({"edge_r", 2 * nhb, [B, N](std::span<double> x, double gamma) { prox_l12(x, B, N, gamma); },
                [B, N](std::span<const double> v) { return l12_norm(v, B, N); }, {}});
    g.add_dual({"edge_t", 2 * nhb,
                [B, N, lambda](std::span<double> x, double gamma) { prox_l12(x, B, N, lambda * gamma); },
                [B, N, lambda](std::span<const double> v) { return lambda * l12_norm(v, B, N); }, {}});
    const int p = params.p;
    const double alpha = params.alpha;
    g.add_dual({"edge_diff", 2 * nhb,
                [p, alpha](std::span<double> x, double) { project_ball(x, {p, {}, alpha}); },
                {},
                [p, alpha](std::span<const double> v) { return origin_ball_distance(v, p, alpha); }});
    const auto l2_ball = [](std::shared_ptr<const Vector> center, double eps) {
        return std::pair{
            ProxFn([center, eps](std::span<double> x, double) { project_l2_ball(x, {2, *center, eps}); }),
            ppds::ScalarFn([center, eps](std::span<const double> v) { return ball_distance(v, *center, eps); })};
    };
    {
        auto [prox, dist] = l2_ball(obs_h_r, params.eps_h);
        g.add_dual({"fid_hr", nhb, prox, {}, dist});
    }
    {
        auto [prox, dist] = l2_ball(obs_l_r, params.eps_l);
        g.add_dual({"fid_lr", nlb, prox, {}, dist});
    }
    {
        auto [prox, dist] = l2_ball(obs_l_t, params.eps_l);
        g.add_dual({"fid_lt", nlb, prox, {}, dist});
    }

    using namespace slot;
    g.add_edge(z_edge_r, h_r, prob.diff);
    g.add_edge(z_edge_t, h_t, prob.diff);
    g.add_edge(z_edge_diff, h_r, prob.diff);
    g.add_edge(z_edge_diff, h_t, prob.diff, -1.0);
    g.add_edge(z_hr, h_r, id_hr);
    g.add_edge(z_hr, s_hr, id_hr);
    g.add_edge(z_lr, h_r, prob.blur_down);
    g.add_edge(z_lr, s_lr, id_lr);
    g.add_edge(z_lt, h_t, prob.blur_down);
    g.add_edge(z_lt, s_lt, id_lr);
    return prob;
}

ppds::SolverState initial_state(const RostfProblem& problem, const FusionInput& input) {
    auto st = ppds::zero_state(problem.graph);
    st.primal[slot::h_r] = input.h_r.data();
    st.primal[slot::h_t] = upsample_nearest(input.l_t.values(), problem.lr, problem.blur_down->factor());
    return st;
}

FusionOutput fuse(const FusionInput& input, const RostfParams& params, const ppds::StoppingRule& stop) {
    const RostfProblem problem = build_problem(input, params);
    ppds::PrimalDualSolver solver(problem.graph);
    auto result = solver.run(initial_state(problem, input), stop);

    auto& y = result.state.primal;
    return FusionOutput{MultiBandImage(problem.hr, std::move(y[slot::h_t])),
                        MultiBandImage(problem.hr, std::move(y[slot::h_r])),
                        MultiBandImage(problem.hr, std::move(y[slot::s_hr])),
                        MultiBandImage(problem.lr, std::move(y[slot::s_lr])),
                        MultiBandImage(problem.lr, std::move(y[slot::s_lt])),
                        std::move(result.trace),
                        result.state.iteration,
                        result.converged};
}

std::array<double, 8> constraint_residuals(const FusionOutput& output, const FusionInput& input,
                                           const RostfParams& params) {
    const Geometry& hr = input.h_r.geometry();
    const DiffOperator diff(hr);
    const BlurDownsampleOperator sb(hr, params.k);
    std::array<double, 8> r{};

    Vector edge_gap = diff.apply(output.h_r_denoised.values());
    axpy(-1.0, diff.apply(output.h_t_hat.values()), edge_gap);
    r[0] = (params.p == 1 ? l1_norm(edge_gap) : l2_norm(edge_gap)) - params.alpha;

    r[1] = -std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < hr.bands; ++b)
        r[1] = std::max(r[1], std::abs(params.c[b] - band_mean(output.h_t_hat, b)) - params.beta[b]);

    const auto fidelity = [](std::span<const double> observed, Vector model, std::span<const double> sparse) {
        axpy(1.0, sparse, model);
        return l2_distance(observed, model);
    };
    r[2] = fidelity(input.h_r.values(), output.h_r_denoised.data(), output.s_hr.values()) - params.eps_h;
    r[3] = fidelity(input.l_r.values(), sb.apply(output.h_r_denoised.values()), output.s_lr.values()) - params.eps_l;
    r[4] = fidelity(input.l_t.values(), sb.apply(output.h_t_hat.values()), output.s_lt.values()) - params.eps_l;
    r[5] = l1_norm(output.s_hr.values()) - params.eta_h;
    r[6] = l1_norm(output.s_lr.values()) - params.eta_l;
    r[7] = l1_norm(output.s_lt.values()) - params.eta_l;
    return r;
}

std::array<double, 8> constraint_radii(const RostfParams& params) {
    const double beta = params.beta.empty() ? 0.0 : *std::max_element(params.beta.begin(), params.beta.end());
    return {params.alpha, beta, params.eps_h, params.eps_l, params.eps_l, params.eta_h, params.eta_l, params.eta_l};
}

double fusion_objective(const MultiBandImage& h_r, const MultiBandImage& h_t, double lambda) {
    const DiffOperator diff(h_r.geometry());
    const std::size_t B = h_r.bands(), N = h_r.pixels();
    return l12_norm(diff.apply(h_r.values()), B, N) + lambda * l12_norm(diff.apply(h_t.values()), B, N);
}

}  // namespace rostf
