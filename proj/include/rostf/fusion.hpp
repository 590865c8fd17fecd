#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "rostf/linops.hpp"
#include "rostf/ppds.hpp"
#include "rostf/raster.hpp"

namespace rostf {

struct CaseConfig;

/// Scalars of the constrained fusion program.
struct RostfParams {
    double lambda = 1.0;     ///< weight of the target-date HTV term
    int p = 2;               ///< norm of the edge-similarity constraint, 1 or 2
    double alpha = 0.0;      ///< edge-similarity radius
    std::vector<double> beta;  ///< per-band brightness tolerance
    std::vector<double> c;     ///< per-band target brightness
    double eps_h = 0.0;      ///< HR data-fidelity radius
    double eps_l = 0.0;      ///< LR data-fidelity radius
    double eta_h = 0.0;      ///< l1 budget of HR sparse noise
    double eta_l = 0.0;      ///< l1 budget of LR sparse noise
    std::size_t k = 1;       ///< HR/LR resolution factor

    /// Throws Error when a radius is negative, p is not 1/2, or beta/c have
    /// a length other than `bands`.
    void validate(std::size_t bands) const;
};

void to_json(nlohmann::json& j, const RostfParams& p);
void from_json(const nlohmann::json& j, RostfParams& p);

/// Observed HR/LR pair on the reference date and LR image on the target date.
struct FusionInput {
    MultiBandImage h_r;
    MultiBandImage l_r;
    MultiBandImage l_t;

    /// Throws GeometryError unless h_r is k times l_r and l_t per axis with
    /// matching band counts.
    void validate(std::size_t k) const;
};

struct FusionOutput {
    MultiBandImage h_t_hat;
    MultiBandImage h_r_denoised;
    MultiBandImage s_hr;
    MultiBandImage s_lr;
    MultiBandImage s_lt;
    std::vector<ppds::TraceRow> trace;
    std::size_t iterations = 0;
    bool converged = false;
};

/// Parameter defaults from the observed images and the assumed noise levels:
///   alpha  = 2e-3 N_h B (p = 1) or 1e-6 N_h B (p = 2)
///   beta_b = |mean(l_r)_b - mean(h_r)_b|, floored at 1e-6
///   c_b    = mean(l_t)_b - r_l (0.5 - mean(l_t)_b)
///   eps_h  = 0.98 sigma_h sqrt(N_h B (1 - r_h))
///   eps_l  = ||l_r - S B h_r||_2
///   eta_h  = 0.5 r_h N_h B,  eta_l = 0.5 r_l N_l B
RostfParams default_params(const FusionInput& input, const CaseConfig& noise, int p, std::size_t k);

constexpr double kBetaFloor = 1e-6;

/// Slot indices of the assembled problem.
namespace slot {
inline constexpr std::size_t h_r = 0, h_t = 1, s_hr = 2, s_lr = 3, s_lt = 4;
inline constexpr std::size_t z_edge_r = 0, z_edge_t = 1, z_edge_diff = 2, z_hr = 3, z_lr = 4, z_lt = 5;
}  // namespace slot

/// The fusion program on the primal-dual template, with the data its prox
/// oracles refer to. Five primal slots (h_r, h_t, s_hr, s_lr, s_lt) and six
/// dual slots (D h_r, D h_t, D h_r - D h_t, h_r + s_hr, SB h_r + s_lr,
/// SB h_t + s_lt).
struct RostfProblem {
    Geometry hr;
    Geometry lr;
    ppds::ProblemGraph graph;
    std::shared_ptr<const DiffOperator> diff;
    std::shared_ptr<const BlurDownsampleOperator> blur_down;
};

RostfProblem build_problem(const FusionInput& input, const RostfParams& params);

/// h_r, nearest-neighbour upsampled l_t, zero sparse terms and duals.
ppds::SolverState initial_state(const RostfProblem& problem, const FusionInput& input);

FusionOutput fuse(const FusionInput& input, const RostfParams& params, const ppds::StoppingRule& stop = {});

/// Signed violation of each constraint (<= 0 when satisfied):
///   0  ||D h_r - D h_t||_p - alpha
///   1  max_b |c_b - mean(h_t)_b| - beta_b
///   2  ||h_r - (h~_r + s_hr)||_2 - eps_h
///   3  ||l_r - (SB h~_r + s_lr)||_2 - eps_l
///   4  ||l_t - (SB h~_t + s_lt)||_2 - eps_l
///   5..7  ||s_hr||_1 - eta_h, ||s_lr||_1 - eta_l, ||s_lt||_1 - eta_l
std::array<double, 8> constraint_residuals(const FusionOutput& output, const FusionInput& input,
                                           const RostfParams& params);

/// Radius belonging to each entry of constraint_residuals (beta entry: max_b beta_b).
std::array<double, 8> constraint_radii(const RostfParams& params);

/// HTV(h_r) + lambda HTV(h_t), the fusion objective.
double fusion_objective(const MultiBandImage& h_r, const MultiBandImage& h_t, double lambda);

}  // namespace rostf
