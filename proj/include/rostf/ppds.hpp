#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "rostf/linops.hpp"
#include "rostf/prox.hpp"

namespace rostf::ppds {

/// Scalar functional of a vector (objective term or constraint distance).
using ScalarFn = std::function<double(std::span<const double>)>;

struct PrimalSlot {
    std::string name;
    std::size_t dim = 0;
    ProxFn prox;     ///< prox_{gamma g_i}; an empty function means g_i = 0
    ScalarFn value;  ///< g_i value, summed into the traced objective (optional)
};

struct DualSlot {
    std::string name;
    std::size_t dim = 0;
    ProxFn prox;        ///< prox_{gamma h_j}; the solver applies it through Moreau
    ScalarFn value;     ///< h_j value, summed into the traced objective (optional)
    ScalarFn residual;  ///< distance of G y to dom h_j, traced (optional)
};

/// One nonzero block G_{j,i} = coeff * op.
struct Edge {
    std::size_t dual = 0;
    std::size_t primal = 0;
    OperatorPtr op;
    double coeff = 1.0;

    double norm_sq_bound() const { return coeff * coeff * op->norm_sq_bound(); }
};

/// min sum_i g_i(y_i) + sum_j h_j(z_j)  s.t.  z_j = sum_i G_{j,i} y_i
class ProblemGraph {
public:
    std::size_t add_primal(PrimalSlot slot);
    std::size_t add_dual(DualSlot slot);
    /// Throws GeometryError when the operator does not map dim(y_i) -> dim(z_j).
    void add_edge(std::size_t dual, std::size_t primal, OperatorPtr op, double coeff = 1.0);

    const std::vector<PrimalSlot>& primals() const { return primals_; }
    const std::vector<DualSlot>& duals() const { return duals_; }
    const std::vector<Edge>& edges() const { return edges_; }

    /// Throws Error unless there is at least one primal and one dual slot.
    void validate() const;

private:
    std::vector<PrimalSlot> primals_;
    std::vector<DualSlot> duals_;
    std::vector<Edge> edges_;
};

struct Stepsizes {
    std::vector<double> primal;  ///< gamma_{1,i}
    std::vector<double> dual;    ///< gamma_{2,j}
};

/// Operator-norm-based diagonal preconditioning:
/// gamma_{1,i} = 1 / sum_j ||G_{j,i}||^2 over incident edges, gamma_{2,j} = 1 / (#primal slots).
/// Throws Error for a primal slot without incident edges.
Stepsizes compute_stepsizes(const ProblemGraph& graph);

struct SolverState {
    std::vector<Vector> primal;
    std::vector<Vector> dual;
    /// Cached G y for the current primal iterate, one entry per dual slot.
    /// Left empty by callers; the solver fills it.
    std::vector<Vector> coupled;
    std::size_t iteration = 0;
    double last_rel_change = std::numeric_limits<double>::infinity();
};

/// Zero primal and dual variables with the graph's dimensions.
SolverState zero_state(const ProblemGraph& graph);

struct StoppingRule {
    double tolerance = 1e-5;
    std::size_t max_iterations = 20000;
    /// Abort when ||y+ - y|| exceeds this multiple of max(||y||, 1).
    double divergence_factor = 1e6;
};

struct TraceRow {
    std::size_t iteration = 0;
    double rel_change = 0.0;   ///< max_i ||y_i+ - y_i|| / max(||y_i||, 1e-12)
    double dual_change = 0.0;  ///< same for the duals, with a unit floor
    bool from_zero_duals = false;
    double objective = 0.0;
    Vector residuals;  ///< one per dual slot, 0 for slots without a residual
};

struct SolveResult {
    SolverState state;
    std::vector<TraceRow> trace;
    bool converged = false;
};

/// Preconditioned primal-dual splitting. All primal slots are updated from
/// the current duals, then every dual takes its step on the reflected
/// primal 2 y+ - y. Dual proxes always go through the Moreau identity.
class PrimalDualSolver {
public:
    explicit PrimalDualSolver(const ProblemGraph& graph);
    PrimalDualSolver(const ProblemGraph& graph, Stepsizes steps);

    const Stepsizes& stepsizes() const { return steps_; }

    /// One sweep in place; returns the relative primal change. Throws
    /// DivergenceError naming the slot on a non-finite iterate.
    TraceRow step(SolverState& state, double divergence_factor = 1e6);

    /// Iterates until rel_change < tolerance or the iteration budget is spent.
    /// A sweep that starts from all-zero duals and moves them does not count
    /// toward convergence.
    SolveResult run(SolverState init, const StoppingRule& stop);

private:
    void check_state(const SolverState& state) const;
    void refresh_coupled(SolverState& state) const;
    void apply_coupling(const std::vector<Vector>& primal, std::vector<Vector>& out);

    const ProblemGraph& graph_;
    Stepsizes steps_;
    std::vector<Vector> grad_;
    std::vector<Vector> prev_;
    std::vector<Vector> coupled_next_;
    Vector scratch_;
    Vector dual_scaled_;
};

/// One sweep with stepsizes from compute_stepsizes.
SolverState iterate(const ProblemGraph& graph, SolverState state, const Stepsizes& steps);

SolveResult run(const ProblemGraph& graph, SolverState init, const StoppingRule& stop);

/// CSV with columns iter, rel_change, objective, residual_1..residual_M.
void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path);

}  // namespace rostf::ppds
