#include "rostf/ppds.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>

#include "rostf/error.hpp"

namespace rostf::ppds {

std::size_t ProblemGraph::add_primal(PrimalSlot slot) {
    primals_.push_back(std::move(slot));
    return primals_.size() - 1;
}

std::size_t ProblemGraph::add_dual(DualSlot slot) {
    duals_.push_back(std::move(slot));
    return duals_.size() - 1;
}

void ProblemGraph::add_edge(std::size_t dual, std::size_t primal, OperatorPtr op, double coeff) {
    if (dual >= duals_.size() || primal >= primals_.size()) throw Error("edge refers to an unknown slot");
    if (!op) throw Error("edge without operator");
    if (op->cols() != primals_[primal].dim || op->rows() != duals_[dual].dim)
        throw GeometryError("edge " + duals_[dual].name + " <- " + primals_[primal].name + ": operator maps " +
                            std::to_string(op->cols()) + " -> " + std::to_string(op->rows()) + ", slots are " +
                            std::to_string(primals_[primal].dim) + " -> " + std::to_string(duals_[dual].dim));
    edges_.push_back({dual, primal, std::move(op), coeff});
}

void ProblemGraph::validate() const {
    if (primals_.empty() || duals_.empty()) throw Error("problem needs at least one primal and one dual slot");
}

Stepsizes compute_stepsizes(const ProblemGraph& graph) {
    graph.validate();
    Stepsizes s;
    std::vector<double> sums(graph.primals().size(), 0.0);
    for (const auto& e : graph.edges()) sums[e.primal] += e.norm_sq_bound();
    s.primal.resize(sums.size());
    for (std::size_t i = 0; i < sums.size(); ++i) {
        if (!(sums[i] > 0.0))
            throw Error("primal slot '" + graph.primals()[i].name + "' has no incident operator; stepsize undefined");
        s.primal[i] = 1.0 / sums[i];
    }
    s.dual.assign(graph.duals().size(), 1.0 / static_cast<double>(graph.primals().size()));
    return s;
}

SolverState zero_state(const ProblemGraph& graph) {
    SolverState st;
    for (const auto& p : graph.primals()) st.primal.emplace_back(p.dim, 0.0);
    for (const auto& d : graph.duals()) st.dual.emplace_back(d.dim, 0.0);
    return st;
}

// ---------------------------------------------------------------------------

PrimalDualSolver::PrimalDualSolver(const ProblemGraph& graph) : PrimalDualSolver(graph, compute_stepsizes(graph)) {}

PrimalDualSolver::PrimalDualSolver(const ProblemGraph& graph, Stepsizes steps)
    : graph_(graph), steps_(std::move(steps)) {
    graph_.validate();
    if (steps_.primal.size() != graph_.primals().size() || steps_.dual.size() != graph_.duals().size())
        throw Error("stepsize count does not match the problem");
    std::size_t widest = 0;
    for (const auto& p : graph_.primals()) {
        grad_.emplace_back(p.dim);
        prev_.emplace_back(p.dim);
        widest = std::max(widest, p.dim);
    }
    for (const auto& d : graph_.duals()) {
        coupled_next_.emplace_back(d.dim);
        widest = std::max(widest, d.dim);
    }
    scratch_.resize(widest);
    dual_scaled_.resize(widest);
}

void PrimalDualSolver::check_state(const SolverState& state) const {
    const auto& P = graph_.primals();
    const auto& D = graph_.duals();
    if (state.primal.size() != P.size() || state.dual.size() != D.size())
        throw GeometryError("solver state has the wrong number of slots");
    for (std::size_t i = 0; i < P.size(); ++i)
        if (state.primal[i].size() != P[i].dim)
            throw GeometryError("primal slot '" + P[i].name + "' has length " + std::to_string(state.primal[i].size()) +
                                ", expected " + std::to_string(P[i].dim));
    for (std::size_t j = 0; j < D.size(); ++j)
        if (state.dual[j].size() != D[j].dim)
            throw GeometryError("dual slot '" + D[j].name + "' has length " + std::to_string(state.dual[j].size()) +
                                ", expected " + std::to_string(D[j].dim));
}

void PrimalDualSolver::apply_coupling(const std::vector<Vector>& primal, std::vector<Vector>& out) {
    for (auto& v : out) std::fill(v.begin(), v.end(), 0.0);
    for (const auto& e : graph_.edges()) {
        auto tmp = std::span(scratch_).first(e.op->rows());
        e.op->apply(primal[e.primal], tmp);
        axpy(e.coeff, tmp, out[e.dual]);
    }
}

void PrimalDualSolver::refresh_coupled(SolverState& state) const {
    state.coupled.clear();
    for (const auto& d : graph_.duals()) state.coupled.emplace_back(d.dim, 0.0);
    for (const auto& e : graph_.edges()) {
        const Vector tmp = e.op->apply(state.primal[e.primal]);
        axpy(e.coeff, tmp, state.coupled[e.dual]);
    }
}

TraceRow PrimalDualSolver::step(SolverState& state, double divergence_factor) {
    check_state(state);
    if (state.coupled.size() != graph_.duals().size()) refresh_coupled(state);

    const auto& P = graph_.primals();
    const auto& D = graph_.duals();

    // primal: y_i <- prox_{g_i}(y_i - gamma_{1,i} sum_j G_{j,i}^T z_j)
    for (auto& g : grad_) std::fill(g.begin(), g.end(), 0.0);
    for (const auto& e : graph_.edges()) {
        auto tmp = std::span(scratch_).first(e.op->cols());
        e.op->apply_adjoint(state.dual[e.dual], tmp);
        axpy(e.coeff, tmp, grad_[e.primal]);
    }

    TraceRow row;
    row.iteration = state.iteration + 1;
    double rel = 0.0;
    for (std::size_t i = 0; i < P.size(); ++i) {
        Vector& y = state.primal[i];
        Vector& prev = prev_[i];
        std::copy(y.begin(), y.end(), prev.begin());
        axpy(-steps_.primal[i], grad_[i], y);
        if (P[i].prox) P[i].prox(y, steps_.primal[i]);

        double change = 0.0, base = 0.0;
        for (std::size_t m = 0; m < y.size(); ++m) {
            const double d = y[m] - prev[m];
            change += d * d;
            base += prev[m] * prev[m];
        }
        change = std::sqrt(change);
        base = std::sqrt(base);
        if (!std::isfinite(change))
            throw DivergenceError("non-finite iterate in primal slot '" + P[i].name + "' at iteration " +
                                  std::to_string(row.iteration));
        if (change > divergence_factor * std::max(base, 1.0))
            throw DivergenceError("primal slot '" + P[i].name + "' diverged at iteration " +
                                  std::to_string(row.iteration));
        rel = std::max(rel, change / std::max(base, 1e-12));
    }

    // dual: z_j <- prox_{gamma_{2,j} h_j^*}(z_j + gamma_{2,j} G_j (2 y+ - y)),
    // with G_j (2 y+ - y) = 2 G_j y+ - G_j y from the cached coupling, and
    // the conjugate prox through Moreau: zbar - g prox_{h/g}(zbar / g).
    apply_coupling(state.primal, coupled_next_);
    double dual_rel = 0.0;
    bool duals_zero = true;
    for (std::size_t j = 0; j < D.size(); ++j) {
        Vector& z = state.dual[j];
        const Vector& now = coupled_next_[j];
        const Vector& before = state.coupled[j];
        const double g = steps_.dual[j];
        const double inv = 1.0 / g;
        auto scaled = std::span(dual_scaled_).first(z.size());
        auto t = std::span(scratch_).first(z.size());
        for (std::size_t m = 0; m < z.size(); ++m) {
            scaled[m] = (z[m] + g * (2.0 * now[m] - before[m])) * inv;
            t[m] = scaled[m];
        }
        D[j].prox(t, inv);

        double change = 0.0, base = 0.0;
        for (std::size_t m = 0; m < z.size(); ++m) {
            const double next = g * (scaled[m] - t[m]);
            const double d = next - z[m];
            duals_zero = duals_zero && z[m] == 0.0;
            change += d * d;
            base += z[m] * z[m];
            z[m] = next;
        }
        if (!std::isfinite(change))
            throw DivergenceError("non-finite iterate in dual slot '" + D[j].name + "' at iteration " +
                                  std::to_string(row.iteration));
        dual_rel = std::max(dual_rel, std::sqrt(change) / std::max(std::sqrt(base), 1.0));
    }
    std::swap(state.coupled, coupled_next_);

    row.dual_change = dual_rel;
    row.rel_change = rel;
    row.from_zero_duals = duals_zero;
    for (std::size_t i = 0; i < P.size(); ++i)
        if (P[i].value) row.objective += P[i].value(state.primal[i]);
    row.residuals.assign(D.size(), 0.0);
    for (std::size_t j = 0; j < D.size(); ++j) {
        if (D[j].value) row.objective += D[j].value(state.coupled[j]);
        if (D[j].residual) row.residuals[j] = D[j].residual(state.coupled[j]);
    }

    state.iteration = row.iteration;
    state.last_rel_change = rel;
    return row;
}

SolveResult PrimalDualSolver::run(SolverState init, const StoppingRule& stop) {
    SolveResult result;
    result.state = std::move(init);
    check_state(result.state);
    refresh_coupled(result.state);
    while (result.state.iteration < stop.max_iterations) {
        result.trace.push_back(step(result.state, stop.divergence_factor));
        const TraceRow& row = result.trace.back();
        // Leaving zero duals means the primal step ignored the coupling, so
        // its zero change says nothing about stationarity.
        const bool uninformative = row.from_zero_duals && row.dual_change > 0.0;
        if (row.rel_change < stop.tolerance && !uninformative) {
            result.converged = true;
            break;
        }
    }
    return result;
}

SolverState iterate(const ProblemGraph& graph, SolverState state, const Stepsizes& steps) {
    PrimalDualSolver solver(graph, steps);
    solver.step(state);
    return state;
}

SolveResult run(const ProblemGraph& graph, SolverState init, const StoppingRule& stop) {
    PrimalDualSolver solver(graph);
    return solver.run(std::move(init), stop);
}

void write_trace_csv(const std::vector<TraceRow>& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    const std::size_t m = trace.empty() ? 0 : trace.front().residuals.size();
    out << "iter,rel_change,objective";
    for (std::size_t j = 0; j < m; ++j) out << ",residual_" << (j + 1);
    out << '\n' << std::setprecision(17);
    for (const auto& r : trace) {
        out << r.iteration << ',' << r.rel_change << ',' << r.objective;
        for (double v : r.residuals) out << ',' << v;
        out << '\n';
    }
}

}  // namespace rostf::ppds
