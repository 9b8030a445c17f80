#ifndef EDGEPERTURB_SOLVER_HPP
#define EDGEPERTURB_SOLVER_HPP

#include "edgeperturb/errors.hpp"
#include "edgeperturb/gnn.hpp"
#include "edgeperturb/graph.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace ep::solver {

/// Largest node count the dense relaxation accepts: an N x N real matrix at
/// 8 bytes per entry stays near 128 MB.
inline constexpr NodeId kDenseNodeCap = 4000;

struct SolverConfig {
    PerturbMode mode = PerturbMode::Atk;
    std::size_t budget = 0;  // directed adjacency entries; always even, = 2 x pairs
    double zeta = 0.5;       // binarization threshold on |A - A0|
    double rho = 1.0;        // penalty strength
    double eta = 0.01;       // PGD step size, also the prox shrinkage
    int outer_iters = 20;
    int inner_iters = 10;
    std::uint64_t seed = 0;  // reserved; the solve itself is deterministic
};

struct TraceRow {
    int iter = 0;        // global inner-iteration index
    double loss = 0.0;
    double gap = 0.0;    // ||A - A0||_1 - budget
    double lagrangian = 0.0;
    double lambda = 0.0;
};

/// CSV lines "iter,L,gap,F,lambda" with exact round-trip formatting.
std::string trace_csv(const std::vector<TraceRow>& trace);

struct SolverState {
    Matrix a;        // relaxed adjacency: symmetric, zero diagonal, in [0,1]
    Matrix a0;       // frozen clean adjacency
    double lambda = 0.0;
    std::vector<TraceRow> trace;
};

struct SolverError : NumericalError {
    SolverError(const std::string& msg, std::vector<TraceRow> partial)
        : NumericalError(msg), trace(std::move(partial)) {}
    std::vector<TraceRow> trace;
};

/// Most probable incorrect class per train node under the frozen model's
/// clean-graph prediction; -1 outside the train split.
struct AttackTargets {
    std::vector<int> target;
};

AttackTargets attack_targets(const Graph& graph, const gnn::GnnModel& model);

SolverState init_state(const Graph& graph, const SolverConfig& config);

struct AdjGrad {
    double loss = 0.0;
    Matrix grad;  // d loss / dA, symmetrized, zero diagonal
};

/// Sum of train-node cross-entropies against `targets` (true labels for aug,
/// attack targets for atk) evaluated by the frozen 2-layer GCN on the relaxed
/// adjacency in `state`, with the full analytic gradient through the
/// symmetric degree normalization.
AdjGrad loss_and_grad_adj(const SolverState& state, const gnn::GnnModel& model,
                          const Graph& graph, const std::vector<int>& targets);

double constraint_gap(const SolverState& state, const SolverConfig& config);
double lagrangian(const SolverState& state, const SolverConfig& config, double loss);

/// B = A - eta x grad_f, then the offset D = B - A0 is soft-thresholded at
/// exactly eta, re-anchored at A0, clamped to [0,1], symmetrized, diagonal
/// zeroed.
void prox_step(SolverState& state, const SolverConfig& config, const Matrix& grad_f);

/// lambda += rho x gap.
void multiplier_update(SolverState& state, const SolverConfig& config);

/// Pairs with |A - A0| >= zeta, capped at budget/2 keeping the largest
/// movers (ties: smaller min id, then smaller max id).
PerturbationPlan binarize(const SolverState& state, const SolverConfig& config);

struct SolveResult {
    PerturbationPlan plan;
    std::vector<TraceRow> trace;
    SolverState state;  // final relaxed state, useful for diagnostics
};

/// Outer loop of inner PGD sweeps plus a multiplier update, then binarize.
/// Each inner step backtracks from eta until the lagrangian decreases, so
/// accepted iterations are monotone at the current multiplier. Gradients are
/// masked to train x train entries, so only pairs with both endpoints in the
/// train split ever move.
SolveResult solve(const Graph& graph, const gnn::GnnModel& model, const SolverConfig& config);

} // namespace ep::solver

#endif
