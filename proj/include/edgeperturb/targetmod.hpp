#ifndef EDGEPERTURB_TARGETMOD_HPP
#define EDGEPERTURB_TARGETMOD_HPP

#include "edgeperturb/graph.hpp"

#include <cstdint>
#include <vector>

namespace ep::targetmod {

/// Cut edges of a graph found by one iterative low-link pass.
struct BridgeSet {
    std::vector<Edge> bridges;  // sorted ascending by (u, v)
    std::size_t components_before = 0;
    std::size_t components_after_full_removal = 0;
};

BridgeSet find_bridges(const Graph& graph);

struct BridgeModification {
    Graph graph;
    std::vector<Edge> removed;
    bool truncated = false;  // fewer bridges existed than requested
};

/// Removes up to max_removed bridges, seeded uniform choice. Each removal
/// raises the component count by exactly one. With prefer_balanced, bridges
/// whose two sides are closest in size go first (deterministic, unseeded).
BridgeModification bridge_attack_modify(const Graph& graph, std::size_t max_removed,
                                        std::uint64_t seed, bool prefer_balanced = false);

struct ScorerConfig {
    int hidden = 32;
    int top_k = 20;           // singular values kept in the nuclear-norm proxy
    double learning_rate = 0.01;
    int epochs = 200;
    std::size_t removal_per_epoch = 0;  // 0 = max(1, ceil(0.001 |E|))
};

/// Two-layer MLP over concatenated endpoint features producing symmetric
/// edge weights in (0, 1]: both concatenation orders are scored and the
/// outputs averaged.
class LowRankScorer {
public:
    LowRankScorer(Eigen::Index feature_dim, int hidden, std::uint64_t seed);

    /// Weight per edge, aligned with the input order.
    Vector edge_weights(const Matrix& x, const std::vector<Edge>& edges) const;

    /// One subgradient step on the top-k nuclear-norm proxy of the weighted
    /// adjacency; returns the pre-step proxy value.
    double train_step(const Matrix& x, const std::vector<Edge>& edges,
                      Eigen::Index num_nodes, int top_k, double learning_rate);

    const Matrix& w1() const { return w1_; }  // hidden x 2F
    const Matrix& w2() const { return w2_; }  // 1 x hidden

private:
    Matrix w1_;
    Matrix w2_;
};

struct LowRankModification {
    Graph graph;
    std::vector<Edge> removed;
    std::vector<double> nuclear_trace;  // proxy value at the start of each epoch
    bool truncated = false;  // epochs ran out before the removal target
};

/// Epochwise low-rank sparsification: score edges, step the scorer against
/// the nuclear-norm proxy, then drop the lowest-weight edges (heterophilic
/// train pairs first) until floor(total_epr_cap x |E|) edges are gone or
/// epochs run out.
LowRankModification lowrank_aug_modify(const Graph& graph, const ScorerConfig& config,
                                       double total_epr_cap, std::uint64_t seed);
LowRankModification lowrank_aug_modify(const Graph& graph, const ScorerConfig& config,
                                       std::size_t max_removed, std::uint64_t seed);

struct Soln2Params {
    PerturbMode mode = PerturbMode::Atk;
    std::size_t budget = 0;      // total unordered pair flips, both phases
    std::uint64_t seed = 0;
    double mod_fraction = 0.5;   // share of the budget spent on modification
    double add_ratio = -1.0;     // forwarded to the priority planner
    bool prefer_balanced = false;
    bool allow_single_labeled_endpoint = false;
    ScorerConfig scorer;
};

struct Soln2Result {
    Graph modified;                 // after modification, before the priority plan
    PerturbationPlan priority_plan; // drawn on the modified graph
    PerturbationPlan plan;          // folded, expressed against the original graph
};

/// Target-guided modification (atk: bridge removal, aug: low-rank
/// sparsification) followed by a priority plan on the modified graph. The
/// returned plan folds both phases into one diff against the original graph.
Soln2Result soln2_plan(const Graph& graph, const Soln2Params& params);

} // namespace ep::targetmod

#endif
