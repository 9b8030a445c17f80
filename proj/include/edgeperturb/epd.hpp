#ifndef EDGEPERTURB_EPD_HPP
#define EDGEPERTURB_EPD_HPP

#include "edgeperturb/graph.hpp"

#include <cstdint>
#include <vector>

namespace ep::epd {

/// Candidate pools for priority-based perturbation. Remove pools are
/// enumerated outright; add pools stay implicit (per-class node indexes plus
/// supply counts) and are rejection-sampled on demand, so the quadratic pair
/// space is never materialized.
struct PriorityCandidates {
    std::vector<Edge> aug_removes;  // existing heterophilic qualifying edges
    std::vector<Edge> atk_removes;  // existing homophilic qualifying edges
    std::vector<std::vector<NodeId>> class_nodes;  // qualifying nodes per class
    std::size_t aug_add_supply = 0;  // same-class qualifying non-edges
    std::size_t atk_add_supply = 0;  // cross-class qualifying non-edges
    bool single_train_endpoint_ok = false;
};

/// Priority sign of an unordered pair: +1 both qualifying with equal class,
/// -1 with different classes, 0 when the pair does not qualify (such pairs
/// are never perturbed). By default a node qualifies when train-tagged; with
/// allow_single_labeled_endpoint, any labeled pair qualifies as long as one
/// endpoint is train-tagged.
int pair_priority(NodeId u, NodeId v, const Graph& graph,
                  bool allow_single_labeled_endpoint = false);

PriorityCandidates build_candidates(const Graph& graph,
                                    bool allow_single_labeled_endpoint = false);

struct PlanParams {
    PerturbMode mode = PerturbMode::Aug;
    std::size_t budget = 0;  // unordered pair flips
    std::uint64_t seed = 0;
    /// Fraction of the budget spent on additions; the remainder (including
    /// the rounding remainder) goes to removals. Negative = mode default:
    /// 0.5 for atk, 0.0 (remove-only) for aug. Shares do not spill over when
    /// one pool runs dry.
    double add_ratio = -1.0;
    bool allow_single_labeled_endpoint = false;
};

/// Samples a plan uniformly without replacement from the mode's pools:
/// aug adds homophilic pairs and removes heterophilic edges, atk the
/// opposite. Realized size can fall short of the budget (pool exhaustion or
/// the rejection cap of 50 x budget tries); the plan is flagged truncated
/// then, never an error.
PerturbationPlan make_plan(const Graph& graph, const PriorityCandidates& candidates,
                           const PlanParams& params);
PerturbationPlan make_plan(const Graph& graph, const PlanParams& params);

} // namespace ep::epd

#endif
