#include "edgeperturb/epd.hpp"

#include "edgeperturb/errors.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>

namespace ep::epd {
namespace {

bool qualifies(const Graph& g, NodeId u, bool single_train_ok) {
    if (single_train_ok) return g.is_labeled(u);
    return g.is_train(u);
}

bool pair_qualifies(const Graph& g, NodeId u, NodeId v, bool single_train_ok) {
    if (!qualifies(g, u, single_train_ok) || !qualifies(g, v, single_train_ok)) return false;
    if (single_train_ok) return g.is_train(u) || g.is_train(v);
    return true;
}

std::size_t pairs_of(std::size_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Picks an index with probability proportional to weights[i].
std::size_t pick_weighted(const std::vector<std::size_t>& cumulative, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> dist(0, cumulative.back() - 1);
    std::size_t r = dist(rng);
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
    return static_cast<std::size_t>(it - cumulative.begin());
}

/// Two distinct uniform indexes in [0, n).
std::pair<std::size_t, std::size_t> pick_two(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    std::uniform_int_distribution<std::size_t> second(0, n - 2);
    std::size_t i = first(rng);
    std::size_t j = second(rng);
    if (j >= i) ++j;
    return {i, j};
}

/// Uniform sample of k elements via partial Fisher-Yates; pool is consumed.
std::vector<Edge> sample_without_replacement(std::vector<Edge> pool, std::size_t k,
                                             std::mt19937_64& rng) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
        std::swap(pool[i], pool[dist(rng)]);
    }
    pool.resize(k);
    return pool;
}

} // namespace

int pair_priority(NodeId u, NodeId v, const Graph& graph, bool allow_single_labeled_endpoint) {
    if (u == v) throw ValidationError("pair_priority: endpoints must differ");
    if (u >= graph.num_nodes() || v >= graph.num_nodes())
        throw ValidationError("pair_priority: node id out of range");
    if (!pair_qualifies(graph, u, v, allow_single_labeled_endpoint)) return 0;
    return graph.label(u) == graph.label(v) ? 1 : -1;
}

PriorityCandidates build_candidates(const Graph& graph, bool allow_single_labeled_endpoint) {
    const bool single_ok = allow_single_labeled_endpoint;
    std::size_t train_labeled = graph.nodes_with_tag(SplitTag::Train).size();
    if (train_labeled < 2)
        throw ValidationError("priority perturbation needs at least 2 train-labeled nodes");

    PriorityCandidates cands;
    cands.single_train_endpoint_ok = single_ok;
    cands.class_nodes.assign(static_cast<std::size_t>(graph.num_classes()), {});
    for (NodeId u = 0; u < graph.num_nodes(); ++u)
        if (qualifies(graph, u, single_ok))
            cands.class_nodes[static_cast<std::size_t>(graph.label(u))].push_back(u);

    std::size_t homophilic_edges = 0;
    std::size_t heterophilic_edges = 0;
    for (const Edge& e : graph.edges()) {
        int prio = pair_priority(e.u, e.v, graph, single_ok);
        if (prio > 0) {
            cands.atk_removes.push_back(e);
            ++homophilic_edges;
        } else if (prio < 0) {
            cands.aug_removes.push_back(e);
            ++heterophilic_edges;
        }
    }

    // Pair counts over qualifying nodes; with the relaxed endpoint rule,
    // pairs made of two non-train nodes are carved back out.
    std::size_t qualifying_total = 0;
    std::size_t same_class_pairs = 0;
    std::size_t all_pairs_excluded = 0;
    std::size_t same_class_excluded = 0;
    std::size_t untrain_total = 0;
    for (const auto& members : cands.class_nodes) {
        qualifying_total += members.size();
        same_class_pairs += pairs_of(members.size());
        if (single_ok) {
            std::size_t untrain = static_cast<std::size_t>(std::count_if(
                members.begin(), members.end(),
                [&](NodeId u) { return !graph.is_train(u); }));
            untrain_total += untrain;
            same_class_excluded += pairs_of(untrain);
        }
    }
    if (single_ok) all_pairs_excluded = pairs_of(untrain_total);

    std::size_t all_pairs = pairs_of(qualifying_total);
    std::size_t cross_pairs = (all_pairs - all_pairs_excluded) - (same_class_pairs - same_class_excluded);
    cands.aug_add_supply = (same_class_pairs - same_class_excluded) - homophilic_edges;
    cands.atk_add_supply = cross_pairs - heterophilic_edges;
    return cands;
}

PerturbationPlan make_plan(const Graph& graph, const PriorityCandidates& candidates,
                           const PlanParams& params) {
    double ratio = params.add_ratio;
    if (ratio < 0) ratio = params.mode == PerturbMode::Atk ? 0.5 : 0.0;
    if (!(ratio >= 0.0 && ratio <= 1.0))
        throw ValidationError("add ratio must be in [0, 1]");
    if (candidates.single_train_endpoint_ok != params.allow_single_labeled_endpoint)
        throw ValidationError("candidate pools built under a different endpoint rule");

    const bool same_class_adds = params.mode == PerturbMode::Aug;
    std::size_t add_target = static_cast<std::size_t>(
        static_cast<double>(params.budget) * ratio);
    std::size_t remove_target = params.budget - add_target;
    std::size_t add_supply = same_class_adds ? candidates.aug_add_supply
                                             : candidates.atk_add_supply;

    std::mt19937_64 rng(params.seed);
    PerturbationPlan plan;
    plan.mode = params.mode;
    plan.source = PlanSource::Priority;

    plan.removes = sample_without_replacement(
        same_class_adds ? candidates.aug_removes : candidates.atk_removes,
        remove_target, rng);

    std::size_t add_goal = std::min(add_target, add_supply);
    if (add_goal > 0) {
        std::vector<std::size_t> cumulative;
        std::vector<std::size_t> flat_index;  // class ids with nonempty weight
        std::size_t running = 0;
        std::vector<NodeId> all_nodes;
        if (same_class_adds) {
            for (std::size_t c = 0; c < candidates.class_nodes.size(); ++c) {
                std::size_t w = pairs_of(candidates.class_nodes[c].size());
                if (w == 0) continue;
                running += w;
                cumulative.push_back(running);
                flat_index.push_back(c);
            }
        } else {
            for (const auto& members : candidates.class_nodes)
                all_nodes.insert(all_nodes.end(), members.begin(), members.end());
        }

        std::unordered_set<Edge, EdgeHash> chosen;
        std::size_t tries = 0;
        const std::size_t try_cap = 50 * std::max<std::size_t>(params.budget, 1);
        while (plan.adds.size() < add_goal && tries < try_cap) {
            ++tries;
            NodeId u, v;
            if (same_class_adds) {
                const auto& members =
                    candidates.class_nodes[flat_index[pick_weighted(cumulative, rng)]];
                auto [i, j] = pick_two(members.size(), rng);
                u = members[i];
                v = members[j];
            } else {
                auto [i, j] = pick_two(all_nodes.size(), rng);
                u = all_nodes[i];
                v = all_nodes[j];
                if (graph.label(u) == graph.label(v)) continue;
            }
            if (candidates.single_train_endpoint_ok && !graph.is_train(u) && !graph.is_train(v))
                continue;
            if (graph.has_edge(u, v)) continue;
            Edge e{u, v};
            if (!chosen.insert(e).second) continue;
            plan.adds.push_back(e);
        }
    }

    plan.truncated = plan.size() < params.budget;
    return plan;
}

PerturbationPlan make_plan(const Graph& graph, const PlanParams& params) {
    return make_plan(graph, build_candidates(graph, params.allow_single_labeled_endpoint),
                     params);
}

} // namespace ep::epd
