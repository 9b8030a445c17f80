#ifndef EP_TESTS_GENERATORS_HPP
#define EP_TESTS_GENERATORS_HPP

// Seeded random fixtures for property tests.

#include "edgeperturb/graph.hpp"

#include <algorithm>
#include <random>
#include <unordered_set>
#include <vector>

namespace ep::testgen {

/// Erdos-Renyi G(n, p) edge list.
inline std::vector<ep::Edge> gnp_edges(ep::NodeId n, double p, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<ep::Edge> edges;
    for (ep::NodeId u = 0; u < n; ++u)
        for (ep::NodeId v = u + 1; v < n; ++v)
            if (unit(rng) < p) edges.emplace_back(u, v);
    return edges;
}

/// G(n, p) graph with random labels over `classes` classes and every node
/// tagged train (the loosest fixture most property tests need).
inline ep::Graph gnp_graph(ep::NodeId n, double p, int classes, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> cls(0, classes - 1);
    std::vector<int> labels(n);
    for (auto& c : labels) c = cls(rng);
    return ep::Graph::make(n, gnp_edges(n, p, rng), ep::Matrix{}, std::move(labels),
                           std::vector<ep::SplitTag>(n, ep::SplitTag::Train));
}

/// Valid random plan: samples removes from existing edges and adds from
/// non-edges, each pair at most once.
inline ep::PerturbationPlan random_plan(const ep::Graph& g, std::size_t max_flips,
                                        std::mt19937_64& rng) {
    ep::PerturbationPlan plan;
    std::vector<ep::Edge> existing = g.edges();
    std::shuffle(existing.begin(), existing.end(), rng);
    std::uniform_int_distribution<std::size_t> count(0, max_flips);
    std::size_t removes = std::min(count(rng), existing.size());
    plan.removes.assign(existing.begin(), existing.begin() + removes);

    std::size_t adds = count(rng);
    std::uniform_int_distribution<ep::NodeId> node(0, g.num_nodes() - 1);
    std::unordered_set<ep::Edge, ep::EdgeHash> chosen;
    for (std::size_t tries = 0; tries < 50 * adds && chosen.size() < adds; ++tries) {
        ep::NodeId u = node(rng), v = node(rng);
        if (u == v || g.has_edge(u, v)) continue;
        chosen.insert(ep::Edge(u, v));
    }
    plan.adds.assign(chosen.begin(), chosen.end());
    return plan;
}

} // namespace ep::testgen

#endif
