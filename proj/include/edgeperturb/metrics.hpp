#ifndef EDGEPERTURB_METRICS_HPP
#define EDGEPERTURB_METRICS_HPP

#include "edgeperturb/errors.hpp"
#include "edgeperturb/graph.hpp"

#include <string>
#include <vector>

namespace ep::metrics {

/// Thrown when power iteration stalls; carries the last iterate for
/// diagnosis.
struct EcConvergenceError : NumericalError {
    EcConvergenceError(const std::string& msg, Vector last_iterate)
        : NumericalError(msg), last(std::move(last_iterate)) {}
    Vector last;
};

struct DegreeStats {
    std::vector<std::size_t> histogram;  // count of nodes per degree, index = degree
    double mean = 0.0;                   // 2|E| / N
};

struct Centrality {
    Vector per_node;
    double mean = 0.0;
};

/// BFS hop distances from src; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& graph, NodeId src);

/// Mean over ordered pairs u != v of 1/d(u,v); unreachable pairs count 0.
double global_efficiency(const Graph& graph);

/// Mean over nodes of 2T(v) / (deg(v)(deg(v)-1)), 0 where deg < 2.
double average_clustering(const Graph& graph);

DegreeStats degree_stats(const Graph& graph);

/// Mean over nodes of the mean neighbor degree, isolated nodes counting 0.
double average_neighbor_degree(const Graph& graph);

/// Power iteration on A + I (the shift keeps bipartite components from
/// oscillating); uniform start, L2-normalized, max-norm convergence test.
Centrality eigenvector_centrality(const Graph& graph, double tol = 1e-6, int max_iters = 1000);

/// Wasserman-Faust closeness: (r/(N-1)) * (r/sum of distances) over the r
/// reachable others; 0 for nodes reaching nobody.
Centrality closeness_centrality(const Graph& graph);

/// Brandes betweenness, endpoints excluded, unordered pair sums scaled by
/// 2/((N-1)(N-2)); all zeros when N <= 2.
Centrality betweenness_centrality(const Graph& graph);

/// deg(v) / (N-1).
Centrality degree_centrality(const Graph& graph);

struct AttributeReport {
    double ge = 0.0;
    double cc = 0.0;
    double dd_mean = 0.0;
    std::vector<std::size_t> dd_hist;
    double nd = 0.0;
    double ec_mean = 0.0;
    double cl_mean = 0.0;
    double bc_mean = 0.0;
    double dc_mean = 0.0;

    friend bool operator==(const AttributeReport&, const AttributeReport&) = default;
};

AttributeReport attribute_report(const Graph& graph);

/// Flat "key value" lines, one metric per line; dd_hist as comma-joined
/// counts indexed by degree.
std::string report_text(const AttributeReport& report);

/// Same content as a JSON object with exactly the text record's keys.
std::string report_json(const AttributeReport& report);

} // namespace ep::metrics

#endif
