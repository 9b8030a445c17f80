#include "edgeperturb/metrics.hpp"

#include "edgeperturb/io.hpp"

#include <json.hpp>

#include <algorithm>
#include <queue>
#include <sstream>
#include <vector>

namespace ep::metrics {

std::vector<int> bfs_distances(const Graph& graph, NodeId src) {
    std::vector<int> dist(graph.num_nodes(), -1);
    dist[src] = 0;
    std::queue<NodeId> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
        NodeId u = frontier.front();
        frontier.pop();
        for (NodeId v : graph.neighbors(u)) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                frontier.push(v);
            }
        }
    }
    return dist;
}

double global_efficiency(const Graph& graph) {
    NodeId n = graph.num_nodes();
    if (n < 2) throw ValidationError("global efficiency needs at least two nodes");
    double sum = 0.0;
    for (NodeId s = 0; s < n; ++s) {
        std::vector<int> dist = bfs_distances(graph, s);
        for (NodeId t = 0; t < n; ++t)
            if (t != s && dist[t] > 0) sum += 1.0 / dist[t];
    }
    return sum / (double(n) * double(n - 1));
}

namespace {

std::size_t common_neighbors(const Graph& g, NodeId u, NodeId v) {
    auto a = g.neighbors(u), b = g.neighbors(v);
    std::size_t count = 0;
    auto it = a.begin();
    for (NodeId x : b) {
        it = std::lower_bound(it, a.end(), x);
        if (it == a.end()) break;
        if (*it == x) ++count;
    }
    return count;
}

} // namespace

double average_clustering(const Graph& graph) {
    NodeId n = graph.num_nodes();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        std::size_t d = graph.degree(v);
        if (d < 2) continue;
        std::size_t wedges_closed = 0;  // counts each triangle at v twice
        for (NodeId u : graph.neighbors(v)) wedges_closed += common_neighbors(graph, v, u);
        sum += double(wedges_closed) / (double(d) * double(d - 1));
    }
    return sum / double(n);
}

DegreeStats degree_stats(const Graph& graph) {
    DegreeStats out;
    NodeId n = graph.num_nodes();
    std::size_t max_deg = 0;
    for (NodeId v = 0; v < n; ++v) max_deg = std::max(max_deg, graph.degree(v));
    out.histogram.assign(max_deg + 1, 0);
    for (NodeId v = 0; v < n; ++v) ++out.histogram[graph.degree(v)];
    out.mean = n == 0 ? 0.0 : 2.0 * double(graph.num_edges()) / double(n);
    return out;
}

double average_neighbor_degree(const Graph& graph) {
    NodeId n = graph.num_nodes();
    if (n == 0) return 0.0;
    double sum = 0.0;
    for (NodeId v = 0; v < n; ++v) {
        auto nb = graph.neighbors(v);
        if (nb.empty()) continue;
        double local = 0.0;
        for (NodeId u : nb) local += double(graph.degree(u));
        sum += local / double(nb.size());
    }
    return sum / double(n);
}

Centrality eigenvector_centrality(const Graph& graph, double tol, int max_iters) {
    NodeId n = graph.num_nodes();
    if (graph.num_edges() == 0)
        throw ValidationError("eigenvector centrality needs at least one edge");
    Vector x = Vector::Constant(n, 1.0 / std::sqrt(double(n)));
    for (int iter = 0; iter < max_iters; ++iter) {
        Vector next = x;  // the +I term
        for (const auto& e : graph.edges()) {
            next(e.u) += x(e.v);
            next(e.v) += x(e.u);
        }
        next /= next.norm();
        double delta = (next - x).cwiseAbs().maxCoeff();
        x = std::move(next);
        if (delta < tol) return {x, x.mean()};
    }
    throw EcConvergenceError("eigenvector centrality did not converge in " +
                                 std::to_string(max_iters) + " iterations",
                             x);
}

Centrality closeness_centrality(const Graph& graph) {
    NodeId n = graph.num_nodes();
    if (n < 2) throw ValidationError("closeness needs at least two nodes");
    Vector c = Vector::Zero(n);
    for (NodeId v = 0; v < n; ++v) {
        std::vector<int> dist = bfs_distances(graph, v);
        double reach = 0.0, total = 0.0;
        for (NodeId t = 0; t < n; ++t)
            if (t != v && dist[t] > 0) {
                reach += 1.0;
                total += double(dist[t]);
            }
        if (reach > 0.0) c(v) = (reach / double(n - 1)) * (reach / total);
    }
    return {c, c.mean()};
}

Centrality betweenness_centrality(const Graph& graph) {
    NodeId n = graph.num_nodes();
    Vector bc = Vector::Zero(n);
    if (n <= 2) return {bc, 0.0};

    std::vector<double> sigma(n), delta(n);
    std::vector<int> dist(n);
    std::vector<std::vector<NodeId>> pred(n);
    std::vector<NodeId> order;
    order.reserve(n);

    for (NodeId s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        for (auto& p : pred) p.clear();
        order.clear();

        sigma[s] = 1.0;
        dist[s] = 0;
        std::queue<NodeId> frontier;
        frontier.push(s);
        while (!frontier.empty()) {
            NodeId u = frontier.front();
            frontier.pop();
            order.push_back(u);
            for (NodeId v : graph.neighbors(u)) {
                if (dist[v] < 0) {
                    dist[v] = dist[u] + 1;
                    frontier.push(v);
                }
                if (dist[v] == dist[u] + 1) {
                    sigma[v] += sigma[u];
                    pred[v].push_back(u);
                }
            }
        }
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            NodeId w = *it;
            for (NodeId u : pred[w]) delta[u] += sigma[u] / sigma[w] * (1.0 + delta[w]);
            if (w != s) bc(w) += delta[w];
        }
    }
    // accumulation visits each unordered pair from both endpoints
    bc /= double(n - 1) * double(n - 2);
    return {bc, bc.mean()};
}

Centrality degree_centrality(const Graph& graph) {
    NodeId n = graph.num_nodes();
    if (n < 2) throw ValidationError("degree centrality needs at least two nodes");
    Vector dc(n);
    for (NodeId v = 0; v < n; ++v) dc(v) = double(graph.degree(v)) / double(n - 1);
    return {dc, dc.mean()};
}

AttributeReport attribute_report(const Graph& graph) {
    AttributeReport r;
    r.ge = global_efficiency(graph);
    r.cc = average_clustering(graph);
    DegreeStats dd = degree_stats(graph);
    r.dd_mean = dd.mean;
    r.dd_hist = std::move(dd.histogram);
    r.nd = average_neighbor_degree(graph);
    r.ec_mean = eigenvector_centrality(graph).mean;
    r.cl_mean = closeness_centrality(graph).mean;
    r.bc_mean = betweenness_centrality(graph).mean;
    r.dc_mean = degree_centrality(graph).mean;
    return r;
}

namespace {

std::string hist_csv(const std::vector<std::size_t>& hist) {
    std::ostringstream ss;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        if (i) ss << ',';
        ss << hist[i];
    }
    return ss.str();
}

} // namespace

std::string report_text(const AttributeReport& r) {
    std::ostringstream ss;
    ss << "ge " << io::format_double(r.ge) << '\n'
       << "cc " << io::format_double(r.cc) << '\n'
       << "dd_mean " << io::format_double(r.dd_mean) << '\n'
       << "dd_hist " << hist_csv(r.dd_hist) << '\n'
       << "nd " << io::format_double(r.nd) << '\n'
       << "ec_mean " << io::format_double(r.ec_mean) << '\n'
       << "cl_mean " << io::format_double(r.cl_mean) << '\n'
       << "bc_mean " << io::format_double(r.bc_mean) << '\n'
       << "dc_mean " << io::format_double(r.dc_mean) << '\n';
    return ss.str();
}

std::string report_json(const AttributeReport& r) {
    nlohmann::ordered_json j;
    j["ge"] = r.ge;
    j["cc"] = r.cc;
    j["dd_mean"] = r.dd_mean;
    j["dd_hist"] = r.dd_hist;
    j["nd"] = r.nd;
    j["ec_mean"] = r.ec_mean;
    j["cl_mean"] = r.cl_mean;
    j["bc_mean"] = r.bc_mean;
    j["dc_mean"] = r.dc_mean;
    return j.dump(2) + "\n";
}

} // namespace ep::metrics
