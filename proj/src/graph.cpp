#include "edgeperturb/graph.hpp"

#include "edgeperturb/errors.hpp"

#include <algorithm>
#include <queue>
#include <random>
#include <unordered_set>

namespace ep {

FeatureMatrix FeatureMatrix::from_triplets(Eigen::Index rows, Eigen::Index cols,
                                           const std::vector<Eigen::Triplet<double>>& entries) {
    if (rows * cols <= kDenseFeatureCap) {
        Matrix dense = Matrix::Zero(rows, cols);
        for (const auto& t : entries) dense(t.row(), t.col()) = t.value();
        return FeatureMatrix(std::move(dense));
    }
    SparseMatrix sparse(rows, cols);
    sparse.setFromTriplets(entries.begin(), entries.end());
    sparse.makeCompressed();
    return FeatureMatrix(std::move(sparse));
}

Vector FeatureMatrix::row(Eigen::Index i) const {
    if (!is_sparse_) return dense_.row(i);
    Vector out = Vector::Zero(sparse_.cols());
    for (SparseMatrix::InnerIterator it(sparse_, i); it; ++it) out(it.col()) = it.value();
    return out;
}

Graph Graph::make(NodeId num_nodes, std::vector<Edge> edges,
                  std::shared_ptr<const FeatureMatrix> features,
                  std::shared_ptr<const std::vector<int>> labels,
                  std::shared_ptr<const std::vector<SplitTag>> split) {
    Graph g;
    g.num_nodes_ = num_nodes;

    for (const auto& e : edges) {
        if (e.u == e.v)
            throw ValidationError("self-loop at node " + std::to_string(e.u));
        if (e.v >= num_nodes)
            throw ValidationError("edge endpoint " + std::to_string(e.v) + " out of range (n=" +
                                  std::to_string(num_nodes) + ")");
    }
    std::sort(edges.begin(), edges.end());
    if (auto it = std::adjacent_find(edges.begin(), edges.end()); it != edges.end())
        throw ValidationError("duplicate edge " + std::to_string(it->u) + "-" +
                              std::to_string(it->v));
    g.edges_ = std::move(edges);

    if (!labels || labels->empty()) labels = std::make_shared<const std::vector<int>>(num_nodes, kUnlabeled);
    if (!split || split->empty()) split = std::make_shared<const std::vector<SplitTag>>(num_nodes, SplitTag::None);
    if (!features) features = std::make_shared<const FeatureMatrix>();

    if (labels->size() != num_nodes)
        throw ValidationError("label count " + std::to_string(labels->size()) +
                              " != node count " + std::to_string(num_nodes));
    if (split->size() != num_nodes)
        throw ValidationError("split tag count " + std::to_string(split->size()) +
                              " != node count " + std::to_string(num_nodes));
    if (features->rows() > 0 && features->rows() != static_cast<Eigen::Index>(num_nodes))
        throw ValidationError("feature row count " + std::to_string(features->rows()) +
                              " != node count " + std::to_string(num_nodes));

    int max_label = kUnlabeled;
    for (NodeId u = 0; u < num_nodes; ++u) {
        int c = (*labels)[u];
        if (c < kUnlabeled)
            throw ValidationError("negative class id " + std::to_string(c) + " at node " +
                                  std::to_string(u));
        if ((*split)[u] != SplitTag::None && c == kUnlabeled)
            throw ValidationError("node " + std::to_string(u) +
                                  " is in the split but has no label");
        max_label = std::max(max_label, c);
    }
    g.num_classes_ = max_label + 1;
    g.features_ = std::move(features);
    g.labels_ = std::move(labels);
    g.split_ = std::move(split);

    // CSR-style neighbor lists, sorted per node.
    std::vector<std::size_t> deg(num_nodes, 0);
    for (const auto& e : g.edges_) {
        ++deg[e.u];
        ++deg[e.v];
    }
    g.adj_offsets_.assign(num_nodes + 1, 0);
    for (NodeId u = 0; u < num_nodes; ++u) g.adj_offsets_[u + 1] = g.adj_offsets_[u] + deg[u];
    g.adj_flat_.resize(g.adj_offsets_[num_nodes]);
    std::vector<std::size_t> cursor(g.adj_offsets_.begin(), g.adj_offsets_.end() - 1);
    for (const auto& e : g.edges_) {
        g.adj_flat_[cursor[e.u]++] = e.v;
        g.adj_flat_[cursor[e.v]++] = e.u;
    }
    for (NodeId u = 0; u < num_nodes; ++u)
        std::sort(g.adj_flat_.begin() + g.adj_offsets_[u], g.adj_flat_.begin() + g.adj_offsets_[u + 1]);
    return g;
}

Graph Graph::make(NodeId num_nodes, std::vector<Edge> edges, Matrix features,
                  std::vector<int> labels, std::vector<SplitTag> split) {
    return make(num_nodes, std::move(edges),
                std::make_shared<const FeatureMatrix>(std::move(features)),
                std::make_shared<const std::vector<int>>(std::move(labels)),
                std::make_shared<const std::vector<SplitTag>>(std::move(split)));
}

std::span<const NodeId> Graph::neighbors(NodeId u) const {
    return {adj_flat_.data() + adj_offsets_[u], adj_offsets_[u + 1] - adj_offsets_[u]};
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes_ || v >= num_nodes_) return false;
    auto nb = neighbors(degree(u) <= degree(v) ? u : v);
    NodeId other = degree(u) <= degree(v) ? v : u;
    return std::binary_search(nb.begin(), nb.end(), other);
}

std::vector<NodeId> Graph::nodes_with_tag(SplitTag tag) const {
    std::vector<NodeId> out;
    for (NodeId u = 0; u < num_nodes_; ++u)
        if ((*split_)[u] == tag) out.push_back(u);
    return out;
}

Matrix Graph::dense_adjacency() const {
    Matrix a = Matrix::Zero(num_nodes_, num_nodes_);
    for (const auto& e : edges_) {
        a(e.u, e.v) = 1.0;
        a(e.v, e.u) = 1.0;
    }
    return a;
}

PerturbationPlan PerturbationPlan::inverse() const {
    PerturbationPlan inv;
    inv.adds = removes;
    inv.removes = adds;
    inv.mode = mode;
    inv.source = source;
    return inv;
}

Epr Epr::of(const PerturbationPlan& plan, const Graph& graph) {
    if (graph.num_edges() == 0) throw ValidationError("EPR undefined on an edgeless graph");
    return {static_cast<double>(plan.size()) / static_cast<double>(graph.num_edges())};
}

void validate_plan(const Graph& graph, const PerturbationPlan& plan) {
    std::unordered_set<Edge, EdgeHash> seen;
    for (const auto& e : plan.adds) {
        if (e.u == e.v) throw ValidationError("plan adds a self-loop at " + std::to_string(e.u));
        if (e.v >= graph.num_nodes())
            throw ValidationError("plan endpoint " + std::to_string(e.v) + " out of range");
        if (graph.has_edge(e.u, e.v))
            throw ValidationError("plan adds existing edge " + std::to_string(e.u) + "-" +
                                  std::to_string(e.v));
        if (!seen.insert(e).second)
            throw ValidationError("pair " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                  " appears twice in the plan");
    }
    for (const auto& e : plan.removes) {
        if (e.v >= graph.num_nodes())
            throw ValidationError("plan endpoint " + std::to_string(e.v) + " out of range");
        if (!graph.has_edge(e.u, e.v))
            throw ValidationError("plan removes missing edge " + std::to_string(e.u) + "-" +
                                  std::to_string(e.v));
        if (!seen.insert(e).second)
            throw ValidationError("pair " + std::to_string(e.u) + "-" + std::to_string(e.v) +
                                  " appears twice in the plan");
    }
}

Graph apply_plan(const Graph& graph, const PerturbationPlan& plan) {
    validate_plan(graph, plan);
    std::unordered_set<Edge, EdgeHash> removes(plan.removes.begin(), plan.removes.end());
    std::vector<Edge> edges;
    edges.reserve(graph.num_edges() + plan.adds.size() - plan.removes.size());
    for (const auto& e : graph.edges())
        if (!removes.count(e)) edges.push_back(e);
    edges.insert(edges.end(), plan.adds.begin(), plan.adds.end());
    return Graph::make(graph.num_nodes(), std::move(edges), graph.features_ptr(),
                       graph.labels_ptr(), graph.split_ptr());
}

double edge_homophily(const Graph& graph, bool labeled_only) {
    std::size_t same = 0, total = 0;
    for (const auto& e : graph.edges()) {
        int cu = graph.label(e.u), cv = graph.label(e.v);
        if (labeled_only && (cu == kUnlabeled || cv == kUnlabeled)) continue;
        ++total;
        if (cu == cv && cu != kUnlabeled) ++same;
    }
    if (total == 0) throw ValidationError("undefined homophily: no qualifying edges");
    return static_cast<double>(same) / static_cast<double>(total);
}

ComponentSplit connected_components(const Graph& graph) {
    ComponentSplit out;
    out.component.assign(graph.num_nodes(), 0);
    std::vector<bool> seen(graph.num_nodes(), false);
    std::queue<NodeId> frontier;
    for (NodeId root = 0; root < graph.num_nodes(); ++root) {
        if (seen[root]) continue;
        NodeId id = static_cast<NodeId>(out.count++);
        seen[root] = true;
        frontier.push(root);
        while (!frontier.empty()) {
            NodeId u = frontier.front();
            frontier.pop();
            out.component[u] = id;
            for (NodeId v : graph.neighbors(u)) {
                if (!seen[v]) {
                    seen[v] = true;
                    frontier.push(v);
                }
            }
        }
    }
    return out;
}

Graph generate_planted_partition(int classes, int nodes_per_class, double p_in, double p_out,
                                 int feature_dim, std::uint64_t seed) {
    if (classes < 1 || nodes_per_class < 1)
        throw ValidationError("planted partition needs at least one class and one node per class");
    if (p_out >= p_in)
        throw ValidationError("planted partition needs p_out < p_in");
    if (feature_dim < classes)
        throw ValidationError("feature dim must cover the one-hot class signal");

    NodeId n = static_cast<NodeId>(classes) * static_cast<NodeId>(nodes_per_class);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::vector<int> labels(n);
    for (NodeId u = 0; u < n; ++u) labels[u] = static_cast<int>(u) / nodes_per_class;

    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u)
        for (NodeId v = u + 1; v < n; ++v)
            if (unit(rng) < (labels[u] == labels[v] ? p_in : p_out)) edges.emplace_back(u, v);

    // noise strong enough that neighborhood aggregation genuinely helps;
    // fixtures that perturb edges need accuracy to depend on the graph
    std::normal_distribution<double> noise(0.0, 0.8);
    Matrix x = Matrix::Zero(n, feature_dim);
    for (NodeId u = 0; u < n; ++u) {
        x(u, labels[u]) = 1.0;
        for (int f = 0; f < feature_dim; ++f) x(u, f) += noise(rng);
    }

    // 60/20/20 split, shuffled per class so every class reaches the train set.
    std::vector<SplitTag> split(n, SplitTag::None);
    for (int c = 0; c < classes; ++c) {
        std::vector<NodeId> members;
        for (NodeId u = c * nodes_per_class; u < NodeId((c + 1) * nodes_per_class); ++u)
            members.push_back(u);
        std::shuffle(members.begin(), members.end(), rng);
        std::size_t train_end = (members.size() * 6) / 10;
        std::size_t val_end = (members.size() * 8) / 10;
        for (std::size_t i = 0; i < members.size(); ++i)
            split[members[i]] = i < train_end  ? SplitTag::Train
                                : i < val_end  ? SplitTag::Val
                                               : SplitTag::Test;
    }

    return Graph::make(n, std::move(edges), std::move(x), std::move(labels), std::move(split));
}

} // namespace ep
