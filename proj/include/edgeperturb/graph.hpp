#ifndef EDGEPERTURB_GRAPH_HPP
#define EDGEPERTURB_GRAPH_HPP

#include "edgeperturb/types.hpp"

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace ep {

inline constexpr int kUnlabeled = -1;

/// Node features, stored dense up to kDenseFeatureCap entries and as
/// compressed sparse rows beyond that.
class FeatureMatrix {
public:
    static constexpr std::int64_t kDenseFeatureCap = 64 * 1024 * 1024;

    FeatureMatrix() = default;
    explicit FeatureMatrix(Matrix dense) : dense_(std::move(dense)) {}
    explicit FeatureMatrix(SparseMatrix sparse) : sparse_(std::move(sparse)), is_sparse_(true) {}

    /// Picks the storage layout from the total entry count.
    static FeatureMatrix from_triplets(Eigen::Index rows, Eigen::Index cols,
                                       const std::vector<Eigen::Triplet<double>>& entries);

    bool is_sparse() const { return is_sparse_; }
    Eigen::Index rows() const { return is_sparse_ ? sparse_.rows() : dense_.rows(); }
    Eigen::Index cols() const { return is_sparse_ ? sparse_.cols() : dense_.cols(); }

    const Matrix& dense() const { return dense_; }
    const SparseMatrix& sparse() const { return sparse_; }

    Vector row(Eigen::Index i) const;
    Matrix to_dense() const { return is_sparse_ ? Matrix(sparse_) : dense_; }

private:
    Matrix dense_;
    SparseMatrix sparse_;
    bool is_sparse_ = false;
};

/// Immutable undirected simple graph: adjacency, features, labels and the
/// train/val/test split. All mutation goes through constructing new graphs,
/// so instances are safe to share across threads.
class Graph {
public:
    Graph() = default;

    /// Validates and canonicalizes: edges sorted, no self-loops or dupes,
    /// every train/val/test node labeled, feature row count = num_nodes.
    static Graph make(NodeId num_nodes, std::vector<Edge> edges,
                      std::shared_ptr<const FeatureMatrix> features,
                      std::shared_ptr<const std::vector<int>> labels,
                      std::shared_ptr<const std::vector<SplitTag>> split);

    /// Convenience for fixtures: dense features, plain vectors.
    static Graph make(NodeId num_nodes, std::vector<Edge> edges, Matrix features = {},
                      std::vector<int> labels = {}, std::vector<SplitTag> split = {});

    NodeId num_nodes() const { return num_nodes_; }
    std::size_t num_edges() const { return edges_.size(); }
    const std::vector<Edge>& edges() const { return edges_; }

    std::span<const NodeId> neighbors(NodeId u) const;
    std::size_t degree(NodeId u) const { return neighbors(u).size(); }
    bool has_edge(NodeId u, NodeId v) const;

    bool has_features() const { return features_ && features_->rows() > 0; }
    const FeatureMatrix& features() const { return *features_; }
    std::shared_ptr<const FeatureMatrix> features_ptr() const { return features_; }
    Eigen::Index feature_dim() const { return has_features() ? features_->cols() : 0; }

    int label(NodeId u) const { return (*labels_)[u]; }
    bool is_labeled(NodeId u) const { return label(u) != kUnlabeled; }
    const std::vector<int>& labels() const { return *labels_; }
    std::shared_ptr<const std::vector<int>> labels_ptr() const { return labels_; }
    int num_classes() const { return num_classes_; }

    SplitTag split(NodeId u) const { return (*split_)[u]; }
    const std::vector<SplitTag>& split_tags() const { return *split_; }
    std::shared_ptr<const std::vector<SplitTag>> split_ptr() const { return split_; }
    std::vector<NodeId> nodes_with_tag(SplitTag tag) const;
    bool is_train(NodeId u) const { return split(u) == SplitTag::Train; }

    /// Dense binary adjacency; intended for solver-scale graphs only.
    Matrix dense_adjacency() const;

private:
    NodeId num_nodes_ = 0;
    std::vector<Edge> edges_;
    std::vector<NodeId> adj_flat_;
    std::vector<std::size_t> adj_offsets_;
    std::shared_ptr<const FeatureMatrix> features_;
    std::shared_ptr<const std::vector<int>> labels_;
    std::shared_ptr<const std::vector<SplitTag>> split_;
    int num_classes_ = 0;
};

/// Symmetric set of edge flips. Applying it realizes an XOR against the
/// adjacency: every listed pair changes state exactly once.
struct PerturbationPlan {
    std::vector<Edge> adds;
    std::vector<Edge> removes;
    PerturbMode mode = PerturbMode::Aug;
    PlanSource source = PlanSource::Priority;
    /// Set when the requested budget exceeded the candidate supply.
    bool truncated = false;

    std::size_t size() const { return adds.size() + removes.size(); }
    bool empty() const { return adds.empty() && removes.empty(); }

    /// Swapped adds/removes; applying plan then inverse restores the graph.
    PerturbationPlan inverse() const;
};

/// Edge perturbation ratio: flipped pairs over original edge count.
struct Epr {
    double value = 0.0;
    static Epr of(const PerturbationPlan& plan, const Graph& graph);
};

/// Throws ValidationError unless adds are non-edges, removes are existing
/// edges, the two sets are disjoint, and all endpoints are in range.
void validate_plan(const Graph& graph, const PerturbationPlan& plan);

/// New graph with edges = (E \ removes) ∪ adds; everything else shared.
Graph apply_plan(const Graph& graph, const PerturbationPlan& plan);

/// Fraction of edges whose endpoints share a class. With labeled_only set,
/// edges touching an unlabeled endpoint leave the denominator too.
/// Throws ValidationError when no edge qualifies.
double edge_homophily(const Graph& graph, bool labeled_only = true);

struct ComponentSplit {
    std::size_t count = 0;
    std::vector<NodeId> component;  // id = order of each component's smallest node
};

ComponentSplit connected_components(const Graph& graph);

/// SBM-style fixture generator: intra-class probability p_in, inter-class
/// p_out, one-hot class signal plus seeded noise features, 60/20/20 split.
Graph generate_planted_partition(int classes, int nodes_per_class, double p_in, double p_out,
                                 int feature_dim, std::uint64_t seed);

} // namespace ep

#endif
