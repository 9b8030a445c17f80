#include "edgeperturb/targetmod.hpp"

#include "edgeperturb/epd.hpp"
#include "edgeperturb/errors.hpp"
#include "edgeperturb/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>
#include <vector>

namespace ep::targetmod {
namespace {

constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

struct BridgeRecord {
    Edge edge;
    std::size_t child_side = 0;  // nodes on the DFS-child side of the cut
    NodeId root = 0;             // DFS root of the containing component
};

struct BridgeScan {
    std::vector<BridgeRecord> records;
    std::vector<std::size_t> component_size;  // indexed by DFS root id
    std::size_t components = 0;
};

/// Low-link DFS with an explicit stack; also tracks subtree sizes so each
/// bridge knows how the component splits when it goes.
BridgeScan scan_bridges(const Graph& g) {
    const NodeId n = g.num_nodes();
    std::vector<int> disc(n, -1);
    std::vector<int> low(n, 0);
    std::vector<std::size_t> size(n, 1);
    BridgeScan scan;
    scan.component_size.assign(n, 0);

    struct Frame {
        NodeId u;
        NodeId parent;
        std::size_t next = 0;
        bool parent_skipped = false;
    };
    std::vector<Frame> stack;
    int timer = 0;

    for (NodeId root = 0; root < n; ++root) {
        if (disc[root] != -1) continue;
        ++scan.components;
        disc[root] = low[root] = timer++;
        stack.push_back({root, kNoParent});
        while (!stack.empty()) {
            Frame& f = stack.back();
            auto nbrs = g.neighbors(f.u);
            if (f.next < nbrs.size()) {
                NodeId v = nbrs[f.next++];
                if (v == f.parent && !f.parent_skipped) {
                    f.parent_skipped = true;
                    continue;
                }
                if (disc[v] == -1) {
                    disc[v] = low[v] = timer++;
                    stack.push_back({v, f.u});
                } else {
                    low[f.u] = std::min(low[f.u], disc[v]);
                }
            } else {
                Frame done = f;
                stack.pop_back();
                if (done.parent == kNoParent) {
                    scan.component_size[root] = size[done.u];
                    continue;
                }
                low[done.parent] = std::min(low[done.parent], low[done.u]);
                size[done.parent] += size[done.u];
                if (low[done.u] > disc[done.parent])
                    scan.records.push_back({Edge(done.parent, done.u), size[done.u], root});
            }
        }
    }
    std::sort(scan.records.begin(), scan.records.end(),
              [](const BridgeRecord& a, const BridgeRecord& b) { return a.edge < b.edge; });
    return scan;
}

Graph remove_edges(const Graph& g, std::vector<Edge> removed, PerturbMode mode,
                   PlanSource source) {
    PerturbationPlan plan;
    plan.removes = std::move(removed);
    plan.mode = mode;
    plan.source = source;
    return apply_plan(g, plan);
}

Matrix glorot(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
    double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
    return m;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

struct ForwardPass {
    Matrix pre1, pre2;  // per-edge hidden pre-activations, one row per edge
    Vector o1, o2;      // per-order sigmoid outputs
    Vector w;           // averaged symmetric weights
};

ForwardPass run_forward(const Matrix& w1, const Matrix& w2, const Matrix& x,
                        const std::vector<Edge>& edges) {
    const Eigen::Index f = x.cols();
    const Eigen::Index h = w1.rows();
    const Eigen::Index m = static_cast<Eigen::Index>(edges.size());
    // W1 concat(x_u, x_v) = W1_left x_u + W1_right x_v, so two node-level
    // projections replace the per-edge 2F products.
    Matrix proj_left = x * w1.leftCols(f).transpose();    // N x h
    Matrix proj_right = x * w1.rightCols(f).transpose();  // N x h

    ForwardPass fp;
    fp.pre1.resize(m, h);
    fp.pre2.resize(m, h);
    fp.o1.resize(m);
    fp.o2.resize(m);
    fp.w.resize(m);
    for (Eigen::Index e = 0; e < m; ++e) {
        NodeId u = edges[static_cast<std::size_t>(e)].u;
        NodeId v = edges[static_cast<std::size_t>(e)].v;
        fp.pre1.row(e) = proj_left.row(u) + proj_right.row(v);
        fp.pre2.row(e) = proj_left.row(v) + proj_right.row(u);
        double z1 = fp.pre1.row(e).cwiseMax(0.0).dot(w2.row(0));
        double z2 = fp.pre2.row(e).cwiseMax(0.0).dot(w2.row(0));
        fp.o1(e) = sigmoid(z1);
        fp.o2(e) = sigmoid(z2);
        fp.w(e) = 0.5 * (fp.o1(e) + fp.o2(e));
    }
    return fp;
}

SparseMatrix weighted_adjacency(Eigen::Index n, const std::vector<Edge>& edges,
                                const Vector& w) {
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(edges.size() * 2);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        trips.emplace_back(edges[e].u, edges[e].v, w(static_cast<Eigen::Index>(e)));
        trips.emplace_back(edges[e].v, edges[e].u, w(static_cast<Eigen::Index>(e)));
    }
    SparseMatrix m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

} // namespace

BridgeSet find_bridges(const Graph& graph) {
    BridgeScan scan = scan_bridges(graph);
    BridgeSet out;
    out.bridges.reserve(scan.records.size());
    for (const BridgeRecord& r : scan.records) out.bridges.push_back(r.edge);
    out.components_before = scan.components;
    // Cut edges are exactly the edges of the block forest, so dropping all
    // of them adds one component per bridge.
    out.components_after_full_removal = scan.components + scan.records.size();
    return out;
}

BridgeModification bridge_attack_modify(const Graph& graph, std::size_t max_removed,
                                        std::uint64_t seed, bool prefer_balanced) {
    BridgeScan scan = scan_bridges(graph);
    std::vector<BridgeRecord> pool = std::move(scan.records);
    std::size_t take = std::min(max_removed, pool.size());

    if (prefer_balanced) {
        std::stable_sort(pool.begin(), pool.end(),
                         [&](const BridgeRecord& a, const BridgeRecord& b) {
                             auto imbalance = [&](const BridgeRecord& r) {
                                 std::size_t total = scan.component_size[r.root];
                                 std::size_t rest = total - r.child_side;
                                 return rest > r.child_side ? rest - r.child_side
                                                            : r.child_side - rest;
                             };
                             auto ia = imbalance(a), ib = imbalance(b);
                             if (ia != ib) return ia < ib;
                             return a.edge < b.edge;
                         });
    } else {
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < take; ++i) {
            std::uniform_int_distribution<std::size_t> dist(i, pool.size() - 1);
            std::swap(pool[i], pool[dist(rng)]);
        }
    }

    BridgeModification out{graph, {}, max_removed > pool.size()};
    out.removed.reserve(take);
    for (std::size_t i = 0; i < take; ++i) out.removed.push_back(pool[i].edge);
    std::sort(out.removed.begin(), out.removed.end());
    if (!out.removed.empty())
        out.graph = remove_edges(graph, out.removed, PerturbMode::Atk, PlanSource::Bridge);
    return out;
}

LowRankScorer::LowRankScorer(Eigen::Index feature_dim, int hidden, std::uint64_t seed) {
    if (feature_dim < 1) throw ValidationError("scorer needs a positive feature dim");
    if (hidden < 1) throw ValidationError("scorer needs a positive hidden width");
    std::mt19937_64 rng(seed);
    w1_ = glorot(hidden, 2 * feature_dim, rng);
    w2_ = glorot(1, hidden, rng);
}

Vector LowRankScorer::edge_weights(const Matrix& x, const std::vector<Edge>& edges) const {
    if (x.cols() * 2 != w1_.cols())
        throw ValidationError("feature dim does not match the scorer");
    return run_forward(w1_, w2_, x, edges).w;
}

double LowRankScorer::train_step(const Matrix& x, const std::vector<Edge>& edges,
                                 Eigen::Index num_nodes, int top_k, double learning_rate) {
    if (x.cols() * 2 != w1_.cols())
        throw ValidationError("feature dim does not match the scorer");
    if (edges.empty()) return 0.0;

    const Eigen::Index f = x.cols();
    const Eigen::Index h = w1_.rows();
    ForwardPass fp = run_forward(w1_, w2_, x, edges);
    SparseMatrix m = weighted_adjacency(num_nodes, edges, fp.w);

    int k = std::min<int>(top_k, static_cast<int>(num_nodes));
    linalg::TopKSvd svd;
    try {
        svd = linalg::top_k_singular(m, k, 1e-8, 3000);
    } catch (const linalg::SvdConvergenceError& err) {
        // a slightly unconverged subgradient still points the right way
        svd = err.last;
    }
    double nuclear = svd.sigma.sum();

    // d(sum sigma)/dM = U Vᵀ; each edge owns the (u,v) and (v,u) entries.
    Matrix delta_left = Matrix::Zero(num_nodes, h);
    Matrix delta_right = Matrix::Zero(num_nodes, h);
    Matrix grad_w2 = Matrix::Zero(1, h);
    for (std::size_t e = 0; e < edges.size(); ++e) {
        NodeId u = edges[e].u;
        NodeId v = edges[e].v;
        double g = svd.U.row(u).dot(svd.V.row(v)) + svd.U.row(v).dot(svd.V.row(u));
        Eigen::Index row = static_cast<Eigen::Index>(e);

        double dz1 = 0.5 * g * fp.o1(row) * (1.0 - fp.o1(row));
        grad_w2 += dz1 * fp.pre1.row(row).cwiseMax(0.0);
        Eigen::RowVectorXd dpre1 =
            dz1 * w2_.row(0).cwiseProduct((fp.pre1.row(row).array() > 0.0).cast<double>().matrix());
        delta_left.row(u) += dpre1;
        delta_right.row(v) += dpre1;

        double dz2 = 0.5 * g * fp.o2(row) * (1.0 - fp.o2(row));
        grad_w2 += dz2 * fp.pre2.row(row).cwiseMax(0.0);
        Eigen::RowVectorXd dpre2 =
            dz2 * w2_.row(0).cwiseProduct((fp.pre2.row(row).array() > 0.0).cast<double>().matrix());
        delta_left.row(v) += dpre2;
        delta_right.row(u) += dpre2;
    }
    w1_.leftCols(f) -= learning_rate * (delta_left.transpose() * x);
    w1_.rightCols(f) -= learning_rate * (delta_right.transpose() * x);
    w2_ -= learning_rate * grad_w2;
    return nuclear;
}

LowRankModification lowrank_aug_modify(const Graph& graph, const ScorerConfig& config,
                                       double total_epr_cap, std::uint64_t seed) {
    if (!(total_epr_cap > 0.0 && total_epr_cap < 1.0))
        throw ValidationError("EPR cap must be in (0, 1)");
    std::size_t target = static_cast<std::size_t>(
        total_epr_cap * static_cast<double>(graph.num_edges()));
    return lowrank_aug_modify(graph, config, target, seed);
}

LowRankModification lowrank_aug_modify(const Graph& graph, const ScorerConfig& config,
                                       std::size_t max_removed, std::uint64_t seed) {
    if (!graph.has_features())
        throw ValidationError("low-rank modification needs node features");

    LowRankModification out{graph, {}, {}, false};
    max_removed = std::min(max_removed, graph.num_edges());
    if (max_removed == 0) return out;

    const std::size_t per_epoch = config.removal_per_epoch > 0
                                      ? config.removal_per_epoch
                                      : std::max<std::size_t>(1, (graph.num_edges() + 999) / 1000);
    Matrix x = graph.features().to_dense();
    LowRankScorer scorer(x.cols(), config.hidden, seed);
    std::vector<Edge> edges = graph.edges();

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (out.removed.size() >= max_removed || edges.empty()) break;
        double nuclear = scorer.train_step(x, edges, graph.num_nodes(), config.top_k,
                                           config.learning_rate);
        out.nuclear_trace.push_back(nuclear);

        Vector w = scorer.edge_weights(x, edges);
        std::vector<std::size_t> order(edges.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        auto heterophilic = [&](std::size_t i) {
            return epd::pair_priority(edges[i].u, edges[i].v, graph) == -1 ? 0 : 1;
        };
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            int ga = heterophilic(a), gb = heterophilic(b);
            if (ga != gb) return ga < gb;
            double wa = w(static_cast<Eigen::Index>(a)), wb = w(static_cast<Eigen::Index>(b));
            if (wa != wb) return wa < wb;
            return edges[a] < edges[b];
        });

        std::size_t r = std::min({per_epoch, max_removed - out.removed.size(), edges.size()});
        std::unordered_set<std::size_t> doomed(order.begin(),
                                               order.begin() + static_cast<long>(r));
        std::vector<Edge> kept;
        kept.reserve(edges.size() - r);
        for (std::size_t i = 0; i < edges.size(); ++i)
            (doomed.count(i) ? out.removed : kept).push_back(edges[i]);
        edges = std::move(kept);
    }

    out.truncated = out.removed.size() < max_removed;
    std::sort(out.removed.begin(), out.removed.end());
    if (!out.removed.empty())
        out.graph = remove_edges(graph, out.removed, PerturbMode::Aug, PlanSource::Lowrank);
    return out;
}

Soln2Result soln2_plan(const Graph& graph, const Soln2Params& params) {
    if (!(params.mod_fraction >= 0.0 && params.mod_fraction <= 1.0))
        throw ValidationError("modification fraction must be in [0, 1]");

    PerturbationPlan empty;
    empty.mode = params.mode;
    empty.source = params.mode == PerturbMode::Atk ? PlanSource::Bridge : PlanSource::Lowrank;
    if (params.budget == 0) return {graph, empty, empty};

    std::size_t mod_budget = static_cast<std::size_t>(
        static_cast<double>(params.budget) * params.mod_fraction);
    Graph modified = graph;
    std::vector<Edge> mod_removed;
    if (mod_budget > 0) {
        if (params.mode == PerturbMode::Atk) {
            BridgeModification bm =
                bridge_attack_modify(graph, mod_budget, params.seed, params.prefer_balanced);
            modified = std::move(bm.graph);
            mod_removed = std::move(bm.removed);
        } else {
            LowRankModification lm =
                lowrank_aug_modify(graph, params.scorer, mod_budget, params.seed);
            modified = std::move(lm.graph);
            mod_removed = std::move(lm.removed);
        }
    }

    // whatever the modification phase could not spend goes to the planner,
    // keeping the two solutions comparable at equal total budget
    epd::PlanParams plan_params;
    plan_params.mode = params.mode;
    plan_params.budget = params.budget - mod_removed.size();
    plan_params.seed = params.seed ^ 0x9e3779b97f4a7c15ULL;
    plan_params.add_ratio = params.add_ratio;
    plan_params.allow_single_labeled_endpoint = params.allow_single_labeled_endpoint;
    PerturbationPlan priority = epd::make_plan(modified, plan_params);

    std::unordered_set<Edge, EdgeHash> flips;
    auto toggle = [&](const Edge& e) {
        if (!flips.erase(e)) flips.insert(e);
    };
    for (const Edge& e : mod_removed) toggle(e);
    for (const Edge& e : priority.adds) toggle(e);
    for (const Edge& e : priority.removes) toggle(e);

    PerturbationPlan folded;
    folded.mode = params.mode;
    folded.source = params.mode == PerturbMode::Atk ? PlanSource::Bridge : PlanSource::Lowrank;
    folded.truncated = priority.truncated;
    for (const Edge& e : flips)
        (graph.has_edge(e.u, e.v) ? folded.removes : folded.adds).push_back(e);
    std::sort(folded.adds.begin(), folded.adds.end());
    std::sort(folded.removes.begin(), folded.removes.end());
    return {std::move(modified), std::move(priority), std::move(folded)};
}

} // namespace ep::targetmod
