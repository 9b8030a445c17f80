#include "edgeperturb/solver.hpp"

#include "edgeperturb/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace ep::solver {
namespace {

void check_config(const SolverConfig& config) {
    if (config.budget % 2 != 0)
        throw ValidationError("solver budget counts directed entries and must be even");
    if (!(config.zeta > 0.0 && config.zeta < 1.0))
        throw ValidationError("zeta must be in (0, 1)");
    if (!(config.rho > 0.0)) throw ValidationError("rho must be positive");
    if (!(config.eta > 0.0)) throw ValidationError("eta must be positive");
    if (config.outer_iters < 1 || config.inner_iters < 1)
        throw ValidationError("iteration counts must be at least 1");
}

/// Soft-threshold the offset from a0 after a gradient step of size `eta`.
Matrix proxed(const Matrix& a, const Matrix& a0, double eta, const Matrix& grad_f) {
    Matrix d = a - eta * grad_f - a0;
    Matrix shrunk = ((d.array().abs() - eta).max(0.0) * d.array().sign()).matrix();
    Matrix out = (a0 + shrunk).cwiseMax(0.0).cwiseMin(1.0);
    out = 0.5 * (out + out.transpose()).eval();
    out.diagonal().setZero();
    return out;
}

/// Train cross-entropy sum at a candidate adjacency, no backward pass.
double loss_only(const Matrix& a, const gnn::GnnModel& model, const Matrix& x,
                 const std::vector<int>& targets, const std::vector<NodeId>& train_nodes) {
    Matrix m = a;
    m.diagonal().array() += 1.0;
    Vector s = m.rowwise().sum().cwiseMax(1e-300).array().rsqrt().matrix();
    Matrix a_hat = s.asDiagonal() * m * s.asDiagonal();
    Matrix z = a_hat * (a_hat * (x * model.w0)).cwiseMax(0.0) * model.w1;
    double loss = 0.0;
    for (NodeId v : train_nodes) {
        Eigen::Index row = static_cast<Eigen::Index>(v);
        Vector shifted =
            (z.row(row).transpose().array() - z.row(row).maxCoeff()).matrix();
        Vector p = shifted.array().exp().matrix();
        p /= p.sum();
        loss -= std::log(std::max(p(targets[v]), 1e-300));
    }
    return loss;
}

/// Loss and adjacency gradient with the dense feature matrix prebuilt;
/// the public wrapper and solve() both land here.
AdjGrad grad_core(const Matrix& a, const gnn::GnnModel& model, const Matrix& x,
                  const std::vector<int>& targets, const std::vector<NodeId>& train_nodes) {
    const Eigen::Index n = a.rows();

    // a_hat = S (A + I) S with S = diag(rowsum^{-1/2})
    Matrix m = a;
    m.diagonal().array() += 1.0;
    Vector s = m.rowwise().sum().cwiseMax(1e-300).array().rsqrt().matrix();
    Matrix a_hat = s.asDiagonal() * m * s.asDiagonal();

    Matrix xw0 = x * model.w0;                 // N x H
    Matrix pre1 = a_hat * xw0;                 // N x H
    Matrix h1 = pre1.cwiseMax(0.0);
    Matrix hw1 = h1 * model.w1;                // N x C
    Matrix z = a_hat * hw1;                    // N x C

    const Eigen::Index classes = z.cols();
    Matrix dz = Matrix::Zero(n, classes);
    double loss = 0.0;
    for (NodeId v : train_nodes) {
        Eigen::Index row = static_cast<Eigen::Index>(v);
        Vector shifted =
            (z.row(row).transpose().array() - z.row(row).maxCoeff()).matrix();
        Vector p = shifted.array().exp().matrix();
        p /= p.sum();
        int y = targets[v];
        loss -= std::log(std::max(p(y), 1e-300));
        dz.row(row) = p.transpose();
        dz(row, y) -= 1.0;
    }

    // z = a_hat hw1 and pre1 = a_hat xw0 both touch a_hat
    Matrix d_ahat = dz * hw1.transpose();
    Matrix dpre1 = (a_hat.transpose() * dz * model.w1.transpose())
                       .cwiseProduct((pre1.array() > 0.0).cast<double>().matrix());
    d_ahat += dpre1 * xw0.transpose();

    // through the normalization: dM = S dAhat S + u 1ᵀ, where row k's shared
    // term comes from s_k depending on the whole row sum
    Matrix dm = s.asDiagonal() * d_ahat * s.asDiagonal();
    Matrix dam = d_ahat.cwiseProduct(m);
    Vector u =
        ((-0.5) * s.array().cube() * (dam * s + dam.transpose() * s).array()).matrix();
    dm.colwise() += u;

    AdjGrad out;
    out.loss = loss;
    out.grad = 0.5 * (dm + dm.transpose());
    out.grad.diagonal().setZero();
    return out;
}

} // namespace

std::string trace_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream out;
    out << "iter,L,gap,F,lambda\n";
    for (const TraceRow& row : trace)
        out << row.iter << ',' << io::format_double(row.loss) << ','
            << io::format_double(row.gap) << ',' << io::format_double(row.lagrangian) << ','
            << io::format_double(row.lambda) << '\n';
    return out.str();
}

AttackTargets attack_targets(const Graph& graph, const gnn::GnnModel& model) {
    if (model.num_classes() < 2)
        throw ValidationError("attack targets need at least 2 classes");
    Matrix z = gnn::forward(model, graph);
    AttackTargets out;
    out.target.assign(graph.num_nodes(), -1);
    for (NodeId v : graph.nodes_with_tag(SplitTag::Train)) {
        Eigen::Index row = static_cast<Eigen::Index>(v);
        int best = -1;
        double best_score = -std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < z.cols(); ++c) {
            if (static_cast<int>(c) == graph.label(v)) continue;
            if (z(row, c) > best_score) {
                best_score = z(row, c);
                best = static_cast<int>(c);
            }
        }
        out.target[v] = best;
    }
    return out;
}

SolverState init_state(const Graph& graph, const SolverConfig& config) {
    check_config(config);
    if (graph.num_nodes() > kDenseNodeCap)
        throw ValidationError(
            "graph exceeds the dense solver cap; use the priority or "
            "target-guided paths instead");
    SolverState state;
    state.a0 = graph.dense_adjacency();
    state.a = state.a0;
    state.lambda = 0.0;
    return state;
}

AdjGrad loss_and_grad_adj(const SolverState& state, const gnn::GnnModel& model,
                          const Graph& graph, const std::vector<int>& targets) {
    if (model.kind != gnn::ModelKind::Gcn2)
        throw ValidationError("the relaxation differentiates the 2-layer gcn only");
    if (!graph.has_features()) throw ValidationError("solver needs node features");
    return grad_core(state.a, model, graph.features().to_dense(), targets,
                     graph.nodes_with_tag(SplitTag::Train));
}

double constraint_gap(const SolverState& state, const SolverConfig& config) {
    return (state.a - state.a0).cwiseAbs().sum() - static_cast<double>(config.budget);
}

double lagrangian(const SolverState& state, const SolverConfig& config, double loss) {
    double g = constraint_gap(state, config);
    return loss + state.lambda * g + 0.5 * config.rho * g * g;
}

void prox_step(SolverState& state, const SolverConfig& config, const Matrix& grad_f) {
    state.a = proxed(state.a, state.a0, config.eta, grad_f);
}

void multiplier_update(SolverState& state, const SolverConfig& config) {
    state.lambda += config.rho * constraint_gap(state, config);
}

PerturbationPlan binarize(const SolverState& state, const SolverConfig& config) {
    struct Mover {
        double score;
        Edge edge;
    };
    std::vector<Mover> movers;
    const Eigen::Index n = state.a.rows();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double s = std::abs(state.a(i, j) - state.a0(i, j));
            if (s >= config.zeta)
                movers.push_back({s, Edge(static_cast<NodeId>(i), static_cast<NodeId>(j))});
        }
    std::sort(movers.begin(), movers.end(), [](const Mover& a, const Mover& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.edge < b.edge;
    });
    std::size_t cap = config.budget / 2;
    if (movers.size() > cap) movers.resize(cap);

    PerturbationPlan plan;
    plan.mode = config.mode;
    plan.source = PlanSource::Solver;
    for (const Mover& m : movers)
        (state.a0(m.edge.u, m.edge.v) > 0.5 ? plan.removes : plan.adds).push_back(m.edge);
    std::sort(plan.adds.begin(), plan.adds.end());
    std::sort(plan.removes.begin(), plan.removes.end());
    return plan;
}

SolveResult solve(const Graph& graph, const gnn::GnnModel& model, const SolverConfig& config) {
    if (model.kind != gnn::ModelKind::Gcn2)
        throw ValidationError("the relaxation differentiates the 2-layer gcn only");
    if (!graph.has_features()) throw ValidationError("solver needs node features");
    if (graph.num_nodes() > 0 &&
        graph.features().cols() != model.w0.rows())
        throw ValidationError("model feature dim does not match the graph");

    SolverState state = init_state(graph, config);
    const std::vector<NodeId> train_nodes = graph.nodes_with_tag(SplitTag::Train);
    std::vector<int> targets;
    if (config.mode == PerturbMode::Atk)
        targets = attack_targets(graph, model).target;
    else
        targets = graph.labels();

    const Matrix x = graph.features().to_dense();
    const Eigen::Index n = state.a.rows();
    Matrix mask = Matrix::Zero(n, n);
    for (NodeId i : train_nodes)
        for (NodeId j : train_nodes)
            if (i != j) mask(i, j) = 1.0;

    int iter = 0;
    for (int outer = 0; outer < config.outer_iters; ++outer) {
        for (int inner = 0; inner < config.inner_iters; ++inner) {
            AdjGrad ag = grad_core(state.a, model, x, targets, train_nodes);
            if (!std::isfinite(ag.loss))
                throw SolverError("non-finite loss at iteration " + std::to_string(iter),
                                  state.trace);
            double g = constraint_gap(state, config);
            double f = ag.loss + state.lambda * g + 0.5 * config.rho * g * g;
            state.trace.push_back({iter, ag.loss, g, f, state.lambda});

            // multiplier terms enter through their ell-1 subgradient; the
            // prox adds its own unit shrinkage on top
            Matrix grad_f =
                ag.grad + (state.lambda + config.rho * g) * (state.a - state.a0).array().sign().matrix();
            grad_f = grad_f.cwiseProduct(mask);

            // backtracking acceptance: the penalty gradient scales with the
            // gap, so a fixed step overshoots the box and cycles. Halve the
            // step until the lagrangian at the current multiplier drops; an
            // iteration with no acceptable step leaves the state in place.
            double step = config.eta;
            for (int halve = 0; halve < 30; ++halve, step *= 0.5) {
                Matrix cand = proxed(state.a, state.a0, step, grad_f);
                double g_new =
                    (cand - state.a0).cwiseAbs().sum() - static_cast<double>(config.budget);
                double f_new = loss_only(cand, model, x, targets, train_nodes) +
                               state.lambda * g_new + 0.5 * config.rho * g_new * g_new;
                if (std::isfinite(f_new) && f_new < f) {
                    state.a = std::move(cand);
                    break;
                }
            }
            ++iter;
        }
        multiplier_update(state, config);
    }

    SolveResult out;
    out.plan = binarize(state, config);
    out.trace = state.trace;
    out.state = std::move(state);
    return out;
}

} // namespace ep::solver
