#include "edgeperturb/gnn.hpp"

#include "edgeperturb/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>

namespace ep::gnn {

ModelKind parse_model_kind(const std::string& name) {
    if (name == "gcn2") return ModelKind::Gcn2;
    if (name == "sgc") return ModelKind::Sgc;
    throw ValidationError("unknown model kind '" + name + "' (expected gcn2 or sgc)");
}

const char* to_string(ModelKind kind) { return kind == ModelKind::Gcn2 ? "gcn2" : "sgc"; }

Hyper Hyper::defaults(ModelKind kind) {
    Hyper h;
    if (kind == ModelKind::Sgc) {
        h.learning_rate = 0.2;
        h.dropout = 0.0;
        h.weight_decay = 1e-5;
    }
    return h;
}

SparseMatrix normalize_adjacency(const Graph& graph) {
    NodeId n = graph.num_nodes();
    Vector s(n);
    for (NodeId u = 0; u < n; ++u) s(u) = 1.0 / std::sqrt(double(graph.degree(u)) + 1.0);

    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(2 * graph.num_edges() + n);
    for (NodeId u = 0; u < n; ++u) entries.emplace_back(u, u, s(u) * s(u));
    for (const auto& e : graph.edges()) {
        double w = s(e.u) * s(e.v);
        entries.emplace_back(e.u, e.v, w);
        entries.emplace_back(e.v, e.u, w);
    }
    SparseMatrix a_hat(n, n);
    a_hat.setFromTriplets(entries.begin(), entries.end());
    a_hat.makeCompressed();
    return a_hat;
}

GnnModel init_model(ModelKind kind, Eigen::Index feature_dim, int num_classes,
                    const Hyper& hyper, std::uint64_t seed) {
    if (feature_dim < 1) throw ValidationError("model needs at least one feature");
    if (num_classes < 2) throw ValidationError("model needs at least two classes");
    if (kind == ModelKind::Gcn2 && hyper.hidden < 1)
        throw ValidationError("hidden width must be positive");
    if (kind == ModelKind::Sgc && hyper.sgc_k < 1)
        throw ValidationError("sgc propagation depth must be positive");

    std::mt19937_64 rng(seed);
    auto glorot = [&rng](Eigen::Index rows, Eigen::Index cols) {
        double limit = std::sqrt(6.0 / double(rows + cols));
        std::uniform_real_distribution<double> u(-limit, limit);
        Matrix w(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = u(rng);
        return w;
    };

    GnnModel model;
    model.kind = kind;
    model.hyper = hyper;
    model.init_seed = seed;
    if (kind == ModelKind::Gcn2) {
        model.w0 = glorot(feature_dim, hyper.hidden);
        model.w1 = glorot(hyper.hidden, num_classes);
    } else {
        model.w0 = glorot(feature_dim, num_classes);
    }
    return model;
}

namespace {

Matrix propagate(const SparseMatrix& a_hat, Matrix x, int k) {
    for (int i = 0; i < k; ++i) x = a_hat * x;
    return x;
}

Matrix softmax_rows(const Matrix& z) {
    Matrix p = (z.colwise() - z.rowwise().maxCoeff()).array().exp();
    return p.array().colwise() / p.rowwise().sum().array();
}

/// Mean cross-entropy over the given nodes and the dL/dZ rows that go with
/// it; rows of other nodes stay zero.
std::pair<double, Matrix> ce_and_dz(const Matrix& z, const std::vector<int>& labels,
                                    const std::vector<NodeId>& nodes) {
    Matrix p = softmax_rows(z);
    Matrix dz = Matrix::Zero(z.rows(), z.cols());
    double loss = 0.0;
    double inv = 1.0 / double(nodes.size());
    for (NodeId u : nodes) {
        int y = labels[u];
        loss -= std::log(std::max(p(u, y), 1e-300)) * inv;
        dz.row(u) = p.row(u) * inv;
        dz(u, y) -= inv;
    }
    return {loss, std::move(dz)};
}

struct EpochGrads {
    double loss = 0.0;
    Matrix dw0, dw1;
};

/// Shared forward+backward for gcn2. x_used must already carry any input
/// dropout; h_scale (0 or 1/keep per entry) applies hidden dropout, empty =
/// off.
EpochGrads gcn2_grads(const GnnModel& model, const SparseMatrix& a_hat, const Matrix& x_used,
                      const Matrix& h_scale, const std::vector<int>& labels,
                      const std::vector<NodeId>& train_nodes) {
    const Matrix p0 = a_hat * (x_used * model.w0);
    const Matrix h1 = p0.cwiseMax(0.0);
    const Matrix h1_used = h_scale.size() ? h1.cwiseProduct(h_scale).eval() : h1;
    const Matrix z = a_hat * (h1_used * model.w1);

    auto [ce, dz] = ce_and_dz(z, labels, train_nodes);
    EpochGrads g;
    g.loss = ce + 0.5 * model.hyper.weight_decay * model.w0.squaredNorm();

    const Matrix gz = a_hat * dz;  // Â is symmetric
    g.dw1 = h1_used.transpose() * gz;
    Matrix dh1 = gz * model.w1.transpose();
    if (h_scale.size()) dh1 = dh1.cwiseProduct(h_scale);
    const Matrix dp0 = dh1.cwiseProduct((p0.array() > 0.0).cast<double>().matrix());
    const Matrix g0 = a_hat * dp0;
    g.dw0 = x_used.transpose() * g0 + model.hyper.weight_decay * model.w0;
    return g;
}

EpochGrads sgc_grads(const GnnModel& model, const Matrix& propagated,
                     const std::vector<int>& labels, const std::vector<NodeId>& train_nodes) {
    const Matrix z = propagated * model.w0;
    auto [ce, dz] = ce_and_dz(z, labels, train_nodes);
    EpochGrads g;
    g.loss = ce + 0.5 * model.hyper.weight_decay * model.w0.squaredNorm();
    g.dw0 = propagated.transpose() * dz + model.hyper.weight_decay * model.w0;
    return g;
}

struct AdamState {
    Matrix m, v;
    explicit AdamState(const Matrix& shape)
        : m(Matrix::Zero(shape.rows(), shape.cols())),
          v(Matrix::Zero(shape.rows(), shape.cols())) {}

    void step(Matrix& w, const Matrix& grad, double lr, int t) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
        double correct1 = 1.0 - std::pow(b1, t);
        double correct2 = 1.0 - std::pow(b2, t);
        w.array() -= lr * (m.array() / correct1) / ((v.array() / correct2).sqrt() + eps);
    }
};

} // namespace

Matrix forward(const GnnModel& model, const SparseMatrix& a_hat, const Matrix& x) {
    if (x.cols() != model.w0.rows())
        throw ValidationError("feature dim " + std::to_string(x.cols()) +
                              " does not match model input dim " +
                              std::to_string(model.w0.rows()));
    if (a_hat.rows() != x.rows())
        throw ValidationError("adjacency and feature row counts differ");
    if (model.kind == ModelKind::Gcn2)
        return a_hat * ((a_hat * (x * model.w0)).cwiseMax(0.0) * model.w1);
    return propagate(a_hat, x, model.hyper.sgc_k) * model.w0;
}

Matrix forward(const GnnModel& model, const Graph& graph) {
    if (!graph.has_features()) throw ValidationError("graph has no features");
    return forward(model, normalize_adjacency(graph), graph.features().to_dense());
}

ParamGrads loss_and_param_grads(const GnnModel& model, const SparseMatrix& a_hat,
                                const Matrix& x, const std::vector<int>& labels,
                                const std::vector<NodeId>& train_nodes) {
    if (train_nodes.empty()) throw ValidationError("empty train set");
    EpochGrads g = model.kind == ModelKind::Gcn2
                       ? gcn2_grads(model, a_hat, x, Matrix{}, labels, train_nodes)
                       : sgc_grads(model, propagate(a_hat, x, model.hyper.sgc_k), labels,
                                   train_nodes);
    return {g.loss, std::move(g.dw0), std::move(g.dw1)};
}

double accuracy_from_logits(const Matrix& logits, const std::vector<int>& labels,
                            const std::vector<NodeId>& nodes) {
    if (nodes.empty()) throw ValidationError("accuracy over an empty node set");
    std::size_t hits = 0;
    for (NodeId u : nodes) {
        Eigen::Index best = 0;
        logits.row(u).maxCoeff(&best);
        if (int(best) == labels[u]) ++hits;
    }
    return double(hits) / double(nodes.size());
}

TrainResult train(const GnnModel& model0, const Graph& graph, std::uint64_t seed) {
    if (!graph.has_features()) throw ValidationError("training needs node features");
    std::vector<NodeId> train_nodes = graph.nodes_with_tag(SplitTag::Train);
    std::vector<NodeId> val_nodes = graph.nodes_with_tag(SplitTag::Val);
    if (train_nodes.empty()) throw ValidationError("training needs a nonempty train split");
    if (graph.num_classes() > model0.num_classes())
        throw ValidationError("graph has more classes than the model");

    const SparseMatrix a_hat = normalize_adjacency(graph);
    const Matrix x = graph.features().to_dense();
    const std::vector<int>& labels = graph.labels();
    const Hyper& hyper = model0.hyper;

    GnnModel model = model0;
    TrainResult result;
    std::mt19937_64 rng(seed ^ 0x517cc1b727220a95ULL);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    AdamState adam0(model.w0);
    AdamState adam1(model.kind == ModelKind::Gcn2 ? model.w1 : Matrix::Zero(0, 0));

    // sgc propagation does not depend on the weights; hoist it
    const Matrix propagated = model.kind == ModelKind::Sgc
                                  ? propagate(a_hat, x, hyper.sgc_k)
                                  : Matrix{};

    const double keep = 1.0 - hyper.dropout;
    if (keep <= 0.0 || keep > 1.0) throw ValidationError("dropout must be in [0,1)");

    for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
        EpochGrads grads;
        if (model.kind == ModelKind::Gcn2) {
            Matrix x_used = x;
            Matrix h_scale;
            if (hyper.dropout > 0.0) {
                for (Eigen::Index i = 0; i < x_used.rows(); ++i)
                    for (Eigen::Index j = 0; j < x_used.cols(); ++j)
                        x_used(i, j) = unit(rng) < hyper.dropout ? 0.0 : x_used(i, j) / keep;
                h_scale = Matrix(x.rows(), hyper.hidden);
                for (Eigen::Index i = 0; i < h_scale.rows(); ++i)
                    for (Eigen::Index j = 0; j < h_scale.cols(); ++j)
                        h_scale(i, j) = unit(rng) < hyper.dropout ? 0.0 : 1.0 / keep;
            }
            grads = gcn2_grads(model, a_hat, x_used, h_scale, labels, train_nodes);
        } else {
            grads = sgc_grads(model, propagated, labels, train_nodes);
        }

        if (!std::isfinite(grads.loss))
            throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch),
                                  std::move(result.history));

        adam0.step(model.w0, grads.dw0, hyper.learning_rate, epoch);
        if (model.kind == ModelKind::Gcn2)
            adam1.step(model.w1, grads.dw1, hyper.learning_rate, epoch);

        // dropout-free evaluation pass for the history record
        Matrix logits = model.kind == ModelKind::Gcn2 ? forward(model, a_hat, x)
                                                      : propagated * model.w0;
        TrainRecord rec;
        rec.epoch = epoch;
        rec.loss = grads.loss;
        rec.train_acc = accuracy_from_logits(logits, labels, train_nodes);
        rec.val_acc = val_nodes.empty()
                          ? std::numeric_limits<double>::quiet_NaN()
                          : accuracy_from_logits(logits, labels, val_nodes);
        result.history.push_back(rec);
    }

    if (!model.w0.allFinite() || (model.w1.size() && !model.w1.allFinite()))
        throw DivergenceError("non-finite weights after training", std::move(result.history));

    result.model = std::move(model);
    return result;
}

double evaluate(const GnnModel& model, const Graph& graph, SplitTag which) {
    std::vector<NodeId> nodes = graph.nodes_with_tag(which);
    if (nodes.empty()) throw ValidationError("evaluation split is empty");
    return accuracy_from_logits(forward(model, graph), graph.labels(), nodes);
}

namespace {

constexpr char kMagic[8] = {'E', 'P', 'G', 'N', 'N', 'C', 'K', 'P'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::ifstream& in, const std::string& path) {
    T value{};
    if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
        throw ValidationError(path + ": truncated checkpoint");
    return value;
}

void put_matrix(std::ofstream& out, const Matrix& m) {
    put<std::int64_t>(out, m.rows());
    put<std::int64_t>(out, m.cols());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) put<double>(out, m(i, j));
}

Matrix get_matrix(std::ifstream& in, const std::string& path) {
    auto rows = get<std::int64_t>(in, path);
    auto cols = get<std::int64_t>(in, path);
    if (rows < 0 || cols < 0 || rows * cols > (1ll << 31))
        throw ValidationError(path + ": implausible matrix shape in checkpoint");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = get<double>(in, path);
    return m;
}

} // namespace

void save_model(const GnnModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    put<std::uint32_t>(out, kVersion);
    put<std::uint8_t>(out, model.kind == ModelKind::Gcn2 ? 0 : 1);
    put<double>(out, model.hyper.learning_rate);
    put<double>(out, model.hyper.weight_decay);
    put<std::int32_t>(out, model.hyper.epochs);
    put<std::int32_t>(out, model.hyper.hidden);
    put<double>(out, model.hyper.dropout);
    put<std::int32_t>(out, model.hyper.sgc_k);
    put<std::uint64_t>(out, model.init_seed);
    put_matrix(out, model.w0);
    put_matrix(out, model.w1);
}

GnnModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw ValidationError(path + ": not a model checkpoint");
    auto version = get<std::uint32_t>(in, path);
    if (version != kVersion)
        throw ValidationError(path + ": unsupported checkpoint version " +
                              std::to_string(version));
    GnnModel model;
    auto kind = get<std::uint8_t>(in, path);
    if (kind > 1) throw ValidationError(path + ": unknown model kind byte");
    model.kind = kind == 0 ? ModelKind::Gcn2 : ModelKind::Sgc;
    model.hyper.learning_rate = get<double>(in, path);
    model.hyper.weight_decay = get<double>(in, path);
    model.hyper.epochs = get<std::int32_t>(in, path);
    model.hyper.hidden = get<std::int32_t>(in, path);
    model.hyper.dropout = get<double>(in, path);
    model.hyper.sgc_k = get<std::int32_t>(in, path);
    model.init_seed = get<std::uint64_t>(in, path);
    model.w0 = get_matrix(in, path);
    model.w1 = get_matrix(in, path);
    return model;
}

void write_history(const std::vector<TrainRecord>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "epoch,loss,train_acc,val_acc\n";
    for (const auto& rec : history)
        out << rec.epoch << ',' << io::format_double(rec.loss) << ','
            << io::format_double(rec.train_acc) << ',' << io::format_double(rec.val_acc)
            << '\n';
}

} // namespace ep::gnn
