#ifndef EDGEPERTURB_GNN_HPP
#define EDGEPERTURB_GNN_HPP

#include "edgeperturb/errors.hpp"
#include "edgeperturb/graph.hpp"

#include <string>
#include <vector>

namespace ep::gnn {

enum class ModelKind : std::uint8_t { Gcn2, Sgc };

ModelKind parse_model_kind(const std::string& name);
const char* to_string(ModelKind kind);

struct Hyper {
    double learning_rate = 0.01;
    double weight_decay = 5e-4;  // applied to the first layer only
    int epochs = 100;
    int hidden = 16;
    double dropout = 0.5;
    int sgc_k = 2;

    /// Conventional settings per kind: sgc swaps in lr 0.2, no dropout.
    static Hyper defaults(ModelKind kind);
};

struct GnnModel {
    ModelKind kind = ModelKind::Gcn2;
    Hyper hyper;
    Matrix w0;  // F x H (gcn2) or F x C (sgc, w1 stays empty)
    Matrix w1;  // H x C
    std::uint64_t init_seed = 0;

    int num_classes() const {
        return int(kind == ModelKind::Gcn2 ? w1.cols() : w0.cols());
    }
};

struct TrainRecord {
    int epoch = 0;
    double loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct TrainResult {
    GnnModel model;
    std::vector<TrainRecord> history;
};

struct DivergenceError : NumericalError {
    DivergenceError(const std::string& msg, std::vector<TrainRecord> hist)
        : NumericalError(msg), history(std::move(hist)) {}
    std::vector<TrainRecord> history;
};

/// D̃^{-1/2}(A+I)D̃^{-1/2}; an isolated node's row reduces to the self-loop 1.
SparseMatrix normalize_adjacency(const Graph& graph);

/// Glorot-uniform initialized weights for the graph's feature and class
/// dimensions.
GnnModel init_model(ModelKind kind, Eigen::Index feature_dim, int num_classes,
                    const Hyper& hyper, std::uint64_t seed);

/// Logits: gcn2 = Â·ReLU(Â·X·W0)·W1; sgc = Â^k·X·W.
Matrix forward(const GnnModel& model, const SparseMatrix& a_hat, const Matrix& x);
Matrix forward(const GnnModel& model, const Graph& graph);

struct ParamGrads {
    double loss = 0.0;  // mean train cross-entropy + L2 term
    Matrix dw0;
    Matrix dw1;
};

/// Loss and analytic parameter gradients, dropout off. Exposed so gradient
/// checks can hit the same code path training uses.
ParamGrads loss_and_param_grads(const GnnModel& model, const SparseMatrix& a_hat,
                                const Matrix& x, const std::vector<int>& labels,
                                const std::vector<NodeId>& train_nodes);

/// Full-batch Adam on train cross-entropy, manual backprop, seeded dropout.
/// Throws DivergenceError (history attached) on non-finite loss.
TrainResult train(const GnnModel& model, const Graph& graph, std::uint64_t seed);

double accuracy_from_logits(const Matrix& logits, const std::vector<int>& labels,
                            const std::vector<NodeId>& nodes);

/// Fraction of the split's nodes whose argmax logit matches the label.
double evaluate(const GnnModel& model, const Graph& graph, SplitTag which);

/// Versioned binary checkpoint (layout documented in the README).
void save_model(const GnnModel& model, const std::string& path);
GnnModel load_model(const std::string& path);

/// "epoch,loss,train_acc,val_acc" CSV with header.
void write_history(const std::vector<TrainRecord>& history, const std::string& path);

} // namespace ep::gnn

#endif
