#ifndef EDGEPERTURB_TYPES_HPP
#define EDGEPERTURB_TYPES_HPP

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <cstdint>
#include <functional>

namespace ep {

using NodeId = std::uint32_t;

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Unordered node pair stored canonically with u < v.
struct Edge {
    NodeId u = 0;
    NodeId v = 0;

    Edge() = default;
    Edge(NodeId a, NodeId b) : u(a < b ? a : b), v(a < b ? b : a) {}

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct EdgeHash {
    std::size_t operator()(const Edge& e) const noexcept {
        return std::hash<std::uint64_t>{}((std::uint64_t(e.u) << 32) | e.v);
    }
};

enum class SplitTag : std::uint8_t { None, Train, Val, Test };

enum class PerturbMode : std::uint8_t { Aug, Atk };

enum class PlanSource : std::uint8_t { Priority, Bridge, Lowrank, Solver };

inline const char* to_string(PerturbMode m) { return m == PerturbMode::Aug ? "aug" : "atk"; }

inline const char* to_string(PlanSource s) {
    switch (s) {
    case PlanSource::Priority: return "priority";
    case PlanSource::Bridge: return "bridge";
    case PlanSource::Lowrank: return "lowrank";
    case PlanSource::Solver: return "solver";
    }
    return "?";
}

} // namespace ep

#endif
