#ifndef EDGEPERTURB_IO_HPP
#define EDGEPERTURB_IO_HPP

#include "edgeperturb/graph.hpp"

#include <iosfwd>
#include <string>

namespace ep::io {

/// File bundle describing one dataset on disk. Empty strings mark absent
/// optional parts (labels, features, split).
struct DatasetPaths {
    std::string edges;
    std::string labels;
    std::string features;
    std::string split;
};

/// Loads a dataset. Node ids must be dense in [0,N); N is the smallest count
/// covering every id seen (dense feature files pin it to their row count).
/// Duplicate or reversed edge lines are symmetrized away with a warning on
/// `warn`; self-loops and malformed lines throw ParseError with a line number.
Graph load_graph(const DatasetPaths& paths, std::ostream* warn = nullptr);

/// Writes the graph back out in the same formats load_graph reads, with
/// enough float precision that load(save(g)) == g.
void save_graph(const Graph& graph, const DatasetPaths& paths);

/// Plan files: header "mode=<aug|atk> source=<...>", then "+ u v" / "- u v".
PerturbationPlan read_plan(const std::string& path);
void write_plan(const PerturbationPlan& plan, const std::string& path);

/// Shortest decimal string that round-trips the exact double.
std::string format_double(double x);

struct ConvertStats {
    NodeId num_nodes = 0;
    std::size_t num_edges = 0;
    int num_classes = 0;
};

/// Remaps arbitrary node tokens (and class tokens) to dense ids, writing the
/// standard formats plus a "token id" mapping file. Node ids are assigned by
/// first appearance: edge file order, then labels, split, features. A dense
/// CSV feature file is copied through unchanged since its rows are already
/// index-addressed.
ConvertStats convert_dataset(const DatasetPaths& raw, const DatasetPaths& out,
                             const std::string& node_map_path,
                             const std::string& class_map_path);

/// Doubles formatted for exact text round-trips; shared by every writer so
/// identical runs produce identical bytes.
std::string format_double(double x);

} // namespace ep::io

#endif
