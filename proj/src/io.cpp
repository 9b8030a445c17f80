#include "edgeperturb/io.hpp"

#include "edgeperturb/errors.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ep::io {

namespace {

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    return out;
}

/// Strips '#' comments and surrounding whitespace; empty result = skip line.
std::string strip_line(const std::string& raw) {
    std::string s = raw.substr(0, raw.find('#'));
    auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_ws(const std::string& line) {
    std::istringstream ss(line);
    std::vector<std::string> out;
    for (std::string tok; ss >> tok;) out.push_back(std::move(tok));
    return out;
}

NodeId parse_node(const std::string& tok, const std::string& file, std::size_t line) {
    NodeId value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(file, line, "expected node id, got '" + tok + "'");
    return value;
}

int parse_int(const std::string& tok, const std::string& file, std::size_t line) {
    int value{};
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(file, line, "expected integer, got '" + tok + "'");
    return value;
}

double parse_real(const std::string& tok, const std::string& file, std::size_t line) {
    try {
        std::size_t used = 0;
        double value = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        return value;
    } catch (const std::exception&) {
        throw ParseError(file, line, "expected number, got '" + tok + "'");
    }
}

/// Iterates content lines, handing each to fn(stripped_line, line_number).
template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in = open_input(path);
    std::string raw;
    for (std::size_t line = 1; std::getline(in, raw); ++line) {
        std::string s = strip_line(raw);
        if (!s.empty()) fn(s, line);
    }
}

struct RawDataset {
    std::vector<Edge> edges;
    std::size_t duplicate_edge_lines = 0;
    std::unordered_map<NodeId, int> labels;
    std::unordered_map<NodeId, SplitTag> split;
    bool dense_features = false;
    std::vector<std::vector<double>> dense_rows;
    std::vector<Eigen::Triplet<double>> sparse_entries;
    NodeId max_id_seen = 0;  // valid only when any_id true
    bool any_id = false;
    Eigen::Index feature_cols = 0;

    void see(NodeId u) {
        max_id_seen = any_id ? std::max(max_id_seen, u) : u;
        any_id = true;
    }
};

void read_edges(const std::string& path, RawDataset& d) {
    std::unordered_set<Edge, EdgeHash> seen;
    for_each_line(path, [&](const std::string& s, std::size_t line) {
        auto toks = split_ws(s);
        if (toks.size() != 2)
            throw ParseError(path, line, "expected 'u v', got " + std::to_string(toks.size()) +
                                             " fields");
        NodeId u = parse_node(toks[0], path, line);
        NodeId v = parse_node(toks[1], path, line);
        if (u == v) throw ParseError(path, line, "self-loop at node " + std::to_string(u));
        d.see(u);
        d.see(v);
        Edge e(u, v);
        if (!seen.insert(e).second) {
            ++d.duplicate_edge_lines;
            return;
        }
        d.edges.push_back(e);
    });
}

void read_labels(const std::string& path, RawDataset& d) {
    for_each_line(path, [&](const std::string& s, std::size_t line) {
        auto toks = split_ws(s);
        if (toks.size() != 2) throw ParseError(path, line, "expected 'node_id class_id'");
        NodeId u = parse_node(toks[0], path, line);
        int c = parse_int(toks[1], path, line);
        if (c < 0) throw ParseError(path, line, "negative class id");
        d.see(u);
        auto [it, fresh] = d.labels.emplace(u, c);
        if (!fresh && it->second != c)
            throw ParseError(path, line, "conflicting label for node " + std::to_string(u));
    });
}

void read_split(const std::string& path, RawDataset& d) {
    for_each_line(path, [&](const std::string& s, std::size_t line) {
        auto toks = split_ws(s);
        if (toks.size() != 2) throw ParseError(path, line, "expected 'node_id train|val|test'");
        NodeId u = parse_node(toks[0], path, line);
        SplitTag tag;
        if (toks[1] == "train") tag = SplitTag::Train;
        else if (toks[1] == "val") tag = SplitTag::Val;
        else if (toks[1] == "test") tag = SplitTag::Test;
        else throw ParseError(path, line, "unknown split tag '" + toks[1] + "'");
        d.see(u);
        auto [it, fresh] = d.split.emplace(u, tag);
        if (!fresh && it->second != tag)
            throw ParseError(path, line, "conflicting split tag for node " + std::to_string(u));
    });
}

void read_features(const std::string& path, RawDataset& d) {
    bool detected = false;
    for_each_line(path, [&](const std::string& s, std::size_t line) {
        if (!detected) {
            // sparse rows carry "idx:val" fields; dense CSV never contains ':'
            d.dense_features = s.find(':') == std::string::npos;
            detected = true;
        }
        if (d.dense_features) {
            std::vector<double> row;
            std::stringstream ss(s);
            for (std::string cell; std::getline(ss, cell, ',');) {
                std::string t = strip_line(cell);
                if (t.empty()) throw ParseError(path, line, "empty CSV cell");
                row.push_back(parse_real(t, path, line));
            }
            if (!d.dense_rows.empty() && row.size() != d.dense_rows.front().size())
                throw ParseError(path, line, "ragged CSV row");
            d.dense_rows.push_back(std::move(row));
        } else {
            auto toks = split_ws(s);
            NodeId u = parse_node(toks[0], path, line);
            d.see(u);
            for (std::size_t i = 1; i < toks.size(); ++i) {
                auto colon = toks[i].find(':');
                if (colon == std::string::npos)
                    throw ParseError(path, line, "expected idx:val, got '" + toks[i] + "'");
                int idx = parse_int(toks[i].substr(0, colon), path, line);
                double val = parse_real(toks[i].substr(colon + 1), path, line);
                if (idx < 0) throw ParseError(path, line, "negative feature index");
                d.feature_cols = std::max<Eigen::Index>(d.feature_cols, idx + 1);
                d.sparse_entries.emplace_back(u, idx, val);
            }
        }
    });
}

} // namespace

Graph load_graph(const DatasetPaths& paths, std::ostream* warn) {
    if (paths.edges.empty()) throw ValidationError("edge file path is required");
    RawDataset d;
    read_edges(paths.edges, d);
    if (!paths.labels.empty()) read_labels(paths.labels, d);
    if (!paths.split.empty()) read_split(paths.split, d);
    if (!paths.features.empty()) read_features(paths.features, d);

    NodeId n = d.any_id ? d.max_id_seen + 1 : 0;
    if (d.dense_features) n = std::max<NodeId>(n, d.dense_rows.size());

    if (d.duplicate_edge_lines > 0) {
        std::ostream& out = warn ? *warn : std::cerr;
        out << "warning: " << paths.edges << ": " << d.duplicate_edge_lines
            << " duplicate/reversed edge line(s) symmetrized away\n";
    }

    std::shared_ptr<const FeatureMatrix> features;
    if (d.dense_features) {
        Eigen::Index cols = d.dense_rows.empty() ? 0 : Eigen::Index(d.dense_rows.front().size());
        Matrix x(d.dense_rows.size(), cols);
        for (std::size_t i = 0; i < d.dense_rows.size(); ++i)
            for (Eigen::Index j = 0; j < cols; ++j) x(i, j) = d.dense_rows[i][j];
        features = std::make_shared<const FeatureMatrix>(std::move(x));
    } else if (!d.sparse_entries.empty()) {
        features = std::make_shared<const FeatureMatrix>(
            FeatureMatrix::from_triplets(n, d.feature_cols, d.sparse_entries));
    } else {
        features = std::make_shared<const FeatureMatrix>();
    }

    auto labels = std::make_shared<std::vector<int>>(n, kUnlabeled);
    for (const auto& [u, c] : d.labels) (*labels)[u] = c;
    auto split = std::make_shared<std::vector<SplitTag>>(n, SplitTag::None);
    for (const auto& [u, tag] : d.split) (*split)[u] = tag;

    return Graph::make(n, std::move(d.edges), std::move(features), std::move(labels),
                       std::move(split));
}

std::string format_double(double x) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    if (ec != std::errc{}) throw NumericalError("double formatting failed");
    return {buf, ptr};
}

void save_graph(const Graph& graph, const DatasetPaths& paths) {
    if (paths.edges.empty()) throw ValidationError("edge file path is required");
    {
        std::ofstream out = open_output(paths.edges);
        for (const auto& e : graph.edges()) out << e.u << ' ' << e.v << '\n';
    }
    if (!paths.labels.empty()) {
        std::ofstream out = open_output(paths.labels);
        for (NodeId u = 0; u < graph.num_nodes(); ++u)
            if (graph.is_labeled(u)) out << u << ' ' << graph.label(u) << '\n';
    }
    if (!paths.split.empty()) {
        std::ofstream out = open_output(paths.split);
        for (NodeId u = 0; u < graph.num_nodes(); ++u) {
            switch (graph.split(u)) {
            case SplitTag::Train: out << u << " train\n"; break;
            case SplitTag::Val: out << u << " val\n"; break;
            case SplitTag::Test: out << u << " test\n"; break;
            case SplitTag::None: break;
            }
        }
    }
    if (!paths.features.empty() && graph.has_features()) {
        std::ofstream out = open_output(paths.features);
        const FeatureMatrix& x = graph.features();
        if (x.is_sparse()) {
            const SparseMatrix& m = x.sparse();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                out << i;
                for (SparseMatrix::InnerIterator it(m, i); it; ++it)
                    out << ' ' << it.col() << ':' << format_double(it.value());
                out << '\n';
            }
        } else {
            const Matrix& m = x.dense();
            for (Eigen::Index i = 0; i < m.rows(); ++i) {
                for (Eigen::Index j = 0; j < m.cols(); ++j) {
                    if (j) out << ',';
                    out << format_double(m(i, j));
                }
                out << '\n';
            }
        }
    }
}

PerturbationPlan read_plan(const std::string& path) {
    PerturbationPlan plan;
    bool have_header = false;
    for_each_line(path, [&](const std::string& s, std::size_t line) {
        auto toks = split_ws(s);
        if (!have_header) {
            if (toks.size() < 2 || toks[0].rfind("mode=", 0) != 0 ||
                toks[1].rfind("source=", 0) != 0)
                throw ParseError(path, line, "expected header 'mode=<aug|atk> source=<...>'");
            std::string mode = toks[0].substr(5);
            if (mode == "aug") plan.mode = PerturbMode::Aug;
            else if (mode == "atk") plan.mode = PerturbMode::Atk;
            else throw ParseError(path, line, "unknown mode '" + mode + "'");
            std::string source = toks[1].substr(7);
            if (source == "priority") plan.source = PlanSource::Priority;
            else if (source == "bridge") plan.source = PlanSource::Bridge;
            else if (source == "lowrank") plan.source = PlanSource::Lowrank;
            else if (source == "solver") plan.source = PlanSource::Solver;
            else throw ParseError(path, line, "unknown source '" + source + "'");
            have_header = true;
            return;
        }
        if (toks.size() != 3 || (toks[0] != "+" && toks[0] != "-"))
            throw ParseError(path, line, "expected '+ u v' or '- u v'");
        NodeId u = parse_node(toks[1], path, line);
        NodeId v = parse_node(toks[2], path, line);
        if (u == v) throw ParseError(path, line, "self-loop in plan");
        (toks[0] == "+" ? plan.adds : plan.removes).emplace_back(u, v);
    });
    if (!have_header) throw ValidationError(path + ": empty plan file (missing header)");
    return plan;
}

void write_plan(const PerturbationPlan& plan, const std::string& path) {
    std::ofstream out = open_output(path);
    out << "mode=" << to_string(plan.mode) << " source=" << to_string(plan.source) << '\n';
    for (const auto& e : plan.adds) out << "+ " << e.u << ' ' << e.v << '\n';
    for (const auto& e : plan.removes) out << "- " << e.u << ' ' << e.v << '\n';
}

ConvertStats convert_dataset(const DatasetPaths& raw, const DatasetPaths& out,
                             const std::string& node_map_path,
                             const std::string& class_map_path) {
    if (raw.edges.empty() || out.edges.empty())
        throw ValidationError("convert needs input and output edge paths");

    std::unordered_map<std::string, NodeId> node_ids;
    std::vector<std::string> node_tokens;
    auto node_of = [&](const std::string& tok) {
        auto [it, fresh] = node_ids.emplace(tok, NodeId(node_tokens.size()));
        if (fresh) node_tokens.push_back(tok);
        return it->second;
    };
    std::unordered_map<std::string, int> class_ids;
    std::vector<std::string> class_tokens;
    auto class_of = [&](const std::string& tok) {
        auto [it, fresh] = class_ids.emplace(tok, int(class_tokens.size()));
        if (fresh) class_tokens.push_back(tok);
        return it->second;
    };

    ConvertStats stats;

    {
        std::unordered_set<Edge, EdgeHash> seen;
        std::ofstream edges_out = open_output(out.edges);
        for_each_line(raw.edges, [&](const std::string& s, std::size_t line) {
            auto toks = split_ws(s);
            if (toks.size() != 2) throw ParseError(raw.edges, line, "expected 'u v'");
            NodeId u = node_of(toks[0]);
            NodeId v = node_of(toks[1]);
            if (u == v)
                throw ParseError(raw.edges, line, "self-loop at token '" + toks[0] + "'");
            if (seen.insert(Edge(u, v)).second) {
                edges_out << std::min(u, v) << ' ' << std::max(u, v) << '\n';
                ++stats.num_edges;
            }
        });
    }
    if (!raw.labels.empty()) {
        if (out.labels.empty()) throw ValidationError("convert: label output path missing");
        std::ofstream labels_out = open_output(out.labels);
        for_each_line(raw.labels, [&](const std::string& s, std::size_t line) {
            auto toks = split_ws(s);
            if (toks.size() != 2) throw ParseError(raw.labels, line, "expected 'node class'");
            labels_out << node_of(toks[0]) << ' ' << class_of(toks[1]) << '\n';
        });
    }
    if (!raw.split.empty()) {
        if (out.split.empty()) throw ValidationError("convert: split output path missing");
        std::ofstream split_out = open_output(out.split);
        for_each_line(raw.split, [&](const std::string& s, std::size_t line) {
            auto toks = split_ws(s);
            if (toks.size() != 2 ||
                (toks[1] != "train" && toks[1] != "val" && toks[1] != "test"))
                throw ParseError(raw.split, line, "expected 'node train|val|test'");
            split_out << node_of(toks[0]) << ' ' << toks[1] << '\n';
        });
    }
    if (!raw.features.empty()) {
        if (out.features.empty()) throw ValidationError("convert: feature output path missing");
        bool detected = false, dense = false;
        std::ofstream feat_out = open_output(out.features);
        for_each_line(raw.features, [&](const std::string& s, std::size_t line) {
            if (!detected) {
                dense = s.find(':') == std::string::npos;
                detected = true;
            }
            if (dense) {
                // rows already index-addressed; pass through
                feat_out << s << '\n';
            } else {
                auto toks = split_ws(s);
                feat_out << node_of(toks[0]);
                for (std::size_t i = 1; i < toks.size(); ++i) {
                    if (toks[i].find(':') == std::string::npos)
                        throw ParseError(raw.features, line, "expected idx:val");
                    feat_out << ' ' << toks[i];
                }
                feat_out << '\n';
            }
        });
    }

    if (!node_map_path.empty()) {
        std::ofstream map_out = open_output(node_map_path);
        for (NodeId id = 0; id < node_tokens.size(); ++id)
            map_out << node_tokens[id] << ' ' << id << '\n';
    }
    if (!class_map_path.empty() && !class_tokens.empty()) {
        std::ofstream map_out = open_output(class_map_path);
        for (std::size_t id = 0; id < class_tokens.size(); ++id)
            map_out << class_tokens[id] << ' ' << id << '\n';
    }

    stats.num_nodes = NodeId(node_tokens.size());
    stats.num_classes = int(class_tokens.size());
    return stats;
}

} // namespace ep::io
