#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace propgat {

enum class NodeKind { news, tweet, retweet, reply };

// Wire strings are "fake" / "true"; fake is the positive class everywhere.
enum class Label { fake, real };

const char* to_string(NodeKind k);
const char* to_string(Label l);
NodeKind node_kind_from_string(const std::string& s);
Label label_from_string(const std::string& s);

struct RawNode {
    std::string id;
    NodeKind kind = NodeKind::tweet;
    std::string profile_text;
    std::string post_text;
    std::int64_t followers = 0;
    std::int64_t followees = 0;
    std::int64_t statuses = 0;
    bool verified = false;
    std::optional<std::int64_t> timestamp;  // seconds since epoch; absent for the news node
};

// Reply/retweet tree under one root publication. The root is never the news
// node; trees attach to it only when merged into a propagation graph.
struct DiffusionTree {
    RawNode root;
    std::vector<DiffusionTree> children;
};

// Directed tree rooted at the news node (index 0). Edges run parent -> child
// in diffusion order.
struct PropagationGraph {
    std::string graph_id;
    Label label = Label::real;
    std::vector<RawNode> nodes;
    std::vector<std::pair<int, int>> edges;  // (parent_index, child_index)

    int node_count() const { return static_cast<int>(nodes.size()); }

    // parent index per node, -1 for the root. Derived from edges; graphs
    // that fail validate_graph may yield arbitrary values.
    std::vector<int> parent_index() const;

    // Depth of each node (root = 0), via BFS along edges.
    std::vector<int> depths() const;
};

struct Dataset {
    std::vector<PropagationGraph> graphs;
    std::string provenance;
};

struct DatasetStats {
    std::int64_t n_fake = 0;
    std::int64_t n_true = 0;
    double imbalance_ratio = 0.0;  // n_fake / n_true
    bool degenerate_class = false;
    int min_nodes = 0;
    int max_nodes = 0;
    double mean_nodes = 0.0;
    int min_edges = 0;
    int max_edges = 0;
    double mean_edges = 0.0;
    std::int64_t timestamp_inversions = 0;  // child earlier than parent; clamped downstream

    std::string summary() const;
};

// Builds one propagation graph from a news item and its diffusion trees.
// The news node gets all-zero/empty sentinel fields and no timestamp.
// Throws std::runtime_error naming the offending id on duplicates.
PropagationGraph merge_diffusion_trees(const std::string& news_id, Label label,
                                       const std::vector<DiffusionTree>& trees);

// Returns every violated PropagationGraph invariant with node/edge
// coordinates; empty means valid. Never throws.
std::vector<std::string> validate_graph(const PropagationGraph& g);

// Child timestamps earlier than their parent's (clamped to zero delay when
// features are built).
std::int64_t count_timestamp_inversions(const PropagationGraph& g);

// Line-delimited JSON, one graph per line; schema documented in README.
// Throws with the line number on parse failures and with graph_id plus the
// violation list when a graph fails validation.
Dataset load_dataset(const std::string& path);
void save_dataset(const Dataset& ds, const std::string& path);

std::string graph_to_json_line(const PropagationGraph& g);
PropagationGraph graph_from_json_line(const std::string& line);

DatasetStats dataset_stats(const Dataset& ds);

}  // namespace propgat
