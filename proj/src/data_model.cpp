#include "propgat/data_model.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "propgat/io_util.hpp"

namespace propgat {

using nlohmann::json;

const char* to_string(NodeKind k) {
    switch (k) {
        case NodeKind::news: return "news";
        case NodeKind::tweet: return "tweet";
        case NodeKind::retweet: return "retweet";
        case NodeKind::reply: return "reply";
    }
    return "?";
}

const char* to_string(Label l) { return l == Label::fake ? "fake" : "true"; }

NodeKind node_kind_from_string(const std::string& s) {
    if (s == "news") return NodeKind::news;
    if (s == "tweet") return NodeKind::tweet;
    if (s == "retweet") return NodeKind::retweet;
    if (s == "reply") return NodeKind::reply;
    throw std::runtime_error("unknown node kind: '" + s + "'");
}

Label label_from_string(const std::string& s) {
    if (s == "fake") return Label::fake;
    if (s == "true") return Label::real;
    throw std::runtime_error("unknown label: '" + s + "' (expected \"fake\" or \"true\")");
}

std::vector<int> PropagationGraph::parent_index() const {
    std::vector<int> parent(nodes.size(), -1);
    for (const auto& [p, c] : edges) {
        if (c >= 0 && c < node_count() && p >= 0 && p < node_count()) parent[c] = p;
    }
    return parent;
}

std::vector<int> PropagationGraph::depths() const {
    std::vector<std::vector<int>> children(nodes.size());
    for (const auto& [p, c] : edges) {
        if (p >= 0 && p < node_count() && c >= 0 && c < node_count()) children[p].push_back(c);
    }
    std::vector<int> depth(nodes.size(), 0);
    if (nodes.empty()) return depth;
    std::deque<int> queue{0};
    std::vector<bool> seen(nodes.size(), false);
    seen[0] = true;
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int c : children[v]) {
            if (seen[c]) continue;
            seen[c] = true;
            depth[c] = depth[v] + 1;
            queue.push_back(c);
        }
    }
    return depth;
}

namespace {

void collect_tree(const DiffusionTree& t, int parent_idx, PropagationGraph& g,
                  std::unordered_set<std::string>& ids) {
    if (!ids.insert(t.root.id).second) {
        throw std::runtime_error("duplicate node_id: '" + t.root.id + "'");
    }
    int idx = g.node_count();
    g.nodes.push_back(t.root);
    g.edges.emplace_back(parent_idx, idx);
    for (const auto& child : t.children) collect_tree(child, idx, g, ids);
}

}  // namespace

PropagationGraph merge_diffusion_trees(const std::string& news_id, Label label,
                                       const std::vector<DiffusionTree>& trees) {
    PropagationGraph g;
    g.graph_id = news_id;
    g.label = label;
    RawNode news;
    news.id = news_id;
    news.kind = NodeKind::news;
    g.nodes.push_back(news);
    std::unordered_set<std::string> ids{news_id};
    for (const auto& tree : trees) collect_tree(tree, 0, g, ids);
    return g;
}

std::vector<std::string> validate_graph(const PropagationGraph& g) {
    std::vector<std::string> out;
    const int n = g.node_count();
    if (n == 0) {
        out.push_back("graph has no nodes");
        return out;
    }
    if (g.nodes[0].kind != NodeKind::news) out.push_back("node 0 is not the news node");
    int news_count = 0;
    std::unordered_map<std::string, int> seen_ids;
    for (int i = 0; i < n; ++i) {
        if (g.nodes[i].kind == NodeKind::news) ++news_count;
        auto [it, fresh] = seen_ids.emplace(g.nodes[i].id, i);
        if (!fresh) {
            out.push_back("duplicate node_id '" + g.nodes[i].id + "' at indices " +
                          std::to_string(it->second) + " and " + std::to_string(i));
        }
    }
    if (news_count != 1) {
        out.push_back("expected exactly one news node, found " + std::to_string(news_count));
    }

    std::vector<int> indeg(n, 0);
    std::vector<std::vector<int>> children(n);
    bool edges_ok = true;
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [p, c] = g.edges[e];
        if (p < 0 || p >= n || c < 0 || c >= n) {
            out.push_back("edge " + std::to_string(e) + " (" + std::to_string(p) + "," +
                          std::to_string(c) + ") out of range");
            edges_ok = false;
            continue;
        }
        ++indeg[c];
        children[p].push_back(c);
    }
    if (!edges_ok) return out;

    if (static_cast<int>(g.edges.size()) != n - 1) {
        out.push_back("edge count " + std::to_string(g.edges.size()) + " != node count - 1 (" +
                      std::to_string(n - 1) + ")");
    }
    if (indeg[0] != 0) {
        out.push_back("root node 0 has in-degree " + std::to_string(indeg[0]) + ", expected 0");
    }
    for (int v = 1; v < n; ++v) {
        if (indeg[v] == 0) out.push_back("node " + std::to_string(v) + " has no parent");
        if (indeg[v] > 1) {
            out.push_back("node " + std::to_string(v) + " has multiple parents (in-degree " +
                          std::to_string(indeg[v]) + ")");
        }
    }

    // Cycle detection by iterative DFS coloring over the directed edges.
    std::vector<int> color(n, 0);  // 0 white, 1 on stack, 2 done
    for (int start = 0; start < n; ++start) {
        if (color[start] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty()) {
            auto& [v, next] = stack.back();
            if (next < children[v].size()) {
                int c = children[v][next++];
                if (color[c] == 1) {
                    out.push_back("cycle detected through edge (" + std::to_string(v) + "," +
                                  std::to_string(c) + ")");
                } else if (color[c] == 0) {
                    color[c] = 1;
                    stack.emplace_back(c, 0);
                }
            } else {
                color[v] = 2;
                stack.pop_back();
            }
        }
    }

    // Connectivity from the root.
    std::vector<bool> reach(n, false);
    reach[0] = true;
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        for (int c : children[v]) {
            if (!reach[c]) {
                reach[c] = true;
                queue.push_back(c);
            }
        }
    }
    for (int v = 0; v < n; ++v) {
        if (!reach[v]) out.push_back("node " + std::to_string(v) + " unreachable from root");
    }
    return out;
}

std::int64_t count_timestamp_inversions(const PropagationGraph& g) {
    std::int64_t count = 0;
    for (const auto& [p, c] : g.edges) {
        if (p < 0 || p >= g.node_count() || c < 0 || c >= g.node_count()) continue;
        const auto& pt = g.nodes[p].timestamp;
        const auto& ct = g.nodes[c].timestamp;
        if (pt && ct && *ct < *pt) ++count;
    }
    return count;
}

namespace {

json node_to_json(const RawNode& n) {
    json j;
    j["id"] = n.id;
    j["kind"] = to_string(n.kind);
    j["profile_text"] = n.profile_text;
    j["post_text"] = n.post_text;
    j["followers"] = n.followers;
    j["followees"] = n.followees;
    j["statuses"] = n.statuses;
    j["verified"] = n.verified;
    if (n.timestamp) j["timestamp"] = *n.timestamp;
    return j;
}

RawNode node_from_json(const json& j) {
    RawNode n;
    n.id = j.at("id").get<std::string>();
    n.kind = node_kind_from_string(j.at("kind").get<std::string>());
    n.profile_text = j.value("profile_text", std::string());
    n.post_text = j.value("post_text", std::string());
    n.followers = j.value("followers", std::int64_t{0});
    n.followees = j.value("followees", std::int64_t{0});
    n.statuses = j.value("statuses", std::int64_t{0});
    n.verified = j.value("verified", false);
    if (j.contains("timestamp") && !j["timestamp"].is_null()) {
        n.timestamp = j["timestamp"].get<std::int64_t>();
    }
    if (n.followers < 0 || n.followees < 0 || n.statuses < 0) {
        throw std::runtime_error("node '" + n.id + "' has a negative count field");
    }
    return n;
}

}  // namespace

std::string graph_to_json_line(const PropagationGraph& g) {
    json j;
    j["graph_id"] = g.graph_id;
    j["label"] = to_string(g.label);
    json nodes = json::array();
    for (const auto& n : g.nodes) nodes.push_back(node_to_json(n));
    j["nodes"] = std::move(nodes);
    json edges = json::array();
    for (const auto& [p, c] : g.edges) edges.push_back(json::array({p, c}));
    j["edges"] = std::move(edges);
    return j.dump();
}

PropagationGraph graph_from_json_line(const std::string& line) {
    json j = json::parse(line);
    PropagationGraph g;
    g.graph_id = j.at("graph_id").get<std::string>();
    g.label = label_from_string(j.at("label").get<std::string>());
    for (const auto& jn : j.at("nodes")) g.nodes.push_back(node_from_json(jn));
    for (const auto& je : j.at("edges")) {
        if (!je.is_array() || je.size() != 2) throw std::runtime_error("edge is not a pair");
        g.edges.emplace_back(je[0].get<int>(), je[1].get<int>());
    }
    return g;
}

Dataset load_dataset(const std::string& path) {
    Dataset ds;
    ds.provenance = path;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open dataset: " + path);
    std::string line;
    std::size_t line_no = 0;
    std::unordered_set<std::string> graph_ids;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        PropagationGraph g;
        try {
            g = graph_from_json_line(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": parse error: " + e.what());
        }
        auto violations = validate_graph(g);
        if (!violations.empty()) {
            std::string msg = path + ":" + std::to_string(line_no) + ": graph '" + g.graph_id +
                              "' is invalid:";
            for (const auto& v : violations) msg += "\n  - " + v;
            throw std::runtime_error(msg);
        }
        if (!graph_ids.insert(g.graph_id).second) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": duplicate graph_id '" + g.graph_id + "'");
        }
        ds.graphs.push_back(std::move(g));
    }
    return ds;
}

void save_dataset(const Dataset& ds, const std::string& path) {
    std::string out;
    for (const auto& g : ds.graphs) {
        out += graph_to_json_line(g);
        out += '\n';
    }
    write_file(path, out);
}

DatasetStats dataset_stats(const Dataset& ds) {
    DatasetStats s;
    double node_sum = 0.0, edge_sum = 0.0;
    bool first = true;
    for (const auto& g : ds.graphs) {
        if (g.label == Label::fake) {
            ++s.n_fake;
        } else {
            ++s.n_true;
        }
        int nn = g.node_count();
        int ne = static_cast<int>(g.edges.size());
        if (first) {
            s.min_nodes = s.max_nodes = nn;
            s.min_edges = s.max_edges = ne;
            first = false;
        } else {
            s.min_nodes = std::min(s.min_nodes, nn);
            s.max_nodes = std::max(s.max_nodes, nn);
            s.min_edges = std::min(s.min_edges, ne);
            s.max_edges = std::max(s.max_edges, ne);
        }
        node_sum += nn;
        edge_sum += ne;
        s.timestamp_inversions += count_timestamp_inversions(g);
    }
    if (!ds.graphs.empty()) {
        s.mean_nodes = node_sum / static_cast<double>(ds.graphs.size());
        s.mean_edges = edge_sum / static_cast<double>(ds.graphs.size());
    }
    s.imbalance_ratio = s.n_true > 0 ? static_cast<double>(s.n_fake) / static_cast<double>(s.n_true)
                                     : 0.0;
    s.degenerate_class = (s.n_fake == 0 || s.n_true == 0);
    return s;
}

std::string DatasetStats::summary() const {
    std::string out;
    out += "graphs: " + std::to_string(n_fake + n_true) + " (fake " + std::to_string(n_fake) +
           ", true " + std::to_string(n_true) + ")\n";
    out += "imbalance ratio (fake/true): " + fmt_double(imbalance_ratio, "%.3f") + "\n";
    if (degenerate_class) out += "warning: degenerate class distribution (one class is empty)\n";
    out += "nodes per graph: min " + std::to_string(min_nodes) + ", mean " +
           fmt_double(mean_nodes, "%.2f") + ", max " + std::to_string(max_nodes) + "\n";
    out += "edges per graph: min " + std::to_string(min_edges) + ", mean " +
           fmt_double(mean_edges, "%.2f") + ", max " + std::to_string(max_edges) + "\n";
    if (timestamp_inversions > 0) {
        out += "timestamp inversions (clamped to zero delay): " +
               std::to_string(timestamp_inversions) + "\n";
    }
    return out;
}

}  // namespace propgat
