#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "propgat/harness.hpp"
#include "propgat/io_util.hpp"
#include "propgat/rng.hpp"

namespace propgat {

using nlohmann::json;

namespace {

Eigen::VectorXd random_unit_vector(int dim, RngStream& rng) {
    Eigen::VectorXd v(dim);
    for (int i = 0; i < dim; ++i) v[i] = rng.normal();
    double n = v.norm();
    if (n == 0.0) {
        v.setZero();
        v[0] = 1.0;
        return v;
    }
    return v / n;
}

struct SignalDirections {
    Eigen::VectorXd post;
    Eigen::VectorXd profile;
    Eigen::VectorXd word;  // static-table pool direction
};

// Class-dependent structure knobs; all coincide when structure_signal = 0.
struct StructureParams {
    double p_deep;        // chance a new node extends the deepest chain
    double delay_mean;    // seconds
    double follower_mu;   // lognormal location
    double verified_p;
};

StructureParams structure_params(const SynthSpec& spec, Label label) {
    const double ss = spec.structure_signal;
    StructureParams p;
    if (label == Label::fake) {
        p.p_deep = 0.30 + 0.45 * ss;
        p.delay_mean = 600.0 * (1.0 - 0.4 * ss);
        p.follower_mu = 4.0 - 0.5 * ss;
        p.verified_p = 0.02;
    } else {
        p.p_deep = 0.30 - 0.25 * ss;
        p.delay_mean = 600.0 * (1.0 + 0.4 * ss);
        p.follower_mu = 4.0 + 0.5 * ss;
        p.verified_p = 0.02 + 0.25 * ss;
    }
    return p;
}

std::string word_token(int w) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "w%04d", w);
    return buf;
}

// Vocabulary layout: [0, pool) fake-leaning, [pool, 2*pool) true-leaning,
// the rest neutral.
constexpr int kPoolSize = 30;

std::string sample_text(const SynthSpec& spec, Label label, int min_len, int max_len,
                        double signal_rate, RngStream& rng) {
    int len = min_len + static_cast<int>(rng.uniform_int(
                            static_cast<std::uint64_t>(max_len - min_len + 1)));
    std::string text;
    for (int i = 0; i < len; ++i) {
        int w;
        if (rng.u01() < signal_rate) {
            int pool_base = label == Label::fake ? 0 : kPoolSize;
            w = pool_base + static_cast<int>(rng.uniform_int(kPoolSize));
        } else {
            w = 2 * kPoolSize +
                static_cast<int>(rng.uniform_int(
                    static_cast<std::uint64_t>(spec.vocab_size - 2 * kPoolSize)));
        }
        if (!text.empty()) text += ' ';
        text += word_token(w);
    }
    return text;
}

Eigen::VectorXd planted_vector(const SynthSpec& spec, Label label, double strength,
                               const Eigen::VectorXd& direction, RngStream& rng) {
    Eigen::VectorXd v(spec.embed_dim);
    for (int i = 0; i < spec.embed_dim; ++i) v[i] = spec.embed_sigma * rng.normal();
    double sign = label == Label::fake ? 1.0 : -1.0;
    v += sign * spec.text_signal * strength * spec.embed_delta * direction;
    return v;
}

PropagationGraph make_graph(const SynthSpec& spec, int index, Label label,
                            const SignalDirections& dirs, ContextualStore& store,
                            RngStream& rng) {
    const StructureParams sp = structure_params(spec, label);
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "g%05d", index);
    const std::string gid = idbuf;

    PropagationGraph g;
    g.graph_id = gid;
    g.label = label;
    RawNode news;
    news.id = gid + "-news";
    news.kind = NodeKind::news;
    g.nodes.push_back(news);

    const int span = spec.nodes_max - spec.nodes_min;
    int n_nodes = spec.nodes_min +
                  (span > 0 ? static_cast<int>(rng.uniform_int(span + 1)) : 0);
    n_nodes = std::max(n_nodes, 2);
    int n_trees = spec.trees_min +
                  (spec.trees_max > spec.trees_min
                       ? static_cast<int>(rng.uniform_int(spec.trees_max - spec.trees_min + 1))
                       : 0);
    n_trees = std::min(n_trees, n_nodes - 1);

    const std::int64_t base_time = 1600000000;
    // Per tree: node indices in insertion order (last element = deepest tip).
    std::vector<std::vector<int>> tree_members(n_trees);
    for (int m = 1; m < n_nodes; ++m) {
        RawNode node;
        node.id = gid + "-u" + std::to_string(m);
        int parent_idx;
        if (m <= n_trees) {
            parent_idx = 0;  // tree root attaches to the news node
            node.kind = NodeKind::tweet;
            node.timestamp = base_time + static_cast<std::int64_t>(rng.exponential(3600.0));
            tree_members[m - 1].push_back(m);
        } else {
            int t = static_cast<int>(rng.uniform_int(n_trees));
            const auto& members = tree_members[t];
            parent_idx = rng.u01() < sp.p_deep
                             ? members.back()
                             : members[rng.uniform_int(members.size())];
            node.kind = rng.u01() < 0.85 ? NodeKind::retweet : NodeKind::reply;
            node.timestamp = *g.nodes[parent_idx].timestamp +
                             static_cast<std::int64_t>(rng.exponential(sp.delay_mean));
            tree_members[t].push_back(m);
        }
        node.followers = static_cast<std::int64_t>(std::exp(sp.follower_mu + 1.2 * rng.normal()));
        node.followees = static_cast<std::int64_t>(std::exp(4.5 + 1.0 * rng.normal()));
        node.statuses = static_cast<std::int64_t>(std::exp(5.0 + 1.5 * rng.normal()));
        node.verified = rng.bernoulli(sp.verified_p);
        node.profile_text = rng.u01() < 0.25
                                ? std::string()  // sparse bios: some are empty
                                : sample_text(spec, label, 1, 8,
                                              0.6 * spec.text_signal * spec.profile_factor, rng);
        node.post_text = sample_text(spec, label, 3, 15, 0.6 * spec.text_signal, rng);

        store.entries[ContextualStore::key(node.id, TextSource::profile)] =
            planted_vector(spec, label, spec.profile_factor, dirs.profile, rng);
        store.entries[ContextualStore::key(node.id, TextSource::post)] =
            planted_vector(spec, label, 1.0, dirs.post, rng);

        g.nodes.push_back(node);
        g.edges.emplace_back(parent_idx, m);
    }
    return g;
}

}  // namespace

SynthOutput synth_generate(const SynthSpec& spec) {
    if (spec.text_signal < 0.0 || spec.text_signal > 1.0 || spec.structure_signal < 0.0 ||
        spec.structure_signal > 1.0) {
        throw std::invalid_argument("signal strengths must lie in [0, 1]");
    }
    if (spec.nodes_min < 2 || spec.nodes_max < spec.nodes_min) {
        throw std::invalid_argument("invalid node count range");
    }
    if (spec.vocab_size < 2 * kPoolSize + 1) {
        throw std::invalid_argument("vocab_size must exceed " + std::to_string(2 * kPoolSize));
    }

    SynthOutput out;
    out.store.dimension = spec.embed_dim;
    out.table.dimension = spec.embed_dim;

    RngStream dir_rng(spec.seed, {static_cast<std::uint64_t>(StreamUse::synth), 0});
    SignalDirections dirs;
    dirs.post = random_unit_vector(spec.embed_dim, dir_rng);
    dirs.profile = random_unit_vector(spec.embed_dim, dir_rng);
    dirs.word = random_unit_vector(spec.embed_dim, dir_rng);

    // Static table: pool words carry +/- delta along the word direction.
    RngStream table_rng(spec.seed, {static_cast<std::uint64_t>(StreamUse::synth), 1});
    for (int w = 0; w < spec.vocab_size; ++w) {
        Eigen::VectorXd v(spec.embed_dim);
        for (int i = 0; i < spec.embed_dim; ++i) v[i] = 0.3 * table_rng.normal();
        if (w < kPoolSize) {
            v += spec.embed_delta * dirs.word;
        } else if (w < 2 * kPoolSize) {
            v -= spec.embed_delta * dirs.word;
        }
        out.table.entries[word_token(w)] = v;
    }

    const int total = spec.n_fake + spec.n_true;
    for (int i = 0; i < total; ++i) {
        Label label = i < spec.n_fake ? Label::fake : Label::real;
        RngStream graph_rng(spec.seed, {static_cast<std::uint64_t>(StreamUse::synth), 2,
                                        static_cast<std::uint64_t>(i)});
        out.ds.graphs.push_back(make_graph(spec, i, label, dirs, out.store, graph_rng));
    }
    out.ds.provenance = "synthetic seed=" + std::to_string(spec.seed);
    return out;
}

namespace {

json synth_spec_to_json(const SynthSpec& s) {
    json j;
    j["n_fake"] = s.n_fake;
    j["n_true"] = s.n_true;
    j["embed_dim"] = s.embed_dim;
    j["vocab_size"] = s.vocab_size;
    j["nodes_min"] = s.nodes_min;
    j["nodes_max"] = s.nodes_max;
    j["trees_min"] = s.trees_min;
    j["trees_max"] = s.trees_max;
    j["text_signal"] = s.text_signal;
    j["structure_signal"] = s.structure_signal;
    j["profile_factor"] = s.profile_factor;
    j["embed_sigma"] = s.embed_sigma;
    j["embed_delta"] = s.embed_delta;
    j["seed"] = s.seed;
    return j;
}

SynthSpec synth_spec_from_json(const json& j) {
    SynthSpec s;
    s.n_fake = j.value("n_fake", s.n_fake);
    s.n_true = j.value("n_true", s.n_true);
    s.embed_dim = j.value("embed_dim", s.embed_dim);
    s.vocab_size = j.value("vocab_size", s.vocab_size);
    s.nodes_min = j.value("nodes_min", s.nodes_min);
    s.nodes_max = j.value("nodes_max", s.nodes_max);
    s.trees_min = j.value("trees_min", s.trees_min);
    s.trees_max = j.value("trees_max", s.trees_max);
    s.text_signal = j.value("text_signal", s.text_signal);
    s.structure_signal = j.value("structure_signal", s.structure_signal);
    s.profile_factor = j.value("profile_factor", s.profile_factor);
    s.embed_sigma = j.value("embed_sigma", s.embed_sigma);
    s.embed_delta = j.value("embed_delta", s.embed_delta);
    s.seed = j.value("seed", s.seed);
    return s;
}

}  // namespace

SynthSpec synth_spec_from_json_file(const std::string& path) {
    return synth_spec_from_json(json::parse(read_file(path)));
}

void synth_spec_to_json_file(const SynthSpec& spec, const std::string& path) {
    write_file(path, synth_spec_to_json(spec).dump(2) + "\n");
}

void write_synth_dataset(const SynthOutput& out, const SynthSpec& spec, const std::string& dir) {
    std::filesystem::create_directories(dir);
    save_dataset(out.ds, dir + "/graphs.jsonl");
    save_static_table(out.table, dir + "/static_table.txt");
    save_contextual_store(out.store, dir + "/contextual_store.jsonl");
    synth_spec_to_json_file(spec, dir + "/provenance.json");
}

DataBundle load_data_dir(const std::string& dir) {
    DataBundle bundle;
    bundle.ds = load_dataset(dir + "/graphs.jsonl");
    if (std::filesystem::exists(dir + "/static_table.txt")) {
        bundle.table = load_static_table(dir + "/static_table.txt");
    }
    if (std::filesystem::exists(dir + "/contextual_store.jsonl")) {
        bundle.store = load_contextual_store(dir + "/contextual_store.jsonl");
    }
    return bundle;
}

}  // namespace propgat
