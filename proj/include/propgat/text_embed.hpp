#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "propgat/data_model.hpp"

namespace propgat {

// Static word-vector table ("word v1 ... vd" text lines). Typical static
// encoders are 100-d; the dimension is inferred from the file.
struct StaticTable {
    int dimension = 0;
    std::unordered_map<std::string, Eigen::VectorXd> entries;
};

enum class TextSource { profile, post };

const char* to_string(TextSource s);
TextSource text_source_from_string(const std::string& s);

// Precomputed contextual vectors keyed by (node_id, source). Typical
// contextual encoders are 768-d; vectors are produced offline and ingested.
struct ContextualStore {
    int dimension = 0;
    std::unordered_map<std::string, Eigen::VectorXd> entries;

    static std::string key(const std::string& node_id, TextSource source) {
        return node_id + (source == TextSource::profile ? "\x1f""profile" : "\x1f""post");
    }
    const Eigen::VectorXd* find(const std::string& node_id, TextSource source) const {
        auto it = entries.find(key(node_id, source));
        return it == entries.end() ? nullptr : &it->second;
    }
};

enum class Encoder { static_, contextual };

const char* to_string(Encoder e);
Encoder encoder_from_string(const std::string& s);

// Default text dimensions of the standard encoders.
constexpr int kStaticDefaultDim = 100;
constexpr int kContextualDefaultDim = 768;

struct TextConfig {
    Encoder encoder = Encoder::static_;
    bool use_profiles = false;
    bool use_retweets = false;

    bool uses_text() const { return use_profiles || use_retweets; }
    int default_text_dim() const {
        return encoder == Encoder::static_ ? kStaticDefaultDim : kContextualDefaultDim;
    }
};

// Lowercases, splits on whitespace, maps URLs to "httpurl" and @-mentions to
// "@user", strips leading/trailing punctuation, drops empty tokens.
std::vector<std::string> tokenize(const std::string& text);

// Mean of the in-vocabulary token vectors; OOV tokens are skipped. Empty or
// fully-OOV text yields the zero vector.
Eigen::VectorXd embed_text_static(const StaticTable& table, const std::string& text);

StaticTable load_static_table(const std::string& path);
void save_static_table(const StaticTable& table, const std::string& path);

ContextualStore load_contextual_store(const std::string& path);
void save_contextual_store(const ContextualStore& store, const std::string& path);

struct TextSegments {
    std::optional<Eigen::VectorXd> profile;  // x2
    std::optional<Eigen::VectorXd> post;     // x3
};

// Produces the textual feature segments for one node. A contextual lookup
// miss yields the zero vector; a disabled source yields an absent segment.
// Throws if the source required by cfg.encoder is missing.
TextSegments text_segments(const TextConfig& cfg, const RawNode& node, const StaticTable* table,
                           const ContextualStore* store);

// Dimension of each enabled text segment under cfg given the loaded sources.
int text_dim(const TextConfig& cfg, const StaticTable* table, const ContextualStore* store);

}  // namespace propgat
