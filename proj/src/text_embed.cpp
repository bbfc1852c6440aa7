#include "propgat/text_embed.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "propgat/io_util.hpp"

namespace propgat {

using nlohmann::json;

const char* to_string(TextSource s) { return s == TextSource::profile ? "profile" : "post"; }

TextSource text_source_from_string(const std::string& s) {
    if (s == "profile") return TextSource::profile;
    if (s == "post") return TextSource::post;
    throw std::runtime_error("unknown text source: '" + s + "'");
}

const char* to_string(Encoder e) { return e == Encoder::static_ ? "static" : "contextual"; }

Encoder encoder_from_string(const std::string& s) {
    if (s == "static") return Encoder::static_;
    if (s == "contextual") return Encoder::contextual;
    throw std::runtime_error("unknown encoder: '" + s + "' (expected \"static\" or \"contextual\")");
}

namespace {

bool is_url(const std::string& tok) {
    return tok.rfind("http://", 0) == 0 || tok.rfind("https://", 0) == 0 ||
           tok.rfind("www.", 0) == 0;
}

std::string strip_punct(const std::string& tok) {
    std::size_t b = 0, e = tok.size();
    while (b < e && std::ispunct(static_cast<unsigned char>(tok[b]))) ++b;
    while (e > b && std::ispunct(static_cast<unsigned char>(tok[e - 1]))) --e;
    return tok.substr(b, e - b);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> out;
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        std::string norm;
        if (is_url(tok)) {
            norm = "httpurl";
        } else if (tok.size() > 1 && tok[0] == '@') {
            norm = "@user";
        } else {
            norm = strip_punct(tok);
        }
        if (!norm.empty()) out.push_back(norm);
        tok.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            flush();
        } else {
            tok += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        }
    }
    flush();
    return out;
}

Eigen::VectorXd embed_text_static(const StaticTable& table, const std::string& text) {
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(table.dimension);
    int hits = 0;
    for (const auto& tok : tokenize(text)) {
        auto it = table.entries.find(tok);
        if (it == table.entries.end()) continue;
        sum += it->second;
        ++hits;
    }
    if (hits > 0) sum /= static_cast<double>(hits);
    return sum;
}

StaticTable load_static_table(const std::string& path) {
    StaticTable table;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open static table: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        std::vector<double> vals;
        double v;
        while (ss >> v) vals.push_back(v);
        if (word.empty() || vals.empty()) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected \"word v1 ... vd\"");
        }
        if (table.dimension == 0) {
            table.dimension = static_cast<int>(vals.size());
        } else if (static_cast<int>(vals.size()) != table.dimension) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": vector arity " +
                                     std::to_string(vals.size()) + " != " +
                                     std::to_string(table.dimension));
        }
        table.entries[word] = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    }
    if (table.entries.empty()) throw std::runtime_error("static table is empty: " + path);
    return table;
}

void save_static_table(const StaticTable& table, const std::string& path) {
    // Sorted by word so the file is deterministic.
    std::vector<const std::string*> words;
    words.reserve(table.entries.size());
    for (const auto& [w, _] : table.entries) words.push_back(&w);
    std::sort(words.begin(), words.end(), [](auto* a, auto* b) { return *a < *b; });
    std::string out;
    for (const auto* w : words) {
        out += *w;
        const auto& v = table.entries.at(*w);
        for (int i = 0; i < v.size(); ++i) {
            out += ' ';
            out += fmt_double_exact(v[i]);
        }
        out += '\n';
    }
    write_file(path, out);
}

ContextualStore load_contextual_store(const std::string& path) {
    ContextualStore store;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open contextual store: " + path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": parse error: " + e.what());
        }
        if (line_no == 1 && j.contains("dimension") && !j.contains("node_id")) {
            store.dimension = j["dimension"].get<int>();
            if (store.dimension <= 0) {
                throw std::runtime_error(path + ": header dimension must be positive");
            }
            continue;
        }
        std::string node_id = j.at("node_id").get<std::string>();
        TextSource source = text_source_from_string(j.at("source").get<std::string>());
        std::vector<double> vals = j.at("vec").get<std::vector<double>>();
        if (store.dimension == 0) {
            store.dimension = static_cast<int>(vals.size());
        } else if (static_cast<int>(vals.size()) != store.dimension) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": vector arity " +
                                     std::to_string(vals.size()) + " != " +
                                     std::to_string(store.dimension));
        }
        std::string key = ContextualStore::key(node_id, source);
        if (store.entries.count(key)) {
            throw std::runtime_error(path + ":" + std::to_string(line_no) + ": duplicate key (" +
                                     node_id + ", " + to_string(source) + ")");
        }
        store.entries[key] = Eigen::Map<Eigen::VectorXd>(vals.data(), vals.size());
    }
    if (store.dimension == 0) {
        throw std::runtime_error(path + ": empty store without a {\"dimension\": d} header");
    }
    return store;
}

void save_contextual_store(const ContextualStore& store, const std::string& path) {
    std::vector<const std::string*> keys;
    keys.reserve(store.entries.size());
    for (const auto& [k, _] : store.entries) keys.push_back(&k);
    std::sort(keys.begin(), keys.end(), [](auto* a, auto* b) { return *a < *b; });
    std::string out;
    {
        json header;
        header["dimension"] = store.dimension;
        out += header.dump();
        out += '\n';
    }
    for (const auto* k : keys) {
        auto sep = k->find('\x1f');
        json j;
        j["node_id"] = k->substr(0, sep);
        j["source"] = k->substr(sep + 1);
        const auto& v = store.entries.at(*k);
        j["vec"] = std::vector<double>(v.data(), v.data() + v.size());
        out += j.dump();
        out += '\n';
    }
    write_file(path, out);
}

namespace {

Eigen::VectorXd contextual_lookup(const ContextualStore& store, const std::string& node_id,
                                  TextSource source) {
    const Eigen::VectorXd* v = store.find(node_id, source);
    if (v) return *v;
    return Eigen::VectorXd::Zero(store.dimension);
}

}  // namespace

TextSegments text_segments(const TextConfig& cfg, const RawNode& node, const StaticTable* table,
                           const ContextualStore* store) {
    TextSegments out;
    if (!cfg.uses_text()) return out;
    if (cfg.encoder == Encoder::static_) {
        if (!table) throw std::runtime_error("static encoder configured but no static table supplied");
        if (cfg.use_profiles) out.profile = embed_text_static(*table, node.profile_text);
        if (cfg.use_retweets) out.post = embed_text_static(*table, node.post_text);
    } else {
        if (!store) {
            throw std::runtime_error("contextual encoder configured but no contextual store supplied");
        }
        if (cfg.use_profiles) out.profile = contextual_lookup(*store, node.id, TextSource::profile);
        if (cfg.use_retweets) out.post = contextual_lookup(*store, node.id, TextSource::post);
    }
    return out;
}

int text_dim(const TextConfig& cfg, const StaticTable* table, const ContextualStore* store) {
    if (!cfg.uses_text()) return 0;
    if (cfg.encoder == Encoder::static_) {
        if (!table) throw std::runtime_error("static encoder configured but no static table supplied");
        return table->dimension;
    }
    if (!store) throw std::runtime_error("contextual encoder configured but no contextual store supplied");
    return store->dimension;
}

}  // namespace propgat
