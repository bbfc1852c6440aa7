#include <doctest.h>

#include <algorithm>

#include "propgat/io_util.hpp"
#include "propgat/text_embed.hpp"
#include "test_util.hpp"

using namespace propgat;

TEST_CASE("tokenize normalizes case, punctuation, urls and mentions") {
    CHECK(tokenize("Hello, World!") == std::vector<std::string>{"hello", "world"});
    CHECK(tokenize("").empty());
    CHECK(tokenize("   \t\n ").empty());
    CHECK(tokenize("RT @foo: see https://x.co") ==
          std::vector<std::string>{"rt", "@user", "see", "httpurl"});
    CHECK(tokenize("visit www.example.com NOW") ==
          std::vector<std::string>{"visit", "httpurl", "now"});
    CHECK(tokenize("don't stop") == std::vector<std::string>{"don't", "stop"});
    CHECK(tokenize("...!!!") .empty());
}

TEST_CASE("load_static_table infers dimension and validates arity") {
    std::string dir = testutil::scratch_dir("table");

    SUBCASE("two 3-d rows") {
        write_file(dir + "/t.txt", "cat 1 2 3\ndog 4 5 6\n");
        StaticTable t = load_static_table(dir + "/t.txt");
        CHECK(t.dimension == 3);
        CHECK(t.entries.size() == 2);
        CHECK(t.entries.at("dog")[2] == doctest::Approx(6.0));
    }

    SUBCASE("mixed arity fails with the line number") {
        write_file(dir + "/bad.txt", "cat 1 2 3\ndog 4 5\n");
        CHECK_THROWS_WITH_AS(load_static_table(dir + "/bad.txt"), doctest::Contains(":2"),
                             std::runtime_error);
    }

    SUBCASE("empty file fails") {
        write_file(dir + "/empty.txt", "");
        CHECK_THROWS_AS(load_static_table(dir + "/empty.txt"), std::runtime_error);
    }

    SUBCASE("100-d table loads at the static-encoder scale") {
        std::string line = "word";
        for (int i = 0; i < 100; ++i) line += " " + fmt_double(0.01 * i);
        write_file(dir + "/vectors100.txt", line + "\n");
        CHECK(load_static_table(dir + "/vectors100.txt").dimension == 100);
    }
}

namespace {

StaticTable tiny_table() {
    StaticTable t;
    t.dimension = 2;
    t.entries["aa"] = Eigen::Vector2d(1.0, 0.0);
    t.entries["bb"] = Eigen::Vector2d(0.0, 1.0);
    t.entries["cc"] = Eigen::Vector2d(2.0, -4.0);
    return t;
}

}  // namespace

TEST_CASE("embed_text_static averages in-vocabulary tokens") {
    StaticTable t = tiny_table();

    CHECK(embed_text_static(t, "aa") == t.entries["aa"]);  // mean of one

    Eigen::VectorXd mid = embed_text_static(t, "aa bb");
    CHECK(mid[0] == doctest::Approx(0.5));
    CHECK(mid[1] == doctest::Approx(0.5));

    // three known + two unknown vs an independent sum/divide oracle
    Eigen::VectorXd got = embed_text_static(t, "aa zz bb qq cc");
    Eigen::Vector2d oracle = Eigen::Vector2d::Zero();
    for (const char* w : {"aa", "bb", "cc"}) oracle += t.entries.at(w);
    oracle /= 3.0;
    CHECK((got - oracle).norm() == doctest::Approx(0.0).epsilon(1e-15));

    CHECK(embed_text_static(t, "").isZero());
    CHECK(embed_text_static(t, "zz qq").isZero());
}

TEST_CASE("embed_text_static is order-invariant and stays in the convex hull") {
    RngStream rng(99, {static_cast<std::uint64_t>(StreamUse::test), 3});
    StaticTable t;
    t.dimension = 5;
    std::vector<std::string> vocab;
    for (int w = 0; w < 12; ++w) {
        std::string word = "w" + std::to_string(w);
        vocab.push_back(word);
        Eigen::VectorXd v(5);
        for (int i = 0; i < 5; ++i) v[i] = rng.uniform(-2, 2);
        t.entries[word] = v;
    }
    for (int it = 0; it < 50; ++it) {
        std::vector<std::string> words;
        int n = 1 + static_cast<int>(rng.uniform_int(8));
        for (int i = 0; i < n; ++i) words.push_back(vocab[rng.uniform_int(vocab.size())]);
        std::string text;
        for (const auto& w : words) text += w + " ";
        Eigen::VectorXd base = embed_text_static(t, text);

        rng.shuffle(words);
        std::string shuffled;
        for (const auto& w : words) shuffled += w + " ";
        CHECK((embed_text_static(t, shuffled) - base).lpNorm<Eigen::Infinity>() <= 1e-12);

        Eigen::VectorXd lo = t.entries[words[0]], hi = t.entries[words[0]];
        for (const auto& w : words) {
            lo = lo.cwiseMin(t.entries[w]);
            hi = hi.cwiseMax(t.entries[w]);
        }
        for (int i = 0; i < 5; ++i) {
            CHECK(base[i] >= lo[i] - 1e-12);
            CHECK(base[i] <= hi[i] + 1e-12);
        }
    }
}

TEST_CASE("contextual store loads, rejects duplicates, honors the header") {
    std::string dir = testutil::scratch_dir("store");

    SUBCASE("two 768-d records at the contextual-encoder scale") {
        std::string v;
        for (int i = 0; i < 768; ++i) v += (i ? "," : "") + fmt_double(0.001 * i);
        write_file(dir + "/s.jsonl",
                   "{\"node_id\":\"n1\",\"source\":\"profile\",\"vec\":[" + v + "]}\n" +
                       "{\"node_id\":\"n1\",\"source\":\"post\",\"vec\":[" + v + "]}\n");
        ContextualStore s = load_contextual_store(dir + "/s.jsonl");
        CHECK(s.dimension == 768);
        CHECK(s.entries.size() == 2);
        CHECK(s.find("n1", TextSource::profile) != nullptr);
        CHECK(s.find("n1", TextSource::post) != nullptr);
        CHECK(s.find("n2", TextSource::post) == nullptr);
    }

    SUBCASE("duplicate key names the offender") {
        write_file(dir + "/dup.jsonl",
                   "{\"node_id\":\"n1\",\"source\":\"post\",\"vec\":[1,2]}\n"
                   "{\"node_id\":\"n1\",\"source\":\"post\",\"vec\":[3,4]}\n");
        CHECK_THROWS_WITH_AS(load_contextual_store(dir + "/dup.jsonl"), doctest::Contains("n1"),
                             std::runtime_error);
    }

    SUBCASE("empty store requires the dimension header") {
        write_file(dir + "/empty.jsonl", "{\"dimension\":16}\n");
        ContextualStore s = load_contextual_store(dir + "/empty.jsonl");
        CHECK(s.dimension == 16);
        CHECK(s.entries.empty());

        write_file(dir + "/headerless.jsonl", "");
        CHECK_THROWS_AS(load_contextual_store(dir + "/headerless.jsonl"), std::runtime_error);
    }

    SUBCASE("arity mismatch fails") {
        write_file(dir + "/arity.jsonl",
                   "{\"node_id\":\"a\",\"source\":\"post\",\"vec\":[1,2]}\n"
                   "{\"node_id\":\"b\",\"source\":\"post\",\"vec\":[1,2,3]}\n");
        CHECK_THROWS_AS(load_contextual_store(dir + "/arity.jsonl"), std::runtime_error);
    }
}

TEST_CASE("text_segments follows the source flags") {
    StaticTable table = tiny_table();
    ContextualStore store;
    store.dimension = 4;
    store.entries[ContextualStore::key("u1", TextSource::post)] =
        Eigen::Vector4d(1.0, 2.0, 3.0, 4.0);

    RawNode node;
    node.id = "u1";
    node.profile_text = "aa";
    node.post_text = "bb";

    SUBCASE("both sources disabled: absent segments regardless of encoder") {
        for (Encoder enc : {Encoder::static_, Encoder::contextual}) {
            TextConfig cfg{enc, false, false};
            TextSegments seg = text_segments(cfg, node, &table, &store);
            CHECK(!seg.profile.has_value());
            CHECK(!seg.post.has_value());
        }
    }

    SUBCASE("static profile lookup embeds the bio") {
        TextConfig cfg{Encoder::static_, true, false};
        TextSegments seg = text_segments(cfg, node, &table, nullptr);
        REQUIRE(seg.profile.has_value());
        CHECK(*seg.profile == table.entries["aa"]);
        CHECK(!seg.post.has_value());
    }

    SUBCASE("contextual miss yields the zero vector of the store dimension") {
        TextConfig cfg{Encoder::contextual, true, true};
        TextSegments seg = text_segments(cfg, node, nullptr, &store);
        REQUIRE(seg.profile.has_value());  // no profile entry for u1
        CHECK(seg.profile->isZero());
        CHECK(seg.profile->size() == 4);
        REQUIRE(seg.post.has_value());
        CHECK(*seg.post == store.entries.at(ContextualStore::key("u1", TextSource::post)));
    }

    SUBCASE("missing required source is a configuration error") {
        TextConfig cfg{Encoder::contextual, true, false};
        CHECK_THROWS_AS(text_segments(cfg, node, &table, nullptr), std::runtime_error);
        TextConfig cfg2{Encoder::static_, false, true};
        CHECK_THROWS_AS(text_segments(cfg2, node, nullptr, &store), std::runtime_error);
    }
}

TEST_CASE("store round-trips through save/load") {
    ContextualStore s;
    s.dimension = 3;
    RngStream rng(5, {static_cast<std::uint64_t>(StreamUse::test), 4});
    for (int i = 0; i < 10; ++i) {
        Eigen::VectorXd v(3);
        for (int k = 0; k < 3; ++k) v[k] = rng.uniform(-1, 1);
        s.entries[ContextualStore::key("n" + std::to_string(i),
                                       i % 2 ? TextSource::post : TextSource::profile)] = v;
    }
    std::string dir = testutil::scratch_dir("store_rt");
    save_contextual_store(s, dir + "/s.jsonl");
    ContextualStore back = load_contextual_store(dir + "/s.jsonl");
    REQUIRE(back.entries.size() == s.entries.size());
    CHECK(back.dimension == 3);
    for (const auto& [k, v] : s.entries) {
        REQUIRE(back.entries.count(k) == 1);
        CHECK((back.entries.at(k) - v).norm() == 0.0);
    }
}
