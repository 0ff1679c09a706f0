#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tipmine/content_rank.hpp"
#include "tipmine/hashing.hpp"

using namespace tipmine;

namespace {

Sentence make_sentence(std::string id, std::vector<std::string> tokens,
                       std::int64_t approvals = 0) {
    Sentence s;
    s.sentence_id = std::move(id);
    s.song_id = "song";
    s.review_id = s.sentence_id;
    s.approvals = approvals;
    s.tokens = std::move(tokens);
    for (const auto& t : s.tokens) {
        if (!s.text.empty()) s.text += ' ';
        s.text += t;
    }
    return s;
}

// Independent fixed-point oracle: solve (I - d*B) W = (1-d)/M * 1 where
// B[i][j] is node j's normalized contribution to node i.
std::vector<double> rank_oracle(const SentenceGraph& g, const RankConfig& cfg) {
    const std::size_t m = g.size();
    std::vector<std::vector<double>> a(m, std::vector<double>(m, 0.0));
    std::vector<double> rhs(m, (1.0 - cfg.damping) / static_cast<double>(m));
    for (std::size_t i = 0; i < m; ++i) {
        a[i][i] += 1.0;
        for (const auto& e : g.adj[i])
            a[i][e.to] -= cfg.damping * e.weight / g.out_sum[e.to];
    }
    return oracles::solve_linear(a, rhs);
}

std::vector<Sentence> random_sentences(int n, std::uint64_t seed) {
    static const char* pool[] = {"a", "b", "c", "d", "e", "f", "g", "h"};
    Uniform01 rng(seed);
    std::vector<Sentence> out;
    for (int i = 0; i < n; ++i) {
        std::vector<std::string> toks;
        const int len = 2 + static_cast<int>(rng.next() * 4);
        for (int t = 0; t < len; ++t)
            toks.push_back(pool[static_cast<int>(rng.next() * 8)]);
        const std::int64_t b = static_cast<std::int64_t>(rng.next() * 30.0);
        out.push_back(make_sentence("s" + std::to_string(i), toks, b));
    }
    return out;
}

}  // namespace

TEST_CASE("copy_count follows the log rule with clamping", "[content_rank]") {
    CHECK(copy_count(0, 10) == 1);
    CHECK(copy_count(1, 10) == 1);
    CHECK(copy_count(9, 10) == 1);
    CHECK(copy_count(10, 10) == 2);
    CHECK(copy_count(99, 10) == 2);
    CHECK(copy_count(100, 10) == 3);
    CHECK(copy_count(999, 10) == 3);
    CHECK(copy_count(1000, 10) == 4);
    CHECK(copy_count(7, 2) == 3);
    CHECK(copy_count(8, 2) == 4);
    CHECK_THROWS_AS(copy_count(5, 1.0), UsageError);
}

TEST_CASE("copy_count is constant between powers and steps at them",
          "[content_rank]") {
    for (double m : {10.0, 2.0, 3.0}) {
        std::int64_t power = 1;
        for (int p = 0; p < 6; ++p) {
            const std::int64_t lo = power;
            power *= static_cast<std::int64_t>(m);
            const std::int64_t hi = power - 1;
            const int at_lo = copy_count(lo, m);
            CHECK(copy_count(hi, m) == at_lo);
            CHECK(copy_count(power, m) == at_lo + 1);
        }
    }
}

TEST_CASE("edge_weight evaluates the shared-type formula", "[content_rank]") {
    CHECK(edge_weight({"a", "b", "c"}, {"b", "c", "d"}) ==
          Catch::Approx(0.9102392266268373).epsilon(1e-12));
    CHECK(edge_weight({"a", "b"}, {"a", "b"}) ==
          Catch::Approx(1.4426950408889634).epsilon(1e-12));
    CHECK(edge_weight({"a", "b"}, {"c", "d"}) == 0.0);
    // repeated tokens count once: {a,a,b} has token types {a,b}
    CHECK(edge_weight({"a", "a", "b"}, {"a", "b", "c"}) ==
          Catch::Approx(2.0 / (std::log(3.0) + std::log(3.0))).epsilon(1e-12));
    CHECK_THROWS_AS(edge_weight({"a"}, {"a", "b"}), UsageError);
    CHECK_THROWS_AS(edge_weight({"a", "b"}, {}), UsageError);
}

TEST_CASE("build_graph expands copies and links shared-word pairs",
          "[content_rank]") {
    const std::vector<Sentence> two = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 100),
    };
    const SentenceGraph g = build_graph(two);
    CHECK(g.size() == 4);
    CHECK(g.sentences.size() == 2);

    // copies of the same sentence are never linked
    for (std::size_t i = 0; i < g.size(); ++i)
        for (const auto& e : g.adj[i])
            CHECK(g.nodes[i].sentence != g.nodes[e.to].sentence);

    // symmetric adjacency
    for (std::size_t i = 0; i < g.size(); ++i)
        for (const auto& e : g.adj[i]) {
            bool back = false;
            for (const auto& r : g.adj[e.to])
                if (r.to == i && r.weight == e.weight) back = true;
            CHECK(back);
        }
}

TEST_CASE("build_graph covers complete and isolated shapes", "[content_rank]") {
    const std::vector<Sentence> triangle = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 0),
        make_sentence("s3", {"c", "a"}, 0),
    };
    const SentenceGraph g = build_graph(triangle);
    CHECK(g.size() == 3);
    for (std::size_t i = 0; i < g.size(); ++i) CHECK(g.adj[i].size() == 2);

    const std::vector<Sentence> disjoint = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"c", "d"}, 0),
    };
    const SentenceGraph iso = build_graph(disjoint);
    CHECK(iso.size() == 2);
    CHECK(iso.adj[0].empty());
    CHECK(iso.adj[1].empty());

    // short sentences are skipped; none eligible is an error
    const std::vector<Sentence> shorties = {make_sentence("s1", {"a"}, 0)};
    CHECK_THROWS_AS(build_graph(shorties), DataError);
}

TEST_CASE("rank_graph symmetric fixed points", "[content_rank]") {
    const std::vector<Sentence> triangle = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 0),
        make_sentence("s3", {"c", "a"}, 0),
    };
    const SentenceGraph g = build_graph(triangle);
    const RankResult r = rank_graph(g);
    REQUIRE(r.converged);
    for (double w : r.weights)
        CHECK(w == Catch::Approx(1.0 / 3.0).margin(1e-9));

    const std::vector<Sentence> lone = {make_sentence("s1", {"a", "b"}, 0)};
    const SentenceGraph single = build_graph(lone);
    const RankResult rs = rank_graph(single);
    REQUIRE(rs.weights.size() == 1);
    CHECK(rs.weights[0] == Catch::Approx(0.15).margin(1e-12));
}

TEST_CASE("rank_graph matches a direct linear solve", "[content_rank]") {
    // fixed asymmetric shape: a 5-node graph from 4 sentences, one repeated
    const std::vector<Sentence> four = {
        make_sentence("s1", {"a", "b", "c"}, 0),
        make_sentence("s2", {"b", "c", "d", "e"}, 10),
        make_sentence("s3", {"c", "d", "f"}, 0),
        make_sentence("s4", {"a", "f"}, 0),
    };
    RankConfig cfg;
    cfg.tolerance = 1e-12;
    const SentenceGraph g = build_graph(four, cfg);
    REQUIRE(g.size() == 5);
    const RankResult r = rank_graph(g, cfg);
    const auto expect = rank_oracle(g, cfg);
    for (std::size_t i = 0; i < g.size(); ++i)
        CHECK(r.weights[i] == Catch::Approx(expect[i]).margin(1e-8));
}

TEST_CASE("rank_graph agrees with the solver on random small graphs",
          "[content_rank]") {
    RankConfig cfg;
    cfg.tolerance = 1e-12;
    cfg.max_iterations = 2000;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const auto sentences = random_sentences(6, seed);
        const SentenceGraph g = build_graph(sentences, cfg);
        if (g.size() > 20) continue;
        const RankResult r = rank_graph(g, cfg);
        const auto expect = rank_oracle(g, cfg);
        const double floor_term =
            (1.0 - cfg.damping) / static_cast<double>(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) {
            CHECK(r.weights[i] == Catch::Approx(expect[i]).margin(1e-8));
            CHECK(r.weights[i] >= floor_term - 1e-12);
        }
    }
}

TEST_CASE("isolated nodes settle at the additive floor", "[content_rank]") {
    const std::vector<Sentence> mixed = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 0),
        make_sentence("s3", {"x", "y"}, 0),
    };
    const SentenceGraph g = build_graph(mixed);
    const RankResult r = rank_graph(g);
    CHECK(r.weights[2] == Catch::Approx(0.15 / 3.0).margin(1e-12));
}

TEST_CASE("aggregate sums copy weights per sentence", "[content_rank]") {
    const std::vector<Sentence> two = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 100),
    };
    const SentenceGraph g = build_graph(two);
    REQUIRE(g.size() == 4);

    RankResult fake;
    fake.weights = {0.4, 0.2, 0.3, 0.1};
    const ContentScores scores = aggregate(fake, g);
    CHECK(scores.at("s1") == Catch::Approx(0.4).margin(1e-15));
    CHECK(scores.at("s2") == Catch::Approx(0.6).margin(1e-15));

    RankResult short_weights;
    short_weights.weights = {0.5};
    CHECK_THROWS_AS(aggregate(short_weights, g), UsageError);
}

TEST_CASE("aggregation conserves ranked mass", "[content_rank]") {
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        const auto sentences = random_sentences(8, seed);
        const SentenceGraph g = build_graph(sentences);
        const RankResult r = rank_graph(g);
        const ContentScores scores = aggregate(r, g);
        double node_total = 0.0, score_total = 0.0;
        for (double w : r.weights) node_total += w;
        for (const auto& [id, v] : scores) {
            CHECK(v >= 0.0);
            score_total += v;
        }
        CHECK(score_total == Catch::Approx(node_total).epsilon(1e-12));
    }
}

TEST_CASE("scores are invariant to sentence input order", "[content_rank]") {
    auto sentences = random_sentences(7, 77);
    const SentenceGraph g1 = build_graph(sentences);
    const ContentScores s1 = aggregate(rank_graph(g1), g1);

    std::reverse(sentences.begin(), sentences.end());
    const SentenceGraph g2 = build_graph(sentences);
    const ContentScores s2 = aggregate(rank_graph(g2), g2);

    REQUIRE(s1.size() == s2.size());
    for (const auto& [id, v] : s1)
        CHECK(v == Catch::Approx(s2.at(id)).margin(1e-9));
}

TEST_CASE("non-convergence reports the last iterate", "[content_rank]") {
    const auto sentences = random_sentences(8, 99);
    RankConfig strict;
    strict.tolerance = 1e-15;
    strict.max_iterations = 2;
    const SentenceGraph g = build_graph(sentences, strict);
    const RankResult r = rank_graph(g, strict);
    CHECK(!r.converged);
    CHECK(r.iterations == 2);
    CHECK(r.residual > 0.0);
    REQUIRE(r.weights.size() == g.size());
    for (double w : r.weights) CHECK(std::isfinite(w));
}

TEST_CASE("graph dump lists nodes and symmetric edges once", "[content_rank]") {
    const std::vector<Sentence> two = {
        make_sentence("s1", {"a", "b"}, 0),
        make_sentence("s2", {"b", "c"}, 0),
    };
    const SentenceGraph g = build_graph(two);
    const std::string dump = dump_graph(g);
    CHECK(dump.find("node 0 sentence s1 copy 0") != std::string::npos);
    CHECK(dump.find("node 1 sentence s2 copy 0") != std::string::npos);
    CHECK(dump.find("edge 0 1 ") != std::string::npos);
}
