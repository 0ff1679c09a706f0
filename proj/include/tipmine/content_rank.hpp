#pragma once

// Per-song content ranking: sentences become graph nodes repeated by approval
// count, edges carry shared-word weights, and a damped iteration assigns node
// weights that are summed back per sentence.

#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tipmine/corpus.hpp"
#include "tipmine/error.hpp"

namespace tipmine {

struct RankConfig {
    double base = 10.0;       // approval log base m, > 1
    double damping = 0.85;    // d in (0,1)
    double tolerance = 1e-6;  // max absolute per-node change to stop
    int max_iterations = 100;
};

// Total copies for a sentence with b approvals: 1 + floor(log_m(max(b,1))).
// floor is taken on exact integer powers of m, not on the rounded log, so
// b = m^p lands in the higher bucket (log10(1000) computing to 2.999...
// must still yield 4 copies).
inline int copy_count(std::int64_t b, double m) {
    if (m <= 1.0) throw UsageError("approval log base must exceed 1");
    const double v = static_cast<double>(b < 1 ? 1 : b);
    int k = static_cast<int>(std::floor(std::log(v) / std::log(m)));
    if (k < 0) k = 0;
    auto power = [m](int e) {
        long double p = 1.0L;
        for (int i = 0; i < e; ++i) p *= static_cast<long double>(m);
        return p;
    };
    const long double guard = static_cast<long double>(v) * (1.0L + 1e-12L);
    while (k > 0 && power(k) > guard) --k;
    while (power(k + 1) <= guard) ++k;
    return 1 + k;
}

// Eq-style shared-word weight: distinct shared token types over the sum of
// log sentence lengths (natural log). Zero when the sets are disjoint.
inline double edge_weight(const std::vector<std::string>& tokens_i,
                          const std::vector<std::string>& tokens_j) {
    if (tokens_i.size() < 2 || tokens_j.size() < 2)
        throw UsageError("edge_weight requires at least 2 tokens per sentence");
    const std::set<std::string> a(tokens_i.begin(), tokens_i.end());
    const std::set<std::string> b(tokens_j.begin(), tokens_j.end());
    std::size_t shared = 0;
    for (const auto& t : a) shared += b.count(t);
    if (shared == 0) return 0.0;
    return static_cast<double>(shared) /
           (std::log(static_cast<double>(tokens_i.size())) +
            std::log(static_cast<double>(tokens_j.size())));
}

struct GraphNode {
    std::size_t sentence = 0;  // index into the graph's sentence list
    int copy = 0;
};

struct GraphEdge {
    std::size_t to = 0;
    double weight = 0.0;
};

struct SentenceGraph {
    std::vector<const Sentence*> sentences;      // distinct sources, input order
    std::vector<GraphNode> nodes;                // size M
    std::vector<std::vector<GraphEdge>> adj;     // symmetric adjacency
    std::vector<double> out_sum;                 // per node, sum of its edge weights

    std::size_t size() const { return nodes.size(); }
};

// Expands each eligible sentence into its copies and links node pairs from
// different sentences that share at least one token type. Copies of one
// sentence are never linked to each other.
inline SentenceGraph build_graph(const std::vector<Sentence>& sentences,
                                 const RankConfig& cfg = {}) {
    SentenceGraph g;
    for (const auto& s : sentences)
        if (s.tokens.size() >= 2) g.sentences.push_back(&s);
    if (g.sentences.empty())
        throw DataError("no sentences with at least 2 tokens to rank");

    std::vector<int> copies(g.sentences.size());
    for (std::size_t i = 0; i < g.sentences.size(); ++i) {
        copies[i] = copy_count(g.sentences[i]->approvals, cfg.base);
        for (int c = 0; c < copies[i]; ++c) g.nodes.push_back({i, c});
    }

    const std::size_t n = g.sentences.size();
    std::vector<std::vector<double>> w(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            w[i][j] = w[j][i] =
                edge_weight(g.sentences[i]->tokens, g.sentences[j]->tokens);

    g.adj.resize(g.nodes.size());
    g.out_sum.assign(g.nodes.size(), 0.0);
    for (std::size_t a = 0; a < g.nodes.size(); ++a) {
        for (std::size_t b = a + 1; b < g.nodes.size(); ++b) {
            const std::size_t si = g.nodes[a].sentence;
            const std::size_t sj = g.nodes[b].sentence;
            if (si == sj) continue;
            const double e = w[si][sj];
            if (e <= 0.0) continue;
            g.adj[a].push_back({b, e});
            g.adj[b].push_back({a, e});
            g.out_sum[a] += e;
            g.out_sum[b] += e;
        }
    }
    return g;
}

struct RankResult {
    std::vector<double> weights;  // per node
    bool converged = true;
    int iterations = 0;
    double residual = 0.0;  // final max absolute change
};

// Damped iteration from the uniform start. Isolated nodes settle at
// (1-d)/M immediately. Non-convergence is reported but the last iterate is
// still returned.
inline RankResult rank_graph(const SentenceGraph& g,
                             const RankConfig& cfg = {}) {
    const std::size_t m = g.size();
    if (m == 0) throw DataError("empty graph");
    const double floor_term = (1.0 - cfg.damping) / static_cast<double>(m);

    RankResult res;
    res.weights.assign(m, 1.0 / static_cast<double>(m));
    std::vector<double> next(m);
    for (int it = 0; it < cfg.max_iterations; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            double acc = 0.0;
            for (const auto& e : g.adj[i])
                acc += e.weight / g.out_sum[e.to] * res.weights[e.to];
            next[i] = floor_term + cfg.damping * acc;
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < m; ++i)
            delta = std::max(delta, std::abs(next[i] - res.weights[i]));
        res.weights.swap(next);
        res.iterations = it + 1;
        res.residual = delta;
        if (delta < cfg.tolerance) return res;
    }
    res.converged = false;
    return res;
}

using ContentScores = std::map<std::string, double>;

// Score_a of a sentence is the sum of its copies' node weights.
inline ContentScores aggregate(const RankResult& rank,
                               const SentenceGraph& g) {
    if (rank.weights.size() != g.size())
        throw UsageError("weights do not cover the graph");
    ContentScores scores;
    for (const auto* s : g.sentences) scores[s->sentence_id] = 0.0;
    for (std::size_t i = 0; i < g.nodes.size(); ++i)
        scores[g.sentences[g.nodes[i].sentence]->sentence_id] +=
            rank.weights[i];
    return scores;
}

// Line-oriented dump for inspection: nodes then edges.
inline std::string dump_graph(const SentenceGraph& g) {
    std::string out;
    char buf[64];
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        out += "node " + std::to_string(i) + " sentence " +
               g.sentences[g.nodes[i].sentence]->sentence_id + " copy " +
               std::to_string(g.nodes[i].copy) + "\n";
    }
    for (std::size_t i = 0; i < g.nodes.size(); ++i) {
        for (const auto& e : g.adj[i]) {
            if (e.to < i) continue;
            std::snprintf(buf, sizeof(buf), "%.12g", e.weight);
            out += "edge " + std::to_string(i) + " " + std::to_string(e.to) +
                   " " + buf + "\n";
        }
    }
    return out;
}

}  // namespace tipmine
