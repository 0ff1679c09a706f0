#pragma once

// Evaluation: precision@k, Distinct-n, Fleiss' kappa, and the dataset split
// protocol (fixed-size test block, 8:2 train/validation remainder).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tipmine/error.hpp"
#include "tipmine/hashing.hpp"

namespace tipmine {

// True tips among the first min(k, |selection|) ids, divided by k. Ids
// without a label count as non-tips unless strict.
inline double precision_at_k(const std::vector<std::string>& selection,
                             const std::map<std::string, bool>& is_tip, int k,
                             bool strict = false) {
    if (k < 1) throw UsageError("k must be at least 1");
    const std::size_t upto = std::min<std::size_t>(k, selection.size());
    std::size_t hits = 0;
    for (std::size_t i = 0; i < upto; ++i) {
        auto it = is_tip.find(selection[i]);
        if (it == is_tip.end()) {
            if (strict)
                throw DataError("unlabeled id in selection: " + selection[i]);
            continue;
        }
        if (it->second) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(k);
}

// Unweighted mean over songs.
inline double macro_precision_at_k(
    const std::map<std::string, std::vector<std::string>>& selections,
    const std::map<std::string, bool>& is_tip, int k, bool strict = false) {
    if (selections.empty()) throw DataError("no selections to evaluate");
    double sum = 0.0;
    for (const auto& [song, sel] : selections)
        sum += precision_at_k(sel, is_tip, k, strict);
    return sum / static_cast<double>(selections.size());
}

// Distinct n-grams across all tips over total n-gram occurrences.
inline double distinct_n(const std::vector<std::vector<std::string>>& tips,
                         int n) {
    if (n < 1) throw UsageError("n must be at least 1");
    std::set<std::vector<std::string>> distinct;
    std::size_t total = 0;
    for (const auto& tokens : tips) {
        if (tokens.size() < static_cast<std::size_t>(n)) continue;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            distinct.insert(std::vector<std::string>(tokens.begin() + i,
                                                     tokens.begin() + i + n));
            ++total;
        }
    }
    if (total == 0)
        throw DataError("no n-grams of order " + std::to_string(n));
    return static_cast<double>(distinct.size()) / static_cast<double>(total);
}

// Standard Fleiss' kappa over an item x rater label matrix. The degenerate
// case where expected agreement reaches 1 returns 1.0 on perfect agreement.
inline double fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
    if (ratings.empty()) throw DataError("no rated items");
    const std::size_t raters = ratings[0].size();
    if (raters < 2) throw DataError("need at least 2 raters");
    for (const auto& row : ratings)
        if (row.size() != raters)
            throw DataError("ragged rating matrix");

    int max_label = 0;
    for (const auto& row : ratings)
        for (int v : row) max_label = std::max(max_label, v);
    const int categories = max_label + 1;

    const double n = static_cast<double>(raters);
    const double items = static_cast<double>(ratings.size());
    // sum raw counts and divide once so perfect agreement lands on 1.0 exactly
    std::vector<double> category_total(categories, 0.0);
    double total_agree = 0.0;
    for (const auto& row : ratings) {
        std::vector<double> counts(categories, 0.0);
        for (int v : row) {
            if (v < 0) throw DataError("negative rating label");
            counts[v] += 1.0;
        }
        for (int c = 0; c < categories; ++c) {
            total_agree += counts[c] * (counts[c] - 1.0);
            category_total[c] += counts[c];
        }
    }
    const double p_bar = total_agree / (n * (n - 1.0) * items);
    double p_exp = 0.0;
    for (double total : category_total) {
        const double share = total / (n * items);
        p_exp += share * share;
    }

    if (1.0 - p_exp <= 0.0) return p_bar >= 1.0 ? 1.0 : 0.0;
    return (p_bar - p_exp) / (1.0 - p_exp);
}

struct SplitConfig {
    int test_songs = 9;
    int test_sentences_per_song = 50;
    double train_ratio = 0.8;  // applied to the remainder, floor rule
    std::uint64_t seed = 0;
};

struct SplitManifest {
    std::uint64_t seed = 0;
    std::vector<std::string> test_songs;
    std::vector<std::string> test;  // sentence ids
    std::vector<std::string> train;
    std::vector<std::string> validation;
};

// Deterministic split: the configured number of test songs is drawn first and
// the per-song sentence quota drawn from each; every remaining sentence goes
// to train or validation with a floored 8:2 count. Input order never matters:
// ids are sorted before the seeded shuffle.
inline SplitManifest make_splits(
    const std::map<std::string, std::vector<std::string>>& by_song,
    const SplitConfig& cfg = {}) {
    SplitManifest m;
    m.seed = cfg.seed;

    std::vector<std::string> songs;
    for (const auto& [song, ids] : by_song) songs.push_back(song);
    std::sort(songs.begin(), songs.end());
    std::size_t eligible = 0;
    for (const auto& s : songs)
        if (by_song.at(s).size() >=
            static_cast<std::size_t>(cfg.test_sentences_per_song))
            ++eligible;
    if (songs.size() < static_cast<std::size_t>(cfg.test_songs) ||
        eligible < static_cast<std::size_t>(cfg.test_songs))
        throw DataError("not enough songs with enough sentences for the split");

    seeded_shuffle(songs, cfg.seed);
    std::set<std::string> test_song_set;
    for (const auto& s : songs) {
        if (test_song_set.size() >= static_cast<std::size_t>(cfg.test_songs))
            break;
        if (by_song.at(s).size() >=
            static_cast<std::size_t>(cfg.test_sentences_per_song))
            test_song_set.insert(s);
    }
    m.test_songs.assign(test_song_set.begin(), test_song_set.end());
    std::sort(m.test_songs.begin(), m.test_songs.end());

    std::vector<std::string> rest;
    for (const auto& [song, ids] : by_song) {
        std::vector<std::string> pool = ids;
        std::sort(pool.begin(), pool.end());
        if (test_song_set.count(song)) {
            seeded_shuffle(pool, cfg.seed ^ fnv1a64(song));
            for (int i = 0; i < cfg.test_sentences_per_song; ++i)
                m.test.push_back(pool[i]);
            for (std::size_t i = cfg.test_sentences_per_song; i < pool.size();
                 ++i)
                rest.push_back(pool[i]);
        } else {
            for (auto& id : pool) rest.push_back(std::move(id));
        }
    }
    std::sort(rest.begin(), rest.end());
    seeded_shuffle(rest, cfg.seed ^ 0xA5A5A5A5A5A5A5A5ULL);
    const std::size_t train_n = static_cast<std::size_t>(
        std::floor(cfg.train_ratio * static_cast<double>(rest.size())));
    m.train.assign(rest.begin(), rest.begin() + train_n);
    m.validation.assign(rest.begin() + train_n, rest.end());
    std::sort(m.test.begin(), m.test.end());
    std::sort(m.train.begin(), m.train.end());
    std::sort(m.validation.begin(), m.validation.end());
    return m;
}

}  // namespace tipmine
