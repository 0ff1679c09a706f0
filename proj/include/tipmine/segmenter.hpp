#pragma once

// Punctuation correction and sentence splitting. Correction substitutes at
// existing punctuation positions only; it never inserts new boundaries.

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tipmine/corpus.hpp"
#include "tipmine/error.hpp"
#include "tipmine/linear.hpp"
#include "tipmine/serde.hpp"
#include "tipmine/tokenize.hpp"
#include "tipmine/utf8.hpp"

namespace tipmine {

enum class PunctClass : int { FullStop = 0, Comma = 1, Empty = 2 };

inline const char* punct_class_name(PunctClass c) {
    switch (c) {
        case PunctClass::FullStop: return "full_stop";
        case PunctClass::Comma: return "comma";
        default: return "empty";
    }
}

inline PunctClass parse_punct_class(std::string_view s) {
    if (s == "full_stop") return PunctClass::FullStop;
    if (s == "comma") return PunctClass::Comma;
    if (s == "empty") return PunctClass::Empty;
    throw DataError("unknown punctuation label: " + std::string(s));
}

struct SegmenterConfig {
    int window = 8;                   // context characters per side
    std::vector<int> orders = {1, 2, 3};
    double l2 = 1e-4;
    int max_epochs = 200;
    std::uint64_t seed = 0;
    std::u32string full_stops = U"。．.！!？?";  // 。．.！!？?
    std::u32string commas = U"，,";                          // ，,
    int min_tokens = 2;
};

// char_index counts Unicode codepoints, not bytes.
struct PunctSite {
    std::string review_id;
    std::size_t char_index = 0;
    PunctClass original = PunctClass::FullStop;
    std::u32string left;
    std::u32string right;
};

struct PunctDecision {
    PunctClass label = PunctClass::FullStop;
    std::array<double, 3> proba{};
};

class PunctPredictor {
public:
    virtual ~PunctPredictor() = default;
    virtual PunctDecision classify(const PunctSite& site) const = 0;
};

namespace detail {

inline bool is_candidate(char32_t cp, const SegmenterConfig& cfg,
                         PunctClass* cls) {
    if (cfg.full_stops.find(cp) != std::u32string::npos) {
        if (cls) *cls = PunctClass::FullStop;
        return true;
    }
    if (cfg.commas.find(cp) != std::u32string::npos) {
        if (cls) *cls = PunctClass::Comma;
        return true;
    }
    return false;
}

inline std::u32string slice(const std::u32string& s, std::size_t lo,
                            std::size_t hi) {
    lo = std::min(lo, s.size());
    hi = std::min(hi, s.size());
    return lo < hi ? s.substr(lo, hi - lo) : std::u32string();
}

// Side-tagged character n-grams of the configured orders.
inline void context_ngrams(const std::u32string& ctx, char side,
                           const std::vector<int>& orders,
                           std::vector<std::string>& out) {
    for (int n : orders) {
        if (n <= 0) continue;
        for (std::size_t i = 0; i + n <= ctx.size(); ++i) {
            std::string key(1, side);
            key.push_back(':');
            key += utf8::encode(ctx.substr(i, n));
            out.push_back(std::move(key));
        }
    }
}

inline std::vector<std::string> site_ngrams(const PunctSite& site,
                                            const std::vector<int>& orders) {
    std::vector<std::string> grams;
    context_ngrams(site.left, 'L', orders, grams);
    context_ngrams(site.right, 'R', orders, grams);
    return grams;
}

}  // namespace detail

// One site per candidate punctuation character, in text order, with context
// windows clipped at the review edges.
inline std::vector<PunctSite> extract_sites(const std::string& review_id,
                                            const std::string& text,
                                            const SegmenterConfig& cfg) {
    const std::u32string cps = utf8::decode(text);
    std::vector<PunctSite> sites;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        PunctClass cls;
        if (!detail::is_candidate(cps[i], cfg, &cls)) continue;
        PunctSite s;
        s.review_id = review_id;
        s.char_index = i;
        s.original = cls;
        const std::size_t w = static_cast<std::size_t>(cfg.window);
        s.left = detail::slice(cps, i >= w ? i - w : 0, i);
        s.right = detail::slice(cps, i + 1, i + 1 + w);
        sites.push_back(std::move(s));
    }
    return sites;
}

struct PunctModel {
    SegmenterConfig config;
    std::map<std::string, std::uint32_t> vocab;  // n-gram -> feature index
    std::vector<double> weights;                 // (|vocab|+1) x 3, last row bias
    std::array<double, 3> priors{};              // class frequencies in training

    PunctDecision classify(const PunctSite& site) const {
        PunctDecision d;
        if (site.left.empty() && site.right.empty()) {
            d.proba = priors;
            d.label = argmax(d.proba);
            return d;
        }
        std::map<std::uint32_t, float> counts;
        for (const auto& g : detail::site_ngrams(site, config.orders)) {
            auto it = vocab.find(g);
            if (it != vocab.end()) counts[it->second] += 1.0f;
        }
        SparseVec feats(counts.begin(), counts.end());
        feats.emplace_back(static_cast<std::uint32_t>(vocab.size()), 1.0f);
        const auto p = predict_proba(weights, 3, feats);
        d.proba = {p[0], p[1], p[2]};
        d.label = argmax(d.proba);
        return d;
    }

    static PunctClass argmax(const std::array<double, 3>& p) {
        int best = 0;
        for (int c = 1; c < 3; ++c)
            if (p[c] > p[best]) best = c;
        return static_cast<PunctClass>(best);
    }
};

class ModelPredictor final : public PunctPredictor {
public:
    explicit ModelPredictor(const PunctModel& model) : model_(model) {}
    PunctDecision classify(const PunctSite& site) const override {
        return model_.classify(site);
    }

private:
    const PunctModel& model_;
};

// Looks decisions up by (review_id, char_index); sites without an entry keep
// their original punctuation.
class MapPredictor final : public PunctPredictor {
public:
    void set(const std::string& review_id, std::size_t char_index,
             PunctClass label) {
        labels_[{review_id, char_index}] = label;
    }

    PunctDecision classify(const PunctSite& site) const override {
        PunctDecision d;
        auto it = labels_.find({site.review_id, site.char_index});
        d.label = it != labels_.end() ? it->second : site.original;
        d.proba[static_cast<int>(d.label)] = 1.0;
        return d;
    }

    std::size_t size() const { return labels_.size(); }

private:
    std::map<std::pair<std::string, std::size_t>, PunctClass> labels_;
};

// Label file: one record per line with review_id, char_index, label.
inline MapPredictor load_external_labels(const std::string& path) {
    MapPredictor pred;
    read_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
        if (!j.is_object() || !j.contains("review_id") ||
            !j.contains("char_index") || !j.contains("label"))
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected review_id, char_index, label");
        pred.set(j.at("review_id").get<std::string>(),
                 j.at("char_index").get<std::size_t>(),
                 parse_punct_class(j.at("label").get<std::string>()));
    });
    return pred;
}

namespace detail {

struct PunctExample {
    PunctSite site;
    PunctClass label;
};

// Labeled sites come from two sources: every candidate punctuation character
// keeps its own class, and every boundary between adjacent non-candidate,
// non-space characters yields an Empty example.
inline std::vector<PunctExample> punct_examples(
    const std::vector<std::string>& lines, const SegmenterConfig& cfg) {
    std::vector<PunctExample> out;
    const std::size_t w = static_cast<std::size_t>(cfg.window);
    for (std::size_t li = 0; li < lines.size(); ++li) {
        const std::string id = "line" + std::to_string(li);
        const std::u32string cps = utf8::decode(lines[li]);
        for (std::size_t i = 0; i < cps.size(); ++i) {
            PunctClass cls;
            if (is_candidate(cps[i], cfg, &cls)) {
                PunctExample ex;
                ex.site.review_id = id;
                ex.site.char_index = i;
                ex.site.original = cls;
                ex.site.left = slice(cps, i >= w ? i - w : 0, i);
                ex.site.right = slice(cps, i + 1, i + 1 + w);
                ex.label = cls;
                out.push_back(std::move(ex));
            }
            if (i + 1 < cps.size() && !is_candidate(cps[i], cfg, nullptr) &&
                !is_candidate(cps[i + 1], cfg, nullptr) && cps[i] != U' ' &&
                cps[i + 1] != U' ') {
                PunctExample ex;
                ex.site.review_id = id;
                ex.site.char_index = i + 1;
                ex.site.original = PunctClass::FullStop;  // unused for Empty rows
                ex.site.left = slice(cps, i + 1 >= w ? i + 1 - w : 0, i + 1);
                ex.site.right = slice(cps, i + 1, i + 1 + w);
                ex.label = PunctClass::Empty;
                out.push_back(std::move(ex));
            }
        }
    }
    return out;
}

}  // namespace detail

// Trains the built-in three-class boundary classifier on punctuated lines.
// Zero-initialized full-batch descent makes the result deterministic.
inline PunctModel train_punct(const std::vector<std::string>& lines,
                              const SegmenterConfig& cfg = {}) {
    auto examples = detail::punct_examples(lines, cfg);
    std::array<std::size_t, 3> counts{};
    for (const auto& ex : examples) counts[static_cast<int>(ex.label)]++;
    std::string missing;
    for (int c = 0; c < 3; ++c) {
        if (counts[c] == 0) {
            if (!missing.empty()) missing += ", ";
            missing += punct_class_name(static_cast<PunctClass>(c));
        }
    }
    if (!missing.empty())
        throw DataError("training corpus missing classes: " + missing);

    PunctModel model;
    model.config = cfg;
    for (const auto& ex : examples)
        for (auto& g : detail::site_ngrams(ex.site, cfg.orders))
            model.vocab.emplace(std::move(g), 0);
    std::uint32_t next = 0;
    for (auto& [gram, idx] : model.vocab) idx = next++;

    std::vector<LabeledExample> rows;
    rows.reserve(examples.size());
    for (const auto& ex : examples) {
        std::map<std::uint32_t, float> feat;
        for (const auto& g : detail::site_ngrams(ex.site, cfg.orders))
            feat[model.vocab.at(g)] += 1.0f;
        LabeledExample row;
        row.features.assign(feat.begin(), feat.end());
        row.features.emplace_back(next, 1.0f);
        row.label = static_cast<int>(ex.label);
        rows.push_back(std::move(row));
    }

    TrainConfig tc;
    tc.l2 = cfg.l2;
    tc.max_epochs = cfg.max_epochs;
    auto res = train_softmax(rows, next + 1, 3, tc);
    model.weights = std::move(res.weights);
    const double total = static_cast<double>(examples.size());
    for (int c = 0; c < 3; ++c) model.priors[c] = counts[c] / total;
    return model;
}

// Rewrites candidate punctuation per the predictor. A prediction matching the
// original's class keeps the original character; otherwise the canonical
// fullwidth mark is substituted or the character deleted.
inline std::string correct_review(const PunctPredictor& pred,
                                  const std::string& review_id,
                                  const std::string& text,
                                  const SegmenterConfig& cfg = {}) {
    const std::u32string cps = utf8::decode(text);
    const std::size_t w = static_cast<std::size_t>(cfg.window);
    std::u32string out;
    out.reserve(cps.size());
    for (std::size_t i = 0; i < cps.size(); ++i) {
        PunctClass cls;
        if (!detail::is_candidate(cps[i], cfg, &cls)) {
            out.push_back(cps[i]);
            continue;
        }
        PunctSite s;
        s.review_id = review_id;
        s.char_index = i;
        s.original = cls;
        s.left = detail::slice(cps, i >= w ? i - w : 0, i);
        s.right = detail::slice(cps, i + 1, i + 1 + w);
        const PunctClass label = pred.classify(s).label;
        if (label == cls) {
            out.push_back(cps[i]);
        } else if (label == PunctClass::FullStop) {
            out.push_back(U'。');
        } else if (label == PunctClass::Comma) {
            out.push_back(U'，');
        }
        // Empty: drop the character
    }
    return utf8::encode(out);
}

// Splits at full-stop characters, keeping each terminator attached to its
// fragment. Fragments with fewer than min_tokens tokens are dropped.
// sentence_id is review_id + "#" + 0-based index over the kept sentences.
inline std::vector<Sentence> split_sentences(const std::string& corrected,
                                             const std::string& song_id,
                                             const std::string& review_id,
                                             std::int64_t approvals,
                                             const SegmenterConfig& cfg = {},
                                             const Tokenizer& tok
                                             = default_tokenizer()) {
    const std::u32string cps = utf8::decode(corrected);
    std::vector<Sentence> sentences;
    std::u32string fragment;
    auto flush = [&]() {
        while (!fragment.empty() && fragment.front() == U' ')
            fragment.erase(fragment.begin());
        while (!fragment.empty() && fragment.back() == U' ')
            fragment.pop_back();
        if (fragment.empty()) return;
        Sentence s;
        s.text = utf8::encode(fragment);
        fragment.clear();
        s.tokens = tok.tokenize(s.text);
        if (s.tokens.size() < static_cast<std::size_t>(cfg.min_tokens)) return;
        s.song_id = song_id;
        s.review_id = review_id;
        s.approvals = approvals;
        s.sentence_id = review_id + "#" + std::to_string(sentences.size());
        sentences.push_back(std::move(s));
    };
    for (char32_t cp : cps) {
        fragment.push_back(cp);
        if (cfg.full_stops.find(cp) != std::u32string::npos) flush();
    }
    flush();
    return sentences;
}

// ---- persistence ----

inline void save_punct_model(const PunctModel& m, const std::string& path) {
    OrderedJson j;
    j["kind"] = "punct";
    j["version"] = 1;
    j["window"] = m.config.window;
    j["orders"] = m.config.orders;
    j["l2"] = m.config.l2;
    j["max_epochs"] = m.config.max_epochs;
    j["seed"] = m.config.seed;
    j["full_stops"] = utf8::encode(m.config.full_stops);
    j["commas"] = utf8::encode(m.config.commas);
    j["min_tokens"] = m.config.min_tokens;
    j["priors"] = std::vector<double>(m.priors.begin(), m.priors.end());
    OrderedJson vocab = OrderedJson::array();
    for (const auto& [gram, idx] : m.vocab)
        vocab.push_back(OrderedJson::array({gram, idx}));
    j["vocab"] = std::move(vocab);
    j["weights"] = m.weights;
    write_model_file(path, j);
}

inline PunctModel load_punct_model(const std::string& path) {
    const OrderedJson j = read_model_file(path, "punct", 1);
    PunctModel m;
    try {
        m.config.window = j.at("window").get<int>();
        m.config.orders = j.at("orders").get<std::vector<int>>();
        m.config.l2 = j.at("l2").get<double>();
        m.config.max_epochs = j.at("max_epochs").get<int>();
        m.config.seed = j.at("seed").get<std::uint64_t>();
        m.config.full_stops = utf8::decode(j.at("full_stops").get<std::string>());
        m.config.commas = utf8::decode(j.at("commas").get<std::string>());
        m.config.min_tokens = j.at("min_tokens").get<int>();
        const auto priors = doubles_from_json(j.at("priors"), "priors");
        if (priors.size() != 3) throw DataError("priors must have 3 entries");
        std::copy(priors.begin(), priors.end(), m.priors.begin());
        for (const auto& entry : j.at("vocab"))
            m.vocab[entry.at(0).get<std::string>()] =
                entry.at(1).get<std::uint32_t>();
        m.weights = doubles_from_json(j.at("weights"), "weights");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed punct model: " + e.what());
    }
    if (m.weights.size() != (m.vocab.size() + 1) * 3)
        throw DataError(path + ": punct model weight shape mismatch");
    return m;
}

}  // namespace tipmine
