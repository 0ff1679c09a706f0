#pragma once

// Song-independent tip-likeness scoring: a pluggable sentence encoder feeds a
// 2-class linear head; the score is the Tip-class probability. Externally
// computed scores plug in through a file adapter.

#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tipmine/error.hpp"
#include "tipmine/hashing.hpp"
#include "tipmine/linear.hpp"
#include "tipmine/serde.hpp"
#include "tipmine/utf8.hpp"

namespace tipmine {

enum class TipLabel : int { NonTip = 0, Tip = 1 };

// The 8 annotation characteristic codes: 4 content, 4 stylistic.
inline const std::set<std::string>& characteristic_codes() {
    static const std::set<std::string> codes = {
        "singer_lyricist", "lyrics_title", "songwriting", "background",
        "sensory",         "scene",        "humor",       "philosophy"};
    return codes;
}

struct LabeledSentence {
    std::string sentence_id;
    std::string song_id;
    std::string text;
    TipLabel label = TipLabel::NonTip;
    std::vector<std::string> characteristics;
};

struct StyleConfig {
    std::size_t dim = 4096;  // hashed feature buckets H
    std::vector<int> orders = {1, 2, 3};
    double l2 = 1e-4;
    int max_epochs = 200;
    std::uint64_t seed = 0;
    bool class_weighting = false;
};

class SentenceEncoder {
public:
    virtual ~SentenceEncoder() = default;
    virtual std::size_t dim() const = 0;
    // Sparse encoding: unique bucket indices with values, L2-normalized.
    virtual SparseVec encode(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

// Character n-grams over codepoints, hashed into a fixed number of buckets
// with FNV-1a, counts L2-normalized. Empty text encodes to the zero vector.
class HashedNgramEncoder final : public SentenceEncoder {
public:
    explicit HashedNgramEncoder(std::size_t dim = 4096,
                                std::vector<int> orders = {1, 2, 3})
        : dim_(dim), orders_(std::move(orders)) {
        if (dim_ == 0) throw UsageError("encoder dimension must be positive");
    }

    std::size_t dim() const override { return dim_; }
    std::string name() const override { return "hashed_ngram"; }

    SparseVec encode(std::string_view text) const override {
        const std::u32string cps = utf8::decode(text);
        std::map<std::uint32_t, float> counts;
        for (int n : orders_) {
            if (n <= 0) continue;
            for (std::size_t i = 0; i + n <= cps.size(); ++i) {
                const std::string gram = utf8::encode(cps.substr(i, n));
                counts[static_cast<std::uint32_t>(fnv1a64(gram) % dim_)] +=
                    1.0f;
            }
        }
        double norm2 = 0.0;
        for (const auto& [idx, v] : counts) norm2 += double(v) * v;
        SparseVec out;
        out.reserve(counts.size());
        const float inv = norm2 > 0.0 ? static_cast<float>(1.0 / std::sqrt(norm2))
                                      : 0.0f;
        for (const auto& [idx, v] : counts) out.emplace_back(idx, v * inv);
        return out;
    }

private:
    std::size_t dim_;
    std::vector<int> orders_;
};

struct StyleModel {
    StyleConfig config;
    std::shared_ptr<SentenceEncoder> encoder;
    std::vector<double> weights;  // dim x 2, row-major

    // Tip-class probability.
    double score(std::string_view text) const {
        const auto p = predict_proba(weights, 2, encoder->encode(text));
        return p[static_cast<int>(TipLabel::Tip)];
    }
};

// Trains the 2-class head. Duplicate sentence_ids with conflicting labels are
// an error; zero initialization keeps the result deterministic.
inline StyleModel train_style(const std::vector<LabeledSentence>& data,
                              const StyleConfig& cfg = {}) {
    if (data.empty()) throw DataError("no labeled sentences");
    std::map<std::string, TipLabel> seen;
    std::string conflicts;
    for (const auto& s : data) {
        auto [it, inserted] = seen.emplace(s.sentence_id, s.label);
        if (!inserted && it->second != s.label) {
            if (!conflicts.empty()) conflicts += ", ";
            conflicts += s.sentence_id;
        }
    }
    if (!conflicts.empty())
        throw DataError("conflicting labels for sentences: " + conflicts);

    std::size_t tips = 0, non_tips = 0;
    for (const auto& s : data)
        (s.label == TipLabel::Tip ? tips : non_tips)++;
    if (tips == 0 || non_tips == 0)
        throw DataError(std::string("training data missing class: ") +
                        (tips == 0 ? "tip" : "non_tip"));

    StyleModel model;
    model.config = cfg;
    model.encoder = std::make_shared<HashedNgramEncoder>(cfg.dim, cfg.orders);

    const double n = static_cast<double>(data.size());
    std::vector<LabeledExample> rows;
    rows.reserve(data.size());
    for (const auto& s : data) {
        LabeledExample row;
        row.features = model.encoder->encode(s.text);
        row.label = static_cast<int>(s.label);
        if (cfg.class_weighting)
            row.weight = n / (2.0 * static_cast<double>(
                                        s.label == TipLabel::Tip ? tips
                                                                 : non_tips));
        rows.push_back(std::move(row));
    }

    TrainConfig tc;
    tc.l2 = cfg.l2;
    tc.max_epochs = cfg.max_epochs;
    auto res = train_softmax(rows, cfg.dim, 2, tc);
    model.weights = std::move(res.weights);
    return model;
}

using StyleScores = std::map<std::string, double>;

// External score file: one record per line with sentence_id and score in [0,1].
inline StyleScores load_external_scores(const std::string& path) {
    StyleScores scores;
    read_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
        const std::string where = path + " line " + std::to_string(line_no);
        if (!j.is_object() || !j.contains("sentence_id") ||
            !j.contains("score"))
            throw DataError(where + ": expected sentence_id and score");
        const auto id = j.at("sentence_id").get<std::string>();
        if (!j.at("score").is_number())
            throw DataError(where + ": score must be a number");
        const double v = j.at("score").get<double>();
        if (!(v >= 0.0 && v <= 1.0))
            throw DataError(where + ": score out of [0,1]: " + id);
        if (!scores.emplace(id, v).second)
            throw DataError(where + ": duplicate sentence_id: " + id);
    });
    return scores;
}

// In strict mode every scored id must name a known sentence.
inline void check_external_scores(const StyleScores& scores,
                                  const std::set<std::string>& known_ids,
                                  bool strict) {
    if (!strict) return;
    for (const auto& [id, v] : scores)
        if (!known_ids.count(id))
            throw DataError("external score for unknown sentence_id: " + id);
}

// Labeled dataset file: sentence_id, song_id, text, label in {tip, non_tip},
// optional characteristics array of the 8 codes.
inline std::vector<LabeledSentence> load_labeled(const std::string& path) {
    std::vector<LabeledSentence> out;
    read_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
        const std::string where = path + " line " + std::to_string(line_no);
        if (!j.is_object() || !j.contains("sentence_id") ||
            !j.contains("text") || !j.contains("label"))
            throw DataError(where + ": expected sentence_id, text, label");
        LabeledSentence s;
        s.sentence_id = j.at("sentence_id").get<std::string>();
        s.song_id = j.value("song_id", std::string());
        s.text = j.at("text").get<std::string>();
        const auto label = j.at("label").get<std::string>();
        if (label == "tip") {
            s.label = TipLabel::Tip;
        } else if (label == "non_tip") {
            s.label = TipLabel::NonTip;
        } else {
            throw DataError(where + ": label must be tip or non_tip");
        }
        if (j.contains("characteristics")) {
            for (const auto& c : j.at("characteristics")) {
                const auto code = c.get<std::string>();
                if (!characteristic_codes().count(code))
                    throw DataError(where + ": unknown characteristic: " + code);
                s.characteristics.push_back(code);
            }
        }
        out.push_back(std::move(s));
    });
    return out;
}

// ---- persistence ----

inline void save_style_model(const StyleModel& m, const std::string& path) {
    OrderedJson j;
    j["kind"] = "style";
    j["version"] = 1;
    j["encoder"] = m.encoder->name();
    j["dim"] = m.config.dim;
    j["orders"] = m.config.orders;
    j["l2"] = m.config.l2;
    j["max_epochs"] = m.config.max_epochs;
    j["seed"] = m.config.seed;
    j["class_weighting"] = m.config.class_weighting;
    j["weights"] = m.weights;
    write_model_file(path, j);
}

inline StyleModel load_style_model(const std::string& path) {
    const OrderedJson j = read_model_file(path, "style", 1);
    StyleModel m;
    try {
        if (j.at("encoder").get<std::string>() != "hashed_ngram")
            throw DataError(path + ": unknown encoder");
        m.config.dim = j.at("dim").get<std::size_t>();
        m.config.orders = j.at("orders").get<std::vector<int>>();
        m.config.l2 = j.at("l2").get<double>();
        m.config.max_epochs = j.at("max_epochs").get<int>();
        m.config.seed = j.at("seed").get<std::uint64_t>();
        m.config.class_weighting = j.at("class_weighting").get<bool>();
        m.weights = doubles_from_json(j.at("weights"), "weights");
    } catch (const nlohmann::json::exception& e) {
        throw DataError(path + ": malformed style model: " + e.what());
    }
    if (m.weights.size() != m.config.dim * 2)
        throw DataError(path + ": style model weight shape mismatch");
    m.encoder = std::make_shared<HashedNgramEncoder>(m.config.dim,
                                                     m.config.orders);
    return m;
}

}  // namespace tipmine
