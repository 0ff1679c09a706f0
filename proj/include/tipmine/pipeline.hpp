#pragma once

// End-to-end orchestration: ingest -> segment -> rank -> fuse -> diversify ->
// select -> evaluate. Pure per-song work can fan out across a --jobs bound;
// outputs are assembled in deterministic song order regardless of scheduling.

#include <atomic>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include "tipmine/content_rank.hpp"
#include "tipmine/corpus.hpp"
#include "tipmine/diversity.hpp"
#include "tipmine/error.hpp"
#include "tipmine/eval.hpp"
#include "tipmine/hashing.hpp"
#include "tipmine/segmenter.hpp"
#include "tipmine/serde.hpp"
#include "tipmine/style_rank.hpp"
#include "tipmine/tokenize.hpp"
#include "tipmine/topic_model.hpp"

namespace tipmine {

struct PipelineConfig {
    // inputs
    std::string reviews_path;
    std::string songs_path;           // optional song metadata
    std::string labels_path;          // labeled tips for the built-in scorer
    std::string punct_corpus_path;    // punctuated lines for train_punct
    std::string punct_labels_path;    // external punctuation decisions
    std::string external_scores_path; // external Score_e file
    std::string output_dir = "out";

    std::string scorer = "builtin";   // builtin | external
    std::string tokenizer = "default";

    RankConfig rank;
    SegmenterConfig segmenter;
    StyleConfig style;
    TopicConfig topics;
    FuseConfig fuse;
    double ridge = 1e-8;
    double stop_threshold = 1e-12;

    std::vector<int> k_list = {1, 3, 5, 10};
    int select_k = 10;  // selection length persisted per song

    bool split_enabled = false;  // train the scorer on the train split only
    SplitConfig split;

    std::uint64_t seed = 0;
    int jobs = 1;
    bool strict = false;
    bool keep_intermediates = false;
};

namespace detail {

inline void apply_config_json(PipelineConfig& cfg, const nlohmann::json& j,
                              const std::string& where) {
    if (!j.is_object()) throw UsageError(where + ": config must be an object");
    for (const auto& [key, value] : j.items()) {
        try {
            if (key == "reviews") cfg.reviews_path = value.get<std::string>();
            else if (key == "songs") cfg.songs_path = value.get<std::string>();
            else if (key == "labels") cfg.labels_path = value.get<std::string>();
            else if (key == "punct_corpus")
                cfg.punct_corpus_path = value.get<std::string>();
            else if (key == "punct_labels")
                cfg.punct_labels_path = value.get<std::string>();
            else if (key == "external_scores")
                cfg.external_scores_path = value.get<std::string>();
            else if (key == "output_dir")
                cfg.output_dir = value.get<std::string>();
            else if (key == "scorer") cfg.scorer = value.get<std::string>();
            else if (key == "tokenizer")
                cfg.tokenizer = value.get<std::string>();
            else if (key == "base") cfg.rank.base = value.get<double>();
            else if (key == "damping") cfg.rank.damping = value.get<double>();
            else if (key == "tolerance")
                cfg.rank.tolerance = value.get<double>();
            else if (key == "max_iterations")
                cfg.rank.max_iterations = value.get<int>();
            else if (key == "window") cfg.segmenter.window = value.get<int>();
            else if (key == "punct_orders")
                cfg.segmenter.orders = value.get<std::vector<int>>();
            else if (key == "punct_l2") cfg.segmenter.l2 = value.get<double>();
            else if (key == "punct_epochs")
                cfg.segmenter.max_epochs = value.get<int>();
            else if (key == "min_tokens")
                cfg.segmenter.min_tokens = value.get<int>();
            else if (key == "style_dim")
                cfg.style.dim = value.get<std::size_t>();
            else if (key == "style_orders")
                cfg.style.orders = value.get<std::vector<int>>();
            else if (key == "style_l2") cfg.style.l2 = value.get<double>();
            else if (key == "style_epochs")
                cfg.style.max_epochs = value.get<int>();
            else if (key == "class_weighting")
                cfg.style.class_weighting = value.get<bool>();
            else if (key == "topics") cfg.topics.topics = value.get<int>();
            else if (key == "em_iterations")
                cfg.topics.iterations = value.get<int>();
            else if (key == "fold_in_iterations")
                cfg.topics.fold_in_iterations = value.get<int>();
            else if (key == "epsilon") cfg.topics.epsilon = value.get<double>();
            else if (key == "alpha") cfg.fuse.alpha = value.get<double>();
            else if (key == "minmax_content")
                cfg.fuse.minmax_content = value.get<bool>();
            else if (key == "ridge") cfg.ridge = value.get<double>();
            else if (key == "stop_threshold")
                cfg.stop_threshold = value.get<double>();
            else if (key == "k_list")
                cfg.k_list = value.get<std::vector<int>>();
            else if (key == "select_k") cfg.select_k = value.get<int>();
            else if (key == "split_enabled")
                cfg.split_enabled = value.get<bool>();
            else if (key == "test_songs")
                cfg.split.test_songs = value.get<int>();
            else if (key == "test_sentences_per_song")
                cfg.split.test_sentences_per_song = value.get<int>();
            else if (key == "train_ratio")
                cfg.split.train_ratio = value.get<double>();
            else if (key == "seed") cfg.seed = value.get<std::uint64_t>();
            else if (key == "jobs") cfg.jobs = value.get<int>();
            else if (key == "strict") cfg.strict = value.get<bool>();
            else if (key == "keep_intermediates")
                cfg.keep_intermediates = value.get<bool>();
            else
                throw UsageError(where + ": unknown config key: " + key);
        } catch (const nlohmann::json::exception& e) {
            throw UsageError(where + ": bad value for " + key + ": " +
                             e.what());
        }
    }
}

}  // namespace detail

inline PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file: " + path);
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded()) throw UsageError(path + ": invalid config file");
    PipelineConfig cfg;
    detail::apply_config_json(cfg, j, path);
    return cfg;
}

inline void validate_config(const PipelineConfig& cfg) {
    if (cfg.rank.base <= 1.0) throw UsageError("base must exceed 1");
    if (cfg.rank.damping <= 0.0 || cfg.rank.damping >= 1.0)
        throw UsageError("damping must lie in (0,1)");
    if (cfg.rank.tolerance <= 0.0) throw UsageError("tolerance must be positive");
    if (cfg.rank.max_iterations < 1)
        throw UsageError("max_iterations must be at least 1");
    if (cfg.fuse.alpha < 0.0) throw UsageError("alpha must be non-negative");
    if (cfg.topics.topics < 1) throw UsageError("topics must be at least 1");
    if (cfg.select_k < 1) throw UsageError("select_k must be at least 1");
    if (cfg.jobs < 1) throw UsageError("jobs must be at least 1");
    if (cfg.k_list.empty()) throw UsageError("k_list must not be empty");
    for (int k : cfg.k_list)
        if (k < 1) throw UsageError("k values must be at least 1");
    if (cfg.scorer != "builtin" && cfg.scorer != "external")
        throw UsageError("scorer must be builtin or external");
    if (cfg.tokenizer != "default")
        throw UsageError("unknown tokenizer: " + cfg.tokenizer);
}

struct SelectedTip {
    std::string sentence_id;
    std::string text;
    std::vector<std::string> tokens;
    double content_score = 0.0;
    double style_score = 0.0;
    double fused_score = 0.0;
    bool padded = false;
    double gain = 0.0;  // meaningful only when !padded
    TopicVector topic;
};

struct SongResult {
    std::string song_id;
    std::vector<SelectedTip> tips;  // greedy order, length <= select_k
    bool rank_converged = true;
    double rank_residual = 0.0;
    int topic_count_used = 0;
};

struct EvalReport {
    std::map<int, double> precision;    // k -> macro p@k (labels present)
    std::map<int, double> distinct1;    // k -> Distinct-1 of pooled top-k
    std::map<int, double> distinct2;
    bool has_precision = false;
    SplitManifest split;
    bool has_split = false;
};

struct RunResult {
    std::vector<SongResult> songs;  // sorted by song_id
    EvalReport report;
    IngestReport ingest;
};

namespace detail {

// Rethrows any stage failure with the stage name and song id attached,
// preserving the error category.
template <typename F>
auto stage_guard(const char* stage, const std::string& song_id, F&& f) {
    auto tag = [&](const std::string& what) {
        std::string prefix = std::string("stage ") + stage;
        if (!song_id.empty()) prefix += ", song " + song_id;
        return prefix + ": " + what;
    };
    try {
        return f();
    } catch (const UsageError& e) {
        throw UsageError(tag(e.what()));
    } catch (const NumericError& e) {
        throw NumericError(tag(e.what()));
    } catch (const DataError& e) {
        throw DataError(tag(e.what()));
    } catch (const std::exception& e) {
        throw DataError(tag(e.what()));
    }
}

inline std::string sanitize_id(const std::string& id) {
    std::string out;
    for (char c : id)
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

// Runs fn(i) for i in [0, n) across the job bound. Results must be written to
// pre-sized slots; the first failure (by index) is rethrown after all joins.
inline void parallel_for(std::size_t n, int jobs,
                         const std::function<void(std::size_t)>& fn) {
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(n)));
    if (workers == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[i] = std::current_exception();
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace detail

// Segments one review with the given predictor and appends the sentences.
inline std::vector<Sentence> segment_review(const PunctPredictor& pred,
                                            const RawReview& review,
                                            const SegmenterConfig& cfg,
                                            const Tokenizer& tok) {
    const std::string corrected =
        correct_review(pred, review.review_id, review.text, cfg);
    return split_sentences(corrected, review.song_id, review.review_id,
                           review.approvals, cfg, tok);
}

// Generic score file: one {sentence_id, score} record per line, sorted by id.
inline void write_score_file(const std::map<std::string, double>& scores,
                             const std::string& path) {
    JsonlWriter out(path);
    for (const auto& [id, v] : scores) {
        OrderedJson j;
        j["sentence_id"] = id;
        j["score"] = v;
        out.write(j);
    }
    out.close();
}

inline std::map<std::string, double> load_score_file(const std::string& path) {
    std::map<std::string, double> scores;
    read_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
        if (!j.contains("sentence_id") || !j.contains("score") ||
            !j.at("score").is_number())
            throw DataError(path + " line " + std::to_string(line_no) +
                            ": expected sentence_id and numeric score");
        scores[j.at("sentence_id").get<std::string>()] =
            j.at("score").get<double>();
    });
    return scores;
}

// Fusion, topics, and greedy selection for one song whose content scores are
// already known. Candidate order fixes kernel indexing and tie-breaks.
inline SongResult select_song(const std::string& song_id,
                              const std::vector<const Sentence*>& candidates,
                              const ContentScores& content,
                              const std::map<std::string, double>& style_scores,
                              const PipelineConfig& cfg) {
    SongResult result;
    result.song_id = song_id;
    if (candidates.empty())
        throw DataError("stage select, song " + song_id + ": no candidates");

    StyleScores style;
    for (const auto* s : candidates) {
        auto it = style_scores.find(s->sentence_id);
        if (it == style_scores.end())
            throw DataError("stage style, song " + song_id +
                            ": missing style score for " + s->sentence_id);
        style[s->sentence_id] = it->second;
    }

    const auto fused = detail::stage_guard(
        "fuse", song_id, [&] { return fuse(content, style, cfg.fuse); });

    // per-song topic model over the candidate sentences; topic count clamped
    // to the candidate count so tiny songs stay processable
    TopicConfig tc = cfg.topics;
    tc.topics = std::min<int>(tc.topics, static_cast<int>(candidates.size()));
    tc.seed = cfg.seed ^ fnv1a64(song_id);
    std::vector<std::vector<std::string>> docs;
    docs.reserve(candidates.size());
    for (const auto* s : candidates) docs.push_back(s->tokens);
    const TopicModel topics = detail::stage_guard(
        "topics", song_id, [&] { return train_plsa(docs, tc); });
    result.topic_count_used = tc.topics;

    std::vector<std::string> ids;
    std::vector<std::vector<double>> features;
    ids.reserve(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        ids.push_back(candidates[i]->sentence_id);
        features.push_back(topics.topic_given_doc[i]);
    }

    const DppKernel kernel = detail::stage_guard("select", song_id, [&] {
        return build_kernel(ids, fused, features, cfg.ridge);
    });
    const TipSelection sel = detail::stage_guard("select", song_id, [&] {
        return greedy_map(kernel, cfg.select_k, cfg.stop_threshold);
    });

    for (std::size_t pos = 0; pos < sel.order.size(); ++pos) {
        const std::size_t idx = sel.order[pos];
        SelectedTip tip;
        tip.sentence_id = ids[idx];
        tip.text = candidates[idx]->text;
        tip.tokens = candidates[idx]->tokens;
        tip.content_score = content.at(tip.sentence_id);
        tip.style_score = style.at(tip.sentence_id);
        tip.fused_score = fused.at(tip.sentence_id);
        tip.padded = pos >= sel.greedy_count;
        if (!tip.padded) tip.gain = sel.gains[pos];
        tip.topic = features[idx];
        result.tips.push_back(std::move(tip));
    }
    return result;
}

// Everything after segmentation for a single song: graph ranking feeds
// select_song. The per-sentence content scores can be captured for artifacts.
inline SongResult process_song(
    const std::string& song_id, const std::vector<Sentence>& sentences,
    const std::map<std::string, double>& style_scores,
    const PipelineConfig& cfg, ContentScores* content_out = nullptr) {
    const SentenceGraph graph = detail::stage_guard(
        "rank", song_id, [&] { return build_graph(sentences, cfg.rank); });
    const RankResult rank = detail::stage_guard(
        "rank", song_id, [&] { return rank_graph(graph, cfg.rank); });
    const ContentScores content = detail::stage_guard(
        "rank", song_id, [&] { return aggregate(rank, graph); });
    if (content_out) *content_out = content;

    SongResult result =
        select_song(song_id, graph.sentences, content, style_scores, cfg);
    result.rank_converged = rank.converged;
    result.rank_residual = rank.residual;
    return result;
}

inline EvalReport evaluate_selections(
    const std::vector<SongResult>& songs,
    const std::map<std::string, bool>& is_tip, const std::vector<int>& k_list,
    bool strict) {
    EvalReport report;
    std::map<std::string, std::vector<std::string>> per_song_ids;
    for (const auto& s : songs) {
        auto& v = per_song_ids[s.song_id];
        for (const auto& t : s.tips) v.push_back(t.sentence_id);
    }
    for (int k : k_list) {
        std::vector<std::vector<std::string>> pooled;
        for (const auto& s : songs) {
            const std::size_t upto =
                std::min<std::size_t>(k, s.tips.size());
            for (std::size_t i = 0; i < upto; ++i)
                pooled.push_back(s.tips[i].tokens);
        }
        report.distinct1[k] = distinct_n(pooled, 1);
        try {
            report.distinct2[k] = distinct_n(pooled, 2);
        } catch (const DataError&) {
            report.distinct2[k] = 0.0;  // every tip shorter than 2 tokens
        }
        if (!is_tip.empty()) {
            report.precision[k] =
                macro_precision_at_k(per_song_ids, is_tip, k, strict);
            report.has_precision = true;
        }
    }
    return report;
}

// ---- output writers (deterministic: sorted songs, fixed key order) ----

inline void write_selections(const std::vector<SongResult>& songs,
                             const std::string& path) {
    JsonlWriter out(path);
    for (const auto& s : songs) {
        for (std::size_t i = 0; i < s.tips.size(); ++i) {
            const auto& t = s.tips[i];
            OrderedJson j;
            j["song_id"] = s.song_id;
            j["rank"] = i + 1;
            j["sentence_id"] = t.sentence_id;
            j["text"] = t.text;
            j["tokens"] = t.tokens;
            j["content_score"] = t.content_score;
            j["style_score"] = t.style_score;
            j["fused_score"] = t.fused_score;
            if (t.padded)
                j["gain"] = nullptr;
            else
                j["gain"] = t.gain;
            j["padded"] = t.padded;
            j["topic"] = t.topic;
            out.write(j);
        }
    }
    out.close();
}

inline void write_sentences(const std::vector<Sentence>& sentences,
                            const std::string& path) {
    JsonlWriter out(path);
    for (const auto& s : sentences) {
        OrderedJson j;
        j["sentence_id"] = s.sentence_id;
        j["song_id"] = s.song_id;
        j["review_id"] = s.review_id;
        j["text"] = s.text;
        j["tokens"] = s.tokens;
        j["approvals"] = s.approvals;
        out.write(j);
    }
    out.close();
}

inline std::vector<Sentence> read_sentences(const std::string& path) {
    std::vector<Sentence> out;
    read_jsonl(path, [&](const nlohmann::json& j, std::size_t line_no) {
        try {
            Sentence s;
            s.sentence_id = j.at("sentence_id").get<std::string>();
            s.song_id = j.at("song_id").get<std::string>();
            s.review_id = j.at("review_id").get<std::string>();
            s.text = j.at("text").get<std::string>();
            s.tokens = j.at("tokens").get<std::vector<std::string>>();
            s.approvals = j.at("approvals").get<std::int64_t>();
            out.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path + " line " + std::to_string(line_no) + ": " +
                            e.what());
        }
    });
    return out;
}

inline OrderedJson report_to_json(const EvalReport& r) {
    OrderedJson j;
    if (r.has_precision) {
        OrderedJson p;
        for (const auto& [k, v] : r.precision)
            p["p@" + std::to_string(k)] = v;
        j["precision"] = std::move(p);
    }
    OrderedJson d1, d2;
    for (const auto& [k, v] : r.distinct1)
        d1["top" + std::to_string(k)] = v;
    for (const auto& [k, v] : r.distinct2)
        d2["top" + std::to_string(k)] = v;
    j["distinct1"] = std::move(d1);
    j["distinct2"] = std::move(d2);
    if (r.has_split) {
        OrderedJson s;
        s["seed"] = r.split.seed;
        s["test_songs"] = r.split.test_songs;
        s["test_count"] = r.split.test.size();
        s["train_count"] = r.split.train.size();
        s["validation_count"] = r.split.validation.size();
        j["split"] = std::move(s);
    }
    return j;
}

// The full pipeline. Every artifact lands under cfg.output_dir; reruns with
// the same config and seed produce byte-identical files.
inline RunResult run_pipeline(const PipelineConfig& cfg) {
    validate_config(cfg);
    if (cfg.reviews_path.empty()) throw UsageError("reviews path is required");
    const Tokenizer& tok = default_tokenizer();

    RunResult result;

    // ingest
    auto reviews = detail::stage_guard("ingest", "", [&] {
        return load_reviews(cfg.reviews_path, result.ingest);
    });
    detail::stage_guard("ingest", "", [&] {
        normalize_reviews(reviews, result.ingest);
        return 0;
    });
    std::vector<SongMeta> metas;
    if (!cfg.songs_path.empty())
        metas = detail::stage_guard("ingest", "",
                                    [&] { return load_song_meta(cfg.songs_path); });
    const Corpus corpus = detail::stage_guard("ingest", "", [&] {
        return attach_metadata(std::move(reviews), metas, cfg.strict);
    });
    if (corpus.songs.empty()) throw DataError("no reviews after ingestion");

    // punctuation predictor
    std::unique_ptr<PunctPredictor> predictor;
    PunctModel punct_model;
    bool have_punct_model = false;
    if (!cfg.punct_labels_path.empty()) {
        auto map_pred = detail::stage_guard("segment", "", [&] {
            return load_external_labels(cfg.punct_labels_path);
        });
        predictor = std::make_unique<MapPredictor>(std::move(map_pred));
    } else if (!cfg.punct_corpus_path.empty()) {
        std::vector<std::string> lines;
        std::ifstream in(cfg.punct_corpus_path);
        if (!in)
            throw DataError("cannot open punctuation corpus: " +
                            cfg.punct_corpus_path);
        std::string line;
        while (std::getline(in, line))
            if (!line.empty()) lines.push_back(normalize_text(line));
        punct_model = detail::stage_guard(
            "segment", "", [&] { return train_punct(lines, cfg.segmenter); });
        have_punct_model = true;
        predictor = std::make_unique<ModelPredictor>(punct_model);
    } else {
        // no model: every site keeps its original mark
        predictor = std::make_unique<MapPredictor>();
    }

    // segment all songs
    std::vector<Sentence> all_sentences;
    std::vector<std::vector<Sentence>> per_song(corpus.songs.size());
    detail::parallel_for(corpus.songs.size(), cfg.jobs, [&](std::size_t i) {
        const auto& group = corpus.songs[i];
        detail::stage_guard("segment", group.meta.song_id, [&] {
            for (const auto& r : group.reviews) {
                auto sents = segment_review(*predictor, r, cfg.segmenter, tok);
                for (auto& s : sents) per_song[i].push_back(std::move(s));
            }
            return 0;
        });
    });
    for (const auto& v : per_song)
        for (const auto& s : v) all_sentences.push_back(s);

    // style scores for every sentence
    std::map<std::string, double> style_scores;
    StyleModel style_model;
    bool have_style_model = false;
    if (cfg.scorer == "external") {
        if (cfg.external_scores_path.empty())
            throw UsageError("external scorer requires an external score file");
        auto loaded = detail::stage_guard("style", "", [&] {
            return load_external_scores(cfg.external_scores_path);
        });
        std::set<std::string> known;
        for (const auto& s : all_sentences) known.insert(s.sentence_id);
        check_external_scores(loaded, known, cfg.strict);
        for (const auto& s : all_sentences) {
            auto it = loaded.find(s.sentence_id);
            if (it == loaded.end())
                throw DataError("stage style: external file misses sentence " +
                                s.sentence_id);
            style_scores[s.sentence_id] = it->second;
        }
    } else {
        if (cfg.labels_path.empty())
            throw UsageError("builtin scorer requires a labels file");
        auto labeled = detail::stage_guard(
            "style", "", [&] { return load_labeled(cfg.labels_path); });
        std::vector<LabeledSentence> train_set = labeled;
        if (cfg.split_enabled) {
            std::map<std::string, std::vector<std::string>> by_song;
            for (const auto& l : labeled)
                by_song[l.song_id].push_back(l.sentence_id);
            SplitConfig sc = cfg.split;
            sc.seed = cfg.seed;
            result.report.split = detail::stage_guard(
                "split", "", [&] { return make_splits(by_song, sc); });
            result.report.has_split = true;
            const std::set<std::string> train_ids(
                result.report.split.train.begin(),
                result.report.split.train.end());
            train_set.clear();
            for (const auto& l : labeled)
                if (train_ids.count(l.sentence_id)) train_set.push_back(l);
        }
        StyleConfig style_cfg = cfg.style;
        style_cfg.seed = cfg.seed;
        style_model = detail::stage_guard(
            "style", "", [&] { return train_style(train_set, style_cfg); });
        have_style_model = true;
        for (const auto& s : all_sentences)
            style_scores[s.sentence_id] = style_model.score(s.text);
    }

    // rank, fuse, topics, select per song
    result.songs.resize(corpus.songs.size());
    std::vector<ContentScores> content_per_song(corpus.songs.size());
    detail::parallel_for(corpus.songs.size(), cfg.jobs, [&](std::size_t i) {
        result.songs[i] =
            process_song(corpus.songs[i].meta.song_id, per_song[i],
                         style_scores, cfg,
                         cfg.keep_intermediates ? &content_per_song[i]
                                                : nullptr);
    });

    // evaluation
    std::map<std::string, bool> is_tip;
    if (!cfg.labels_path.empty()) {
        const auto labeled = load_labeled(cfg.labels_path);
        for (const auto& l : labeled)
            is_tip[l.sentence_id] = l.label == TipLabel::Tip;
    }
    auto split_backup = result.report.split;
    const bool had_split = result.report.has_split;
    result.report =
        evaluate_selections(result.songs, is_tip, cfg.k_list, cfg.strict);
    result.report.split = std::move(split_backup);
    result.report.has_split = had_split;

    // persist
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    write_selections(result.songs, cfg.output_dir + "/selections.jsonl");
    write_model_file(cfg.output_dir + "/report.json",
                     report_to_json(result.report));
    if (cfg.keep_intermediates) {
        write_sentences(all_sentences, cfg.output_dir + "/sentences.jsonl");
        std::map<std::string, double> content_all;
        for (const auto& per : content_per_song)
            for (const auto& [id, v] : per) content_all[id] = v;
        write_score_file(content_all, cfg.output_dir + "/content.jsonl");
        write_score_file(style_scores, cfg.output_dir + "/styles.jsonl");
        if (have_punct_model)
            save_punct_model(punct_model,
                             cfg.output_dir + "/punct_model.json");
        if (have_style_model)
            save_style_model(style_model,
                             cfg.output_dir + "/style_model.json");
    }
    return result;
}

// One full run per value, shared seed, consolidated report array.
inline OrderedJson sweep(const PipelineConfig& base,
                         const std::string& parameter,
                         const std::vector<double>& values) {
    if (values.empty()) throw UsageError("sweep value list is empty");
    OrderedJson out = OrderedJson::array();
    for (double v : values) {
        PipelineConfig cfg = base;
        if (parameter == "m") {
            cfg.rank.base = v;
        } else if (parameter == "t") {
            cfg.topics.topics = static_cast<int>(v);
        } else if (parameter == "alpha") {
            cfg.fuse.alpha = v;
        } else if (parameter == "k") {
            cfg.select_k = static_cast<int>(v);
            cfg.k_list = {static_cast<int>(v)};
        } else {
            throw UsageError("unknown sweep parameter: " + parameter +
                             " (expected m, t, alpha, or k)");
        }
        cfg.output_dir = base.output_dir + "/" + parameter + "_" +
                         detail::sanitize_id(std::to_string(v));
        const RunResult r = run_pipeline(cfg);
        OrderedJson entry;
        entry["parameter"] = parameter;
        entry["value"] = v;
        entry["report"] = report_to_json(r.report);
        out.push_back(std::move(entry));
    }
    return out;
}

}  // namespace tipmine
