// tipmine: extract short, diverse, representative tips from song reviews.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tipmine/pipeline.hpp"

namespace {

using namespace tipmine;

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) lines.push_back(line);
    return lines;
}

// Shared override flags; zero-initialized sentinels mean "not passed".
struct Overrides {
    std::string config;
    std::string out;
    std::string scores;
    int k = 0;
    double alpha = -1.0;
    double base = 0.0;
    int topics = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 0;
    bool keep_intermediates = false;
    bool strict = false;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
    cmd->add_option("--config", o.config, "pipeline config file (JSON)");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--scores", o.scores,
                    "external style-score file (switches scorer to external)");
    cmd->add_option("--k", o.k, "selection size (also sets the k list)");
    cmd->add_option("--alpha", o.alpha, "style weight in score fusion");
    cmd->add_option("--base", o.base, "approval log base");
    cmd->add_option("--topics", o.topics, "topic count");
    cmd->add_option("--seed", o.seed, "master random seed")
        ->each([&o](const std::string&) { o.seed_set = true; });
    cmd->add_option("--jobs", o.jobs, "max concurrent songs");
    cmd->add_flag("--keep-intermediates", o.keep_intermediates,
                  "persist per-stage artifacts");
    cmd->add_flag("--strict", o.strict, "fail on unknown ids");
}

PipelineConfig make_config(const Overrides& o) {
    PipelineConfig cfg;
    if (!o.config.empty()) cfg = load_config(o.config);
    if (!o.out.empty()) cfg.output_dir = o.out;
    if (!o.scores.empty()) {
        cfg.external_scores_path = o.scores;
        cfg.scorer = "external";
    }
    if (o.k > 0) {
        cfg.select_k = o.k;
        cfg.k_list = {o.k};
    }
    if (o.alpha >= 0.0) cfg.fuse.alpha = o.alpha;
    if (o.base > 0.0) cfg.rank.base = o.base;
    if (o.topics > 0) cfg.topics.topics = o.topics;
    if (o.seed_set) cfg.seed = o.seed;
    if (o.jobs > 0) cfg.jobs = o.jobs;
    if (o.keep_intermediates) cfg.keep_intermediates = true;
    if (o.strict) cfg.strict = true;
    return cfg;
}

void print_report(const EvalReport& r) {
    if (r.has_precision) {
        std::printf("precision:");
        for (const auto& [k, v] : r.precision) std::printf(" p@%d=%.4f", k, v);
        std::printf("\n");
    }
    std::printf("distinct-1:");
    for (const auto& [k, v] : r.distinct1) std::printf(" top%d=%.4f", k, v);
    std::printf("\ndistinct-2:");
    for (const auto& [k, v] : r.distinct2) std::printf(" top%d=%.4f", k, v);
    std::printf("\n");
    if (r.has_split)
        std::printf("split: %zu test / %zu train / %zu validation\n",
                    r.split.test.size(), r.split.train.size(),
                    r.split.validation.size());
}

int run_main(int argc, char** argv) {
    CLI::App app{"tip extraction from song reviews"};
    app.require_subcommand(1);

    // ---- run ----
    auto* cmd_run = app.add_subcommand("run", "full pipeline from a config");
    Overrides run_opts;
    add_override_flags(cmd_run, run_opts);

    // ---- sweep ----
    auto* cmd_sweep =
        app.add_subcommand("sweep", "full run per parameter value");
    Overrides sweep_opts;
    std::string sweep_param;
    std::vector<double> sweep_values;
    add_override_flags(cmd_sweep, sweep_opts);
    cmd_sweep->add_option("--param", sweep_param, "one of: m, t, alpha, k")
        ->required();
    cmd_sweep->add_option("--values", sweep_values, "parameter values")
        ->required()
        ->delimiter(',');

    // ---- preprocess ----
    auto* cmd_pre = app.add_subcommand(
        "preprocess", "normalize reviews and report ingest counts");
    std::string pre_reviews, pre_songs, pre_out = "out";
    bool pre_strict = false;
    cmd_pre->add_option("--reviews", pre_reviews, "reviews file")->required();
    cmd_pre->add_option("--songs", pre_songs, "song metadata file");
    cmd_pre->add_option("--out", pre_out, "output directory");
    cmd_pre->add_flag("--strict", pre_strict, "fail on unknown song ids");

    // ---- segment ----
    auto* cmd_seg = app.add_subcommand(
        "segment", "correct punctuation and split reviews into sentences");
    std::string seg_reviews, seg_model, seg_labels, seg_out = "out";
    int seg_min_tokens = -1;
    cmd_seg->add_option("--reviews", seg_reviews, "reviews file")->required();
    cmd_seg->add_option("--punct-model", seg_model,
                        "trained punctuation model file");
    cmd_seg->add_option("--punct-labels", seg_labels,
                        "external punctuation decisions file");
    cmd_seg->add_option("--min-tokens", seg_min_tokens,
                        "minimum tokens per sentence");
    cmd_seg->add_option("--out", seg_out, "output directory");

    // ---- train-punct ----
    auto* cmd_tp = app.add_subcommand(
        "train-punct", "train the punctuation classifier on punctuated lines");
    std::string tp_corpus, tp_out = "punct_model.json";
    int tp_window = 8, tp_epochs = 200;
    double tp_l2 = 1e-4;
    cmd_tp->add_option("--corpus", tp_corpus, "one punctuated line per file row")
        ->required();
    cmd_tp->add_option("--out", tp_out, "model output file");
    cmd_tp->add_option("--window", tp_window, "context characters per side");
    cmd_tp->add_option("--l2", tp_l2, "regularization strength");
    cmd_tp->add_option("--epochs", tp_epochs, "max training epochs");

    // ---- train-style ----
    auto* cmd_ts = app.add_subcommand(
        "train-style", "train the tip-likeness classifier on labeled data");
    std::string ts_labels, ts_out = "style_model.json";
    std::size_t ts_dim = 4096;
    int ts_epochs = 200;
    double ts_l2 = 1e-4;
    bool ts_weighting = false;
    cmd_ts->add_option("--labels", ts_labels, "labeled sentences file")
        ->required();
    cmd_ts->add_option("--out", ts_out, "model output file");
    cmd_ts->add_option("--dim", ts_dim, "hashed feature buckets");
    cmd_ts->add_option("--l2", ts_l2, "regularization strength");
    cmd_ts->add_option("--epochs", ts_epochs, "max training epochs");
    cmd_ts->add_flag("--class-weighting", ts_weighting,
                     "reweight classes to balance");

    // ---- train-topics ----
    auto* cmd_tt = app.add_subcommand(
        "train-topics", "train one topic model per song over its sentences");
    std::string tt_sentences, tt_out = "out";
    int tt_topics = 8, tt_iters = 50;
    std::uint64_t tt_seed = 0;
    cmd_tt->add_option("--sentences", tt_sentences, "sentences file")
        ->required();
    cmd_tt->add_option("--out", tt_out, "output directory");
    cmd_tt->add_option("--topics", tt_topics, "topic count");
    cmd_tt->add_option("--iterations", tt_iters, "EM iterations");
    cmd_tt->add_option("--seed", tt_seed, "master random seed");

    // ---- rank ----
    auto* cmd_rank = app.add_subcommand(
        "rank", "content scores from the per-song sentence graph");
    std::string rank_sentences, rank_out = "content_scores.jsonl";
    double rank_base = 10.0, rank_damping = 0.85, rank_tol = 1e-6;
    int rank_iters = 100;
    bool rank_dump = false;
    cmd_rank->add_option("--sentences", rank_sentences, "sentences file")
        ->required();
    cmd_rank->add_option("--out", rank_out, "content score output file");
    cmd_rank->add_option("--base", rank_base, "approval log base");
    cmd_rank->add_option("--damping", rank_damping, "damping factor");
    cmd_rank->add_option("--tolerance", rank_tol, "convergence tolerance");
    cmd_rank->add_option("--max-iterations", rank_iters, "iteration cap");
    cmd_rank->add_flag("--dump-graph", rank_dump,
                       "print nodes and edges for inspection");

    // ---- select ----
    auto* cmd_sel = app.add_subcommand(
        "select", "fuse scores, build the kernel, and pick diverse tips");
    std::string sel_sentences, sel_content, sel_styles;
    std::string sel_out;
    Overrides sel_opts;
    cmd_sel->add_option("--sentences", sel_sentences, "sentences file")
        ->required();
    cmd_sel->add_option("--content", sel_content, "content score file")
        ->required();
    cmd_sel->add_option("--styles", sel_styles, "style score file")->required();
    cmd_sel->add_option("--selections-out", sel_out,
                        "selection output file (default: "
                        "<output dir>/selections.jsonl)");
    add_override_flags(cmd_sel, sel_opts);

    // ---- evaluate ----
    auto* cmd_eval = app.add_subcommand(
        "evaluate", "precision@k, Distinct metrics, optional kappa");
    std::string ev_selections, ev_labels, ev_ratings;
    std::string ev_out = "report.json";
    std::vector<int> ev_k = {1, 3, 5, 10};
    bool ev_strict = false;
    cmd_eval->add_option("--selections", ev_selections, "selections file")
        ->required();
    cmd_eval->add_option("--labels", ev_labels, "labeled sentences file");
    cmd_eval->add_option("--ratings", ev_ratings,
                         "annotator rating matrix file (kappa)");
    cmd_eval->add_option("--k", ev_k, "k values")->delimiter(',');
    cmd_eval->add_option("--out", ev_out, "report output file");
    cmd_eval->add_flag("--strict", ev_strict, "fail on unlabeled ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (cmd_run->parsed()) {
        const PipelineConfig cfg = make_config(run_opts);
        const RunResult r = run_pipeline(cfg);
        std::printf("songs: %zu\n", r.songs.size());
        std::printf("reviews: %zu loaded, %zu dropped, %zu malformed\n",
                    r.ingest.loaded, r.ingest.dropped, r.ingest.malformed);
        for (const auto& s : r.songs)
            if (!s.rank_converged)
                std::fprintf(stderr,
                             "warning: ranking did not converge for song %s "
                             "(residual %.3g)\n",
                             s.song_id.c_str(), s.rank_residual);
        print_report(r.report);
        std::printf("selections: %s/selections.jsonl\n",
                    cfg.output_dir.c_str());
        return 0;
    }

    if (cmd_sweep->parsed()) {
        const PipelineConfig cfg = make_config(sweep_opts);
        const OrderedJson out = sweep(cfg, sweep_param, sweep_values);
        namespace fs = std::filesystem;
        fs::create_directories(cfg.output_dir);
        write_model_file(cfg.output_dir + "/sweep.json", out);
        std::printf("%zu runs -> %s/sweep.json\n", out.size(),
                    cfg.output_dir.c_str());
        return 0;
    }

    if (cmd_pre->parsed()) {
        IngestReport report;
        auto reviews = load_reviews(pre_reviews, report);
        normalize_reviews(reviews, report);
        std::vector<SongMeta> metas;
        if (!pre_songs.empty()) metas = load_song_meta(pre_songs);
        const Corpus corpus =
            attach_metadata(std::move(reviews), metas, pre_strict);
        namespace fs = std::filesystem;
        fs::create_directories(pre_out);
        JsonlWriter out(pre_out + "/reviews_clean.jsonl");
        for (const auto& g : corpus.songs) {
            for (const auto& r : g.reviews) {
                OrderedJson j;
                j["song_id"] = r.song_id;
                j["review_id"] = r.review_id;
                j["text"] = r.text;
                j["approvals"] = r.approvals;
                out.write(j);
            }
        }
        out.close();
        OrderedJson rep;
        rep["loaded"] = report.loaded;
        rep["dropped"] = report.dropped;
        rep["malformed"] = report.malformed;
        rep["issues"] = report.issues;
        write_model_file(pre_out + "/ingest_report.json", rep);
        std::printf("%zu loaded, %zu dropped, %zu malformed -> %s\n",
                    report.loaded, report.dropped, report.malformed,
                    pre_out.c_str());
        return report.malformed > 0 && pre_strict ? 2 : 0;
    }

    if (cmd_seg->parsed()) {
        IngestReport report;
        auto reviews = load_reviews(seg_reviews, report);
        normalize_reviews(reviews, report);
        SegmenterConfig scfg;
        if (seg_min_tokens >= 0) scfg.min_tokens = seg_min_tokens;
        std::unique_ptr<PunctPredictor> pred;
        PunctModel model;
        if (!seg_model.empty()) {
            model = load_punct_model(seg_model);
            scfg = model.config;
            if (seg_min_tokens >= 0) scfg.min_tokens = seg_min_tokens;
            pred = std::make_unique<ModelPredictor>(model);
        } else if (!seg_labels.empty()) {
            pred = std::make_unique<MapPredictor>(
                load_external_labels(seg_labels));
        } else {
            pred = std::make_unique<MapPredictor>();
        }
        std::vector<Sentence> sentences;
        for (const auto& r : reviews) {
            auto sents = segment_review(*pred, r, scfg, default_tokenizer());
            for (auto& s : sents) sentences.push_back(std::move(s));
        }
        namespace fs = std::filesystem;
        fs::create_directories(seg_out);
        write_sentences(sentences, seg_out + "/sentences.jsonl");
        std::printf("%zu sentences -> %s/sentences.jsonl\n", sentences.size(),
                    seg_out.c_str());
        return 0;
    }

    if (cmd_tp->parsed()) {
        SegmenterConfig scfg;
        scfg.window = tp_window;
        scfg.l2 = tp_l2;
        scfg.max_epochs = tp_epochs;
        std::vector<std::string> lines;
        for (auto& l : read_lines(tp_corpus))
            lines.push_back(normalize_text(l));
        const PunctModel model = train_punct(lines, scfg);
        save_punct_model(model, tp_out);
        std::printf("punctuation model (%zu features) -> %s\n",
                    model.vocab.size(), tp_out.c_str());
        return 0;
    }

    if (cmd_ts->parsed()) {
        StyleConfig scfg;
        scfg.dim = ts_dim;
        scfg.l2 = ts_l2;
        scfg.max_epochs = ts_epochs;
        scfg.class_weighting = ts_weighting;
        const StyleModel model = train_style(load_labeled(ts_labels), scfg);
        save_style_model(model, ts_out);
        std::printf("style model (dim %zu) -> %s\n", model.config.dim,
                    ts_out.c_str());
        return 0;
    }

    if (cmd_tt->parsed()) {
        const auto sentences = read_sentences(tt_sentences);
        std::map<std::string, std::vector<std::vector<std::string>>> by_song;
        for (const auto& s : sentences) by_song[s.song_id].push_back(s.tokens);
        namespace fs = std::filesystem;
        fs::create_directories(tt_out);
        for (const auto& [song, docs] : by_song) {
            TopicConfig tc;
            tc.topics = std::min<int>(tt_topics, static_cast<int>(docs.size()));
            tc.iterations = tt_iters;
            tc.seed = tt_seed ^ fnv1a64(song);
            const TopicModel m = train_plsa(docs, tc);
            save_topic_model(m, tt_out + "/topics_" +
                                     tipmine::detail::sanitize_id(song) +
                                     ".json");
        }
        std::printf("%zu topic models -> %s\n", by_song.size(), tt_out.c_str());
        return 0;
    }

    if (cmd_rank->parsed()) {
        const auto sentences = read_sentences(rank_sentences);
        std::map<std::string, std::vector<Sentence>> by_song;
        for (const auto& s : sentences) by_song[s.song_id].push_back(s);
        RankConfig rcfg;
        rcfg.base = rank_base;
        rcfg.damping = rank_damping;
        rcfg.tolerance = rank_tol;
        rcfg.max_iterations = rank_iters;
        std::map<std::string, double> all;
        for (const auto& [song, sents] : by_song) {
            const auto graph = build_graph(sents, rcfg);
            if (rank_dump) std::fputs(dump_graph(graph).c_str(), stdout);
            const auto rank = rank_graph(graph, rcfg);
            if (!rank.converged)
                std::fprintf(stderr,
                             "warning: ranking did not converge for song %s "
                             "(residual %.3g)\n",
                             song.c_str(), rank.residual);
            for (const auto& [id, v] : aggregate(rank, graph)) all[id] = v;
        }
        write_score_file(all, rank_out);
        std::printf("%zu content scores -> %s\n", all.size(), rank_out.c_str());
        return 0;
    }

    if (cmd_sel->parsed()) {
        const PipelineConfig cfg = make_config(sel_opts);
        const auto sentences = read_sentences(sel_sentences);
        const auto content_all = load_score_file(sel_content);
        const auto style_all = load_score_file(sel_styles);
        std::map<std::string, std::vector<const Sentence*>> by_song;
        for (const auto& s : sentences)
            if (content_all.count(s.sentence_id))
                by_song[s.song_id].push_back(&s);
        std::vector<SongResult> results;
        for (const auto& [song, candidates] : by_song) {
            ContentScores content;
            for (const auto* s : candidates)
                content[s->sentence_id] = content_all.at(s->sentence_id);
            results.push_back(
                select_song(song, candidates, content, style_all, cfg));
        }
        if (sel_out.empty()) {
            namespace fs = std::filesystem;
            fs::create_directories(cfg.output_dir);
            sel_out = cfg.output_dir + "/selections.jsonl";
        }
        write_selections(results, sel_out);
        std::printf("%zu songs -> %s\n", results.size(), sel_out.c_str());
        return 0;
    }

    if (cmd_eval->parsed()) {
        std::vector<SongResult> songs;
        std::map<std::string, std::size_t> song_slot;
        read_jsonl(ev_selections,
                   [&](const nlohmann::json& j, std::size_t line_no) {
                       try {
                           const auto song = j.at("song_id").get<std::string>();
                           auto [it, inserted] =
                               song_slot.emplace(song, songs.size());
                           if (inserted) {
                               songs.emplace_back();
                               songs.back().song_id = song;
                           }
                           SelectedTip tip;
                           tip.sentence_id =
                               j.at("sentence_id").get<std::string>();
                           tip.tokens =
                               j.at("tokens").get<std::vector<std::string>>();
                           songs[it->second].tips.push_back(std::move(tip));
                       } catch (const nlohmann::json::exception& e) {
                           throw DataError(ev_selections + " line " +
                                           std::to_string(line_no) + ": " +
                                           e.what());
                       }
                   });
        std::map<std::string, bool> is_tip;
        if (!ev_labels.empty())
            for (const auto& l : load_labeled(ev_labels))
                is_tip[l.sentence_id] = l.label == TipLabel::Tip;
        EvalReport report =
            evaluate_selections(songs, is_tip, ev_k, ev_strict);
        OrderedJson out = report_to_json(report);
        if (!ev_ratings.empty()) {
            std::vector<std::vector<int>> ratings;
            read_jsonl(ev_ratings,
                       [&](const nlohmann::json& j, std::size_t line_no) {
                           if (!j.contains("ratings"))
                               throw DataError(ev_ratings + " line " +
                                               std::to_string(line_no) +
                                               ": expected ratings array");
                           ratings.push_back(
                               j.at("ratings").get<std::vector<int>>());
                       });
            out["kappa"] = fleiss_kappa(ratings);
        }
        write_model_file(ev_out, out);
        print_report(report);
        if (out.contains("kappa"))
            std::printf("kappa: %.4f\n", out["kappa"].get<double>());
        return 0;
    }

    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run_main(argc, argv);
    } catch (const tipmine::UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return 1;
    } catch (const tipmine::DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return 2;
    } catch (const tipmine::NumericError& e) {
        std::fprintf(stderr, "numeric error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
}
