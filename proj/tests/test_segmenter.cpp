#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "tipmine/hashing.hpp"
#include "tipmine/segmenter.hpp"

using namespace tipmine;

namespace {

const std::string kOriginalReview =
    "听着听着，就哭了，这首歌的MV我看过，男主角不帅，女主角不错，故事的最后令人感动。";
const std::string kCorrectedReview =
    "听着听着，就哭了。这首歌的MV我看过，男主角不帅，女主角不错。故事的最后令人感动。";

// Synthetic deterministic-rule corpus: the marker word END always precedes a
// full stop, MID always precedes a comma, and everything else is plain text.
std::vector<std::string> synthetic_corpus(int n, std::uint64_t seed) {
    static const char* words[] = {"song", "tune", "beat", "voice", "echo",
                                  "sound", "tone", "note", "drift", "wave"};
    std::vector<std::string> lines;
    Uniform01 rng(seed);
    for (int i = 0; i < n; ++i) {
        std::string line;
        const int segments = 2 + static_cast<int>(rng.next() * 3);
        for (int s = 0; s < segments; ++s) {
            const int len = 2 + static_cast<int>(rng.next() * 3);
            for (int w = 0; w < len; ++w) {
                line += words[static_cast<int>(rng.next() * 10)];
                line += ' ';
            }
            if (rng.next() < 0.5) {
                line += "END。";
            } else {
                line += "MID，";
            }
        }
        lines.push_back(line);
    }
    return lines;
}

}  // namespace

TEST_CASE("extract_sites finds candidate punctuation in order", "[segmenter]") {
    SegmenterConfig cfg;
    const auto sites = extract_sites("r1", "听着，就哭了。", cfg);
    REQUIRE(sites.size() == 2);
    CHECK(sites[0].char_index == 2);
    CHECK(sites[0].original == PunctClass::Comma);
    CHECK(sites[1].char_index == 6);
    CHECK(sites[1].original == PunctClass::FullStop);
    CHECK(utf8::encode(sites[0].left) == "听着");
    CHECK(utf8::encode(sites[0].right) == "就哭了。");

    CHECK(extract_sites("r2", "没有标点符号", cfg).empty());

    const auto edge = extract_sites("r3", "。abc", cfg);
    REQUIRE(edge.size() == 1);
    CHECK(edge[0].char_index == 0);
    CHECK(edge[0].left.empty());
}

TEST_CASE("context windows clip at review edges", "[segmenter]") {
    SegmenterConfig cfg;
    cfg.window = 8;
    const auto sites = extract_sites("r", "abc。defghijklmnop，qq", cfg);
    REQUIRE(sites.size() == 2);
    CHECK(utf8::encode(sites[0].left) == "abc");
    CHECK(utf8::encode(sites[0].right) == "defghijk");
    CHECK(utf8::encode(sites[1].left) == "ijklmnop");
    CHECK(utf8::encode(sites[1].right) == "qq");
}

TEST_CASE("train_punct learns the deterministic marker rule", "[segmenter]") {
    const auto lines = synthetic_corpus(2000, 11);
    const std::size_t split = lines.size() * 4 / 5;
    const std::vector<std::string> train(lines.begin(), lines.begin() + split);
    const std::vector<std::string> holdout(lines.begin() + split, lines.end());

    SegmenterConfig cfg;
    const PunctModel model = train_punct(train, cfg);

    std::size_t correct = 0, total = 0;
    for (std::size_t i = 0; i < holdout.size(); ++i) {
        const auto sites =
            extract_sites("h" + std::to_string(i), holdout[i], cfg);
        for (const auto& site : sites) {
            ++total;
            if (model.classify(site).label == site.original) ++correct;
        }
    }
    REQUIRE(total > 100);
    CHECK(static_cast<double>(correct) / static_cast<double>(total) >= 0.95);

    // the END marker in the left context forces FullStop
    PunctSite probe;
    probe.left = utf8::decode("beat END");
    probe.right = utf8::decode("song");
    CHECK(model.classify(probe).label == PunctClass::FullStop);
}

TEST_CASE("train_punct is deterministic", "[segmenter]") {
    const auto lines = synthetic_corpus(60, 3);
    const PunctModel a = train_punct(lines);
    const PunctModel b = train_punct(lines);
    REQUIRE(a.weights.size() == b.weights.size());
    for (std::size_t i = 0; i < a.weights.size(); ++i)
        CHECK(a.weights[i] == b.weights[i]);
}

TEST_CASE("train_punct rejects corpora missing a class", "[segmenter]") {
    // commas only: both full_stop and empty sites exist, comma labels do too,
    // so remove stops entirely
    CHECK_THROWS_WITH(train_punct({"word。word。", "tune。"}),
                      Catch::Matchers::ContainsSubstring("comma"));
    CHECK_THROWS_WITH(train_punct({"a，b，", "c，d，"}),
                      Catch::Matchers::ContainsSubstring("full_stop"));
}

TEST_CASE("classify_site output is a distribution", "[segmenter]") {
    const auto lines = synthetic_corpus(100, 5);
    const PunctModel model = train_punct(lines);
    const auto sites = extract_sites("x", lines[0], model.config);
    REQUIRE(!sites.empty());
    for (const auto& s : sites) {
        const auto d = model.classify(s);
        double sum = 0.0;
        for (double p : d.proba) {
            CHECK(p >= 0.0);
            sum += p;
        }
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("empty contexts fall back to the training priors", "[segmenter]") {
    const auto lines = synthetic_corpus(100, 9);
    const PunctModel model = train_punct(lines);
    PunctSite bare;
    const auto d = model.classify(bare);
    int prior_argmax = 0;
    for (int c = 1; c < 3; ++c)
        if (model.priors[c] > model.priors[prior_argmax]) prior_argmax = c;
    CHECK(static_cast<int>(d.label) == prior_argmax);
    CHECK(d.proba[0] == model.priors[0]);
}

TEST_CASE("correct_review reproduces the reference correction", "[segmenter]") {
    // stub predictor carrying the two documented decisions: the commas after
    // the 8th and 30th characters become full stops
    MapPredictor stub;
    stub.set("r1", 8, PunctClass::FullStop);
    stub.set("r1", 30, PunctClass::FullStop);
    CHECK(correct_review(stub, "r1", kOriginalReview) == kCorrectedReview);
}

TEST_CASE("correct_review is identity when predictions match originals",
          "[segmenter]") {
    MapPredictor keep;
    CHECK(correct_review(keep, "r", kOriginalReview) == kOriginalReview);
    CHECK(correct_review(keep, "r", "keep. my! marks?") ==
          "keep. my! marks?");
}

TEST_CASE("correct_review deletes characters predicted empty", "[segmenter]") {
    MapPredictor del;
    del.set("r", 1, PunctClass::Empty);
    CHECK(correct_review(del, "r", "a，b") == "ab");

    // substitution to the canonical marks
    MapPredictor swap;
    swap.set("r", 1, PunctClass::Comma);
    CHECK(correct_review(swap, "r", "a。b") == "a，b");
}

TEST_CASE("correct_review preserves non-candidate characters in order",
          "[segmenter]") {
    const auto lines = synthetic_corpus(50, 21);
    const PunctModel model = train_punct(lines);
    const std::string text = "深海 mix，good песня。代码２０测试！ok";
    const std::string corrected =
        correct_review(ModelPredictor(model), "r", text, model.config);

    auto strip = [](const std::string& s) {
        SegmenterConfig cfg;
        std::u32string kept;
        for (char32_t cp : utf8::decode(s)) {
            if (cfg.full_stops.find(cp) != std::u32string::npos) continue;
            if (cfg.commas.find(cp) != std::u32string::npos) continue;
            kept.push_back(cp);
        }
        return utf8::encode(kept);
    };
    CHECK(strip(corrected) == strip(text));
}

TEST_CASE("split_sentences matches the reference segmentation", "[segmenter]") {
    const auto sentences =
        split_sentences(kCorrectedReview, "song1", "r1", 42);
    REQUIRE(sentences.size() == 3);
    CHECK(sentences[0].text == "听着听着，就哭了。");
    CHECK(sentences[1].text == "这首歌的MV我看过，男主角不帅，女主角不错。");
    CHECK(sentences[2].text == "故事的最后令人感动。");
    for (const auto& s : sentences) {
        CHECK(s.song_id == "song1");
        CHECK(s.review_id == "r1");
        CHECK(s.approvals == 42);
        CHECK(!s.tokens.empty());
    }
    CHECK(sentences[0].sentence_id == "r1#0");
    CHECK(sentences[2].sentence_id == "r1#2");
}

TEST_CASE("split_sentences keeps trailing fragments and drops empties",
          "[segmenter]") {
    SegmenterConfig loose;
    loose.min_tokens = 1;
    const auto kept = split_sentences("abc", "s", "r", 0, loose);
    REQUIRE(kept.size() == 1);
    CHECK(kept[0].text == "abc");

    CHECK(split_sentences("。。。", "s", "r", 0).empty());
    CHECK(split_sentences("", "s", "r", 0).empty());

    // min_tokens=2 default drops one-token fragments
    const auto filtered = split_sentences("好。非常好。", "s", "r", 0);
    REQUIRE(filtered.size() == 1);
    CHECK(filtered[0].text == "非常好。");
}

TEST_CASE("split then concatenate reconstructs the corrected text",
          "[segmenter]") {
    SegmenterConfig cfg;
    cfg.min_tokens = 1;
    const std::string texts[] = {kCorrectedReview, "abc。def",
                                 "one two。three！four?tail"};
    for (const auto& text : texts) {
        const auto sentences = split_sentences(text, "s", "r", 0, cfg);
        std::string joined;
        for (const auto& s : sentences) joined += s.text;
        auto no_space = [](std::string s) {
            s.erase(std::remove(s.begin(), s.end(), ' '), s.end());
            return s;
        };
        CHECK(no_space(joined) == no_space(text));
    }
}

TEST_CASE("punct model persistence round-trips byte-identically",
          "[segmenter]") {
    const auto lines = synthetic_corpus(80, 13);
    const PunctModel model = train_punct(lines);
    oracles::TempDir dir("punct");
    save_punct_model(model, dir.file("m1.json"));
    const PunctModel loaded = load_punct_model(dir.file("m1.json"));
    save_punct_model(loaded, dir.file("m2.json"));

    std::ifstream f1(dir.file("m1.json")), f2(dir.file("m2.json"));
    const std::string s1((std::istreambuf_iterator<char>(f1)),
                         std::istreambuf_iterator<char>());
    const std::string s2((std::istreambuf_iterator<char>(f2)),
                         std::istreambuf_iterator<char>());
    REQUIRE(!s1.empty());
    CHECK(s1 == s2);

    // behavioral equality too
    const auto sites = extract_sites("q", lines[0], model.config);
    for (const auto& s : sites)
        CHECK(model.classify(s).label == loaded.classify(s).label);
}

TEST_CASE("external label files drive the predictor", "[segmenter]") {
    oracles::TempDir dir("extlabels");
    oracles::write_file(
        dir.file("labels.jsonl"),
        "{\"review_id\":\"r1\",\"char_index\":8,\"label\":\"full_stop\"}\n"
        "{\"review_id\":\"r1\",\"char_index\":30,\"label\":\"full_stop\"}\n");
    const MapPredictor pred = load_external_labels(dir.file("labels.jsonl"));
    CHECK(pred.size() == 2);
    CHECK(correct_review(pred, "r1", kOriginalReview) == kCorrectedReview);

    oracles::write_file(dir.file("bad.jsonl"),
                        "{\"review_id\":\"r1\",\"char_index\":0,"
                        "\"label\":\"mystery\"}\n");
    CHECK_THROWS_AS(load_external_labels(dir.file("bad.jsonl")), DataError);
}
