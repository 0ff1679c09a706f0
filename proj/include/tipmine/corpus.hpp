#pragma once

// Review ingestion and the canonical data model shared by all stages.
// Input files are JSON Lines: one UTF-8 record per line.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "tipmine/error.hpp"
#include "tipmine/utf8.hpp"

namespace tipmine {

struct RawReview {
    std::string song_id;
    std::string review_id;
    std::string text;
    std::int64_t approvals = 0;
};

enum class Genre {
    Unknown,
    AbsoluteMusic,
    RockAndRoll,
    FilmTv,
    ChinesePop,
    EajkPop,
};

inline Genre parse_genre(std::string_view s) {
    if (s == "absolute_music") return Genre::AbsoluteMusic;
    if (s == "rock_and_roll") return Genre::RockAndRoll;
    if (s == "film_tv") return Genre::FilmTv;
    if (s == "chinese_pop") return Genre::ChinesePop;
    if (s == "eajk_pop") return Genre::EajkPop;
    return Genre::Unknown;
}

inline const char* genre_name(Genre g) {
    switch (g) {
        case Genre::AbsoluteMusic: return "absolute_music";
        case Genre::RockAndRoll: return "rock_and_roll";
        case Genre::FilmTv: return "film_tv";
        case Genre::ChinesePop: return "chinese_pop";
        case Genre::EajkPop: return "eajk_pop";
        default: return "unknown";
    }
}

struct SongMeta {
    std::string song_id;
    std::string title;
    std::string artist;
    std::string lyrics;             // optional, empty when absent
    Genre genre = Genre::Unknown;   // optional
    bool placeholder = false;       // true when synthesized in lenient mode
};

struct Sentence {
    std::string sentence_id;
    std::string song_id;
    std::string review_id;
    std::string text;
    std::vector<std::string> tokens;
    std::int64_t approvals = 0;
};

struct IngestReport {
    std::size_t loaded = 0;     // well-formed records kept
    std::size_t dropped = 0;    // empty after normalization
    std::size_t malformed = 0;  // rejected lines
    std::vector<std::string> issues;

    void issue(std::size_t line_no, const std::string& what) {
        ++malformed;
        issues.push_back("line " + std::to_string(line_no) + ": " + what);
    }
};

struct NormalizeOptions {
    // Runs of this many or more identical non-punctuation characters are
    // collapsed to run_keep.
    int run_limit = 4;
    int run_keep = 3;
    bool strip_emoji = true;
    std::vector<std::pair<char32_t, char32_t>> extra_strip_ranges;
};

namespace detail {

inline bool in_strip_set(char32_t cp, const NormalizeOptions& opt) {
    if (utf8::is_control(cp) || utf8::is_zero_width(cp)) return true;
    if (opt.strip_emoji && utf8::is_emoji(cp)) return true;
    for (const auto& [lo, hi] : opt.extra_strip_ranges)
        if (cp >= lo && cp <= hi) return true;
    return false;
}

}  // namespace detail

// Collapses whitespace runs to a single space, trims the ends, collapses long
// identical-character runs (punctuation excluded), and strips the configured
// symbol set. Idempotent; may return the empty string.
inline std::string normalize_text(std::string_view text,
                                  const NormalizeOptions& opt = {}) {
    std::u32string kept;
    kept.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = utf8::decode_one(text, i);
        if (utf8::is_space(cp)) {
            kept.push_back(U' ');
            continue;
        }
        if (detail::in_strip_set(cp, opt)) continue;
        kept.push_back(cp);
    }

    std::u32string out;
    out.reserve(kept.size());
    std::size_t run = 0;
    for (std::size_t j = 0; j < kept.size(); ++j) {
        const char32_t cp = kept[j];
        if (cp == U' ') {
            if (out.empty() || out.back() == U' ') continue;  // collapse + trim left
            out.push_back(U' ');
            run = 0;
            continue;
        }
        if (!out.empty() && out.back() == cp && !utf8::is_punct(cp)) {
            ++run;
            if (run >= static_cast<std::size_t>(opt.run_limit)) continue;
        } else {
            run = 1;
        }
        out.push_back(cp);
    }
    while (!out.empty() && out.back() == U' ') out.pop_back();

    // run counting above allows exactly run_keep = run_limit - 1 repeats when
    // run_limit-1 == run_keep; enforce the general case with a second pass
    if (opt.run_keep < opt.run_limit - 1) {
        std::u32string squeezed;
        squeezed.reserve(out.size());
        std::size_t count = 0;
        for (std::size_t j = 0; j < out.size(); ++j) {
            if (j > 0 && out[j] == out[j - 1] && !utf8::is_punct(out[j])) {
                ++count;
            } else {
                count = 1;
            }
            if (count <= static_cast<std::size_t>(opt.run_keep) ||
                utf8::is_punct(out[j]))
                squeezed.push_back(out[j]);
        }
        out.swap(squeezed);
    }
    return utf8::encode(out);
}

namespace detail {

inline bool get_string(const nlohmann::json& j, const char* key,
                       std::string& out) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return false;
    out = it->get<std::string>();
    return true;
}

}  // namespace detail

// Reads a JSONL review file. Malformed lines are counted in the report with
// their line numbers; a missing file is fatal.
inline std::vector<RawReview> load_reviews(const std::string& path,
                                           IngestReport& report) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open reviews file: " + path);

    std::vector<RawReview> reviews;
    std::set<std::pair<std::string, std::string>> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object()) {
            report.issue(line_no, "not a JSON object");
            continue;
        }
        RawReview r;
        if (!detail::get_string(j, "song_id", r.song_id) ||
            !detail::get_string(j, "review_id", r.review_id) ||
            !detail::get_string(j, "text", r.text)) {
            report.issue(line_no, "missing required field");
            continue;
        }
        auto it = j.find("approvals");
        if (it == j.end() || !it->is_number_integer()) {
            report.issue(line_no, "missing or non-integer approvals");
            continue;
        }
        r.approvals = it->get<std::int64_t>();
        if (r.approvals < 0) {
            report.issue(line_no, "negative approvals");
            continue;
        }
        if (!seen.emplace(r.song_id, r.review_id).second) {
            report.issue(line_no,
                         "duplicate (song_id, review_id): " + r.song_id + "/" +
                             r.review_id);
            continue;
        }
        report.loaded++;
        reviews.push_back(std::move(r));
    }
    return reviews;
}

inline std::vector<SongMeta> load_song_meta(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open song metadata file: " + path);

    std::vector<SongMeta> metas;
    std::set<std::string> seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw DataError("song metadata line " + std::to_string(line_no) +
                            ": not a JSON object");
        SongMeta m;
        if (!detail::get_string(j, "song_id", m.song_id))
            throw DataError("song metadata line " + std::to_string(line_no) +
                            ": missing song_id");
        if (!seen.insert(m.song_id).second)
            throw DataError("duplicate song_id in metadata: " + m.song_id);
        detail::get_string(j, "title", m.title);
        detail::get_string(j, "artist", m.artist);
        detail::get_string(j, "lyrics", m.lyrics);
        std::string genre;
        if (detail::get_string(j, "genre", genre)) m.genre = parse_genre(genre);
        metas.push_back(std::move(m));
    }
    return metas;
}

// Normalizes review text in place; reviews that come out empty are dropped
// and counted.
inline void normalize_reviews(std::vector<RawReview>& reviews,
                              IngestReport& report,
                              const NormalizeOptions& opt = {}) {
    std::vector<RawReview> kept;
    kept.reserve(reviews.size());
    for (auto& r : reviews) {
        r.text = normalize_text(r.text, opt);
        if (r.text.empty()) {
            report.dropped++;
            continue;
        }
        kept.push_back(std::move(r));
    }
    reviews.swap(kept);
}

struct SongGroup {
    SongMeta meta;
    std::vector<RawReview> reviews;
};

// A loaded corpus is immutable after construction; songs sorted by id.
struct Corpus {
    std::vector<SongGroup> songs;

    const SongGroup* find(std::string_view song_id) const {
        for (const auto& g : songs)
            if (g.meta.song_id == song_id) return &g;
        return nullptr;
    }

    std::size_t review_count() const {
        std::size_t n = 0;
        for (const auto& g : songs) n += g.reviews.size();
        return n;
    }
};

// Groups reviews by song. Unknown song ids are fatal in strict mode and get
// placeholder metadata otherwise.
inline Corpus attach_metadata(std::vector<RawReview> reviews,
                              const std::vector<SongMeta>& metas,
                              bool strict = false) {
    std::map<std::string, SongGroup> groups;
    for (const auto& m : metas) groups[m.song_id].meta = m;
    for (auto& r : reviews) {
        auto it = groups.find(r.song_id);
        if (it == groups.end()) {
            if (strict)
                throw DataError("review " + r.review_id +
                                " references unknown song_id: " + r.song_id);
            SongGroup g;
            g.meta.song_id = r.song_id;
            g.meta.title = r.song_id;
            g.meta.placeholder = true;
            it = groups.emplace(r.song_id, std::move(g)).first;
        }
        it->second.reviews.push_back(std::move(r));
    }
    Corpus corpus;
    for (auto& [id, g] : groups) {
        if (g.reviews.empty()) continue;  // meta-only songs have nothing to rank
        corpus.songs.push_back(std::move(g));
    }
    return corpus;
}

}  // namespace tipmine
