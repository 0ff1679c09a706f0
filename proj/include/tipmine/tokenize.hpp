#pragma once

// Tokenization used by the graph ranker, topic model, and Distinct metrics.
// Default rule: runs of alphanumeric/Latin codepoints form one token, every
// Han/Kana/Hangul character is its own token, everything else separates.

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "tipmine/utf8.hpp"

namespace tipmine {

class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
};

class DefaultTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override {
        std::vector<std::string> tokens;
        std::string word;
        auto flush = [&] {
            if (!word.empty()) {
                tokens.push_back(word);
                word.clear();
            }
        };
        std::size_t i = 0;
        while (i < text.size()) {
            const char32_t cp = utf8::decode_one(text, i);
            if (utf8::is_word_char(cp)) {
                utf8::append(word, cp);
            } else if (utf8::is_cjk(cp)) {
                flush();
                tokens.push_back(utf8::encode(cp));
            } else {
                flush();
            }
        }
        flush();
        return tokens;
    }
};

inline const Tokenizer& default_tokenizer() {
    static const DefaultTokenizer tok;
    return tok;
}

inline std::vector<std::string> tokenize(std::string_view text) {
    return default_tokenizer().tokenize(text);
}

}  // namespace tipmine
