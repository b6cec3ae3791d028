#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <initializer_list>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dialeval/error.hpp"

namespace dialeval {

struct TokenizerConfig {
    bool lowercase = true;
    bool strip_punctuation = false;
    /// Keep `<placeholder>` tokens and `@mentions` as single tokens.
    bool keep_placeholders = true;

    friend bool operator==(const TokenizerConfig &, const TokenizerConfig &) = default;
};

/// Ordered list of non-empty tokens.
class TokenSequence {
  public:
    TokenSequence() = default;
    TokenSequence(std::initializer_list<std::string> tokens) : TokenSequence(std::vector<std::string>(tokens)) {}
    explicit TokenSequence(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
        for (const auto &t : tokens_) {
            if (t.empty()) throw ValidationError("TokenSequence: empty token");
        }
    }

    std::size_t size() const noexcept { return tokens_.size(); }
    bool empty() const noexcept { return tokens_.empty(); }
    const std::string &operator[](std::size_t i) const { return tokens_[i]; }
    auto begin() const noexcept { return tokens_.begin(); }
    auto end() const noexcept { return tokens_.end(); }
    const std::vector<std::string> &tokens() const noexcept { return tokens_; }

    /// Tokens joined by single spaces.
    std::string join() const {
        std::string out;
        for (std::size_t i = 0; i < tokens_.size(); ++i) {
            if (i) out += ' ';
            out += tokens_[i];
        }
        return out;
    }

    friend bool operator==(const TokenSequence &, const TokenSequence &) = default;

  private:
    std::vector<std::string> tokens_;
};

using NGram = std::vector<std::string>;

/// Multiset of n-grams of a single order.
struct NGramCounts {
    std::size_t order = 1;
    std::map<NGram, std::size_t> counts;

    std::size_t total() const {
        std::size_t s = 0;
        for (const auto &[k, c] : counts) s += c;
        return s;
    }
    std::size_t count(const NGram &k) const {
        auto it = counts.find(k);
        return it == counts.end() ? 0 : it->second;
    }
};

namespace detail {

struct Utf8Char {
    char32_t cp;
    std::size_t len;
    bool valid;
};

inline Utf8Char decode_utf8(std::string_view s, std::size_t i) {
    const auto b0 = static_cast<unsigned char>(s[i]);
    if (b0 < 0x80) return {b0, 1, true};
    std::size_t len = 0;
    char32_t cp = 0;
    if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        return {0xFFFD, 1, false};
    }
    if (i + len > s.size()) return {0xFFFD, 1, false};
    for (std::size_t k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) return {0xFFFD, 1, false};
        cp = (cp << 6) | (b & 0x3F);
    }
    // reject overlong forms
    if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) || (len == 4 && (cp < 0x10000 || cp > 0x10FFFF)))
        return {0xFFFD, 1, false};
    return {cp, len, true};
}

inline void append_utf8(std::string &out, char32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

/// Simple (one-to-one) lowercase mapping for Latin, Latin-1, Latin Extended-A,
/// Greek and Cyrillic capitals. Everything else maps to itself.
inline char32_t to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') return c + 0x20;
    if (c < 0x80) return c;
    if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
    if ((c >= 0x100 && c <= 0x137) || (c >= 0x14A && c <= 0x177)) return (c % 2 == 0) ? c + 1 : c;
    if ((c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E)) return (c % 2 == 1) ? c + 1 : c;
    if (c == 0x178) return 0xFF;
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
    if (c >= 0x410 && c <= 0x42F) return c + 0x20;
    if (c >= 0x400 && c <= 0x40F) return c + 0x50;
    return c;
}

inline bool is_space(char32_t c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f' || c == 0xA0 ||
           (c >= 0x2000 && c <= 0x200A) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
           c == 0x3000;
}

/// ASCII punctuation (underscore excluded, it is a word character) plus the
/// common Latin-1 and General Punctuation marks.
inline bool is_punct(char32_t c) {
    if (c < 0x80) {
        return c != '_' && ((c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                            (c >= 0x7B && c <= 0x7E));
    }
    switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
        return true;
    default:
        break;
    }
    return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
           (c >= 0x3008 && c <= 0x3011);
}

inline bool is_word_char(char32_t c) { return !is_space(c) && !is_punct(c); }

inline bool is_placeholder_char(char32_t c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

} // namespace detail

/// True when every code point of `token` is punctuation.
inline bool is_punctuation_token(std::string_view token) {
    if (token.empty()) return false;
    for (std::size_t i = 0; i < token.size();) {
        auto u = detail::decode_utf8(token, i);
        if (!u.valid || !detail::is_punct(u.cp)) return false;
        i += u.len;
    }
    return true;
}

/// Splits on whitespace and detaches punctuation marks as one-character
/// tokens. With `keep_placeholders`, `<word>` and `@word` survive as single
/// tokens. Bytes that are not valid UTF-8 are kept verbatim as word bytes.
inline TokenSequence tokenize(std::string_view text, const TokenizerConfig &config = {}) {
    std::vector<std::string> out;
    std::string word;
    auto flush = [&] {
        if (!word.empty()) out.push_back(std::move(word));
        word.clear();
    };
    auto put = [&](std::string &dst, char32_t cp) { detail::append_utf8(dst, config.lowercase ? detail::to_lower(cp) : cp); };

    std::size_t i = 0;
    while (i < text.size()) {
        const auto u = detail::decode_utf8(text, i);
        if (!u.valid) {
            word += text[i];
            i += 1;
            continue;
        }
        const char32_t c = u.cp;
        if (detail::is_space(c)) {
            flush();
            i += u.len;
            continue;
        }
        if (config.keep_placeholders && c == '<') {
            std::size_t j = i + 1;
            while (j < text.size() && detail::is_placeholder_char(static_cast<unsigned char>(text[j]))) ++j;
            if (j > i + 1 && j < text.size() && text[j] == '>') {
                flush();
                std::string tok;
                for (std::size_t k = i; k <= j; ++k) put(tok, static_cast<unsigned char>(text[k]));
                out.push_back(std::move(tok));
                i = j + 1;
                continue;
            }
        }
        if (config.keep_placeholders && c == '@' && word.empty() && i + 1 < text.size()) {
            std::string tok = "@";
            std::size_t j = i + 1;
            while (j < text.size()) {
                auto v = detail::decode_utf8(text, j);
                if (v.valid && !detail::is_word_char(v.cp) && v.cp != '_') break;
                if (v.valid) {
                    put(tok, v.cp);
                } else {
                    tok += text[j];
                }
                j += v.len;
            }
            if (j > i + 1) {
                out.push_back(std::move(tok));
                i = j;
                continue;
            }
        }
        if (detail::is_punct(c)) {
            flush();
            if (!config.strip_punctuation) {
                std::string tok;
                put(tok, c);
                out.push_back(std::move(tok));
            }
            i += u.len;
            continue;
        }
        put(word, c);
        i += u.len;
    }
    flush();
    return TokenSequence(std::move(out));
}

inline NGramCounts ngrams(const TokenSequence &seq, std::size_t n) {
    if (n == 0) throw ValidationError("ngrams: order must be >= 1");
    NGramCounts out;
    out.order = n;
    if (seq.size() < n) return out;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
        NGram key(seq.begin() + static_cast<std::ptrdiff_t>(i), seq.begin() + static_cast<std::ptrdiff_t>(i + n));
        ++out.counts[std::move(key)];
    }
    return out;
}

/// Set of tokens removed by the stopword ablation.
class StopList {
  public:
    StopList() = default;
    explicit StopList(std::set<std::string> words) : words_(std::move(words)) {}

    bool contains(const std::string &w) const { return words_.count(w) > 0; }
    bool empty() const noexcept { return words_.empty(); }
    std::size_t size() const noexcept { return words_.size(); }
    const std::set<std::string> &words() const noexcept { return words_; }

    /// FNV-1a 64 over the sorted words joined by '\n', as 16 hex digits.
    /// Identifies the list in reports.
    std::string hash() const {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        auto mix = [&](unsigned char b) {
            h ^= b;
            h *= 0x100000001b3ULL;
        };
        bool first = true;
        for (const auto &w : words_) {
            if (!first) mix('\n');
            first = false;
            for (unsigned char b : w) mix(b);
        }
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

  private:
    std::set<std::string> words_;
};

inline TokenSequence remove_stopwords(const TokenSequence &seq, const StopList &stoplist) {
    std::vector<std::string> kept;
    kept.reserve(seq.size());
    for (const auto &t : seq) {
        if (!stoplist.contains(t)) kept.push_back(t);
    }
    return TokenSequence(std::move(kept));
}

/// Bundled English stopword list (lowercase) plus the ASCII punctuation marks,
/// so the default ablation drops both.
inline StopList default_stoplist() {
    static const char *const kWords[] = {
        "a", "about", "above", "after", "again", "against", "all", "am", "an", "and", "any", "are", "as", "at",
        "be", "because", "been", "before", "being", "below", "between", "both", "but", "by", "can", "could",
        "did", "do", "does", "doing", "don", "down", "during", "each", "few", "for", "from", "further", "had",
        "has", "have", "having", "he", "her", "here", "hers", "herself", "him", "himself", "his", "how", "i",
        "if", "in", "into", "is", "it", "its", "itself", "just", "ll", "me", "might", "more", "most", "must",
        "my", "myself", "no", "nor", "not", "now", "of", "off", "on", "once", "only", "or", "other", "ought",
        "our", "ours", "ourselves", "out", "over", "own", "re", "s", "same", "shall", "she", "should", "so",
        "some", "such", "t", "than", "that", "the", "their", "theirs", "them", "themselves", "then", "there",
        "these", "they", "this", "those", "through", "to", "too", "under", "until", "up", "ve", "very", "was",
        "we", "were", "what", "when", "where", "which", "while", "who", "whom", "why", "will", "with", "would",
        "you", "your", "yours", "yourself", "yourselves", "d", "m", "o", "y", "also", "yet", "upon", "whose",
    };
    std::set<std::string> words(std::begin(kWords), std::end(kWords));
    for (char c = 0x21; c < 0x7F; ++c) {
        if (detail::is_punct(static_cast<unsigned char>(c))) words.insert(std::string(1, c));
    }
    return StopList(std::move(words));
}

/// Reads a stopword file: UTF-8, one token per line; lines whose first
/// non-blank character is `#` are comments. Surrounding whitespace is trimmed.
inline StopList load_stoplist(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open stopword file: " + path);
    std::set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos || line[b] == '#') continue;
        auto e = line.find_last_not_of(" \t\r");
        words.insert(line.substr(b, e - b + 1));
    }
    return StopList(std::move(words));
}

} // namespace dialeval
