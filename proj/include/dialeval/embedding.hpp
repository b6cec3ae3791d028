#pragma once

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dialeval/error.hpp"
#include "dialeval/text.hpp"

namespace dialeval {

enum class EmbeddingFormat { text, binary };

/// Immutable-after-load word -> vector table with a fixed dimension.
class EmbeddingStore {
  public:
    explicit EmbeddingStore(std::size_t dimension, std::string source = {})
        : dim_(dimension), source_(std::move(source)) {
        if (dimension == 0) throw ValidationError("embedding dimension must be positive");
    }

    /// Adds a word. A word already present keeps its first vector; the call
    /// then returns false and bumps the duplicate counter.
    bool add(std::string word, std::span<const double> vec) {
        if (vec.size() != dim_)
            throw ValidationError("embedding for '" + word + "' has dimension " + std::to_string(vec.size()) +
                                  ", expected " + std::to_string(dim_));
        if (word.empty()) throw ValidationError("empty embedding word");
        if (index_.count(word)) {
            ++duplicates_;
            return false;
        }
        index_.emplace(word, words_.size());
        words_.push_back(std::move(word));
        data_.insert(data_.end(), vec.begin(), vec.end());
        return true;
    }

    std::optional<std::span<const double>> find(const std::string &word) const {
        auto it = index_.find(word);
        if (it == index_.end()) return std::nullopt;
        return std::span<const double>(data_.data() + it->second * dim_, dim_);
    }

    bool contains(const std::string &word) const { return index_.count(word) > 0; }
    std::size_t dimension() const noexcept { return dim_; }
    std::size_t vocabulary_size() const noexcept { return words_.size(); }
    std::size_t duplicates() const noexcept { return duplicates_; }
    const std::string &source() const noexcept { return source_; }
    const std::vector<std::string> &words() const noexcept { return words_; }
    std::span<const double> vector_at(std::size_t i) const { return {data_.data() + i * dim_, dim_}; }

  private:
    std::size_t dim_;
    std::string source_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::string> words_;
    std::vector<double> data_;
    std::size_t duplicates_ = 0;
};

namespace detail {

inline std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T> bool parse_number(std::string_view s, T &out) {
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc() && p == s.data() + s.size();
}

} // namespace detail

/// Text format: optional header `vocab_size dim`, then `word v1 ... vd`.
inline EmbeddingStore read_embeddings_text(std::istream &in, std::string source = {}) {
    std::string line;
    std::size_t lineno = 0;
    std::optional<EmbeddingStore> store;
    std::optional<std::size_t> declared_vocab;
    std::size_t rows = 0;
    std::vector<double> vec;
    while (std::getline(in, line)) {
        ++lineno;
        const auto fields = detail::split_ws(line);
        if (fields.empty()) continue;
        if (!store && !declared_vocab && fields.size() == 2) {
            std::size_t v = 0;
            std::size_t d = 0;
            if (detail::parse_number(fields[0], v) && detail::parse_number(fields[1], d)) {
                if (d == 0) throw ValidationError("embedding header: dimension must be positive");
                declared_vocab = v;
                store.emplace(d, source);
                continue;
            }
        }
        if (fields.size() < 2) throw ValidationError("embedding line " + std::to_string(lineno) + ": no vector values");
        const std::size_t d = fields.size() - 1;
        if (!store) store.emplace(d, source);
        if (d != store->dimension())
            throw ValidationError("embedding line " + std::to_string(lineno) + ": dimension mismatch (" +
                                  std::to_string(d) + " vs " + std::to_string(store->dimension()) + ")");
        vec.assign(d, 0.0);
        for (std::size_t k = 0; k < d; ++k) {
            if (!detail::parse_number(fields[k + 1], vec[k]) || !std::isfinite(vec[k]))
                throw ValidationError("embedding line " + std::to_string(lineno) + ": bad number '" +
                                      std::string(fields[k + 1]) + "'");
        }
        store->add(std::string(fields[0]), vec);
        ++rows;
    }
    if (!store) throw ValidationError("embedding file is empty");
    if (declared_vocab && *declared_vocab != rows)
        throw ValidationError("embedding header declares " + std::to_string(*declared_vocab) + " words, found " +
                              std::to_string(rows));
    if (store->vocabulary_size() == 0) throw ValidationError("embedding file has no vectors");
    return std::move(*store);
}

/// Binary format: header `vocab_size dim\n`, then per word the word bytes, a
/// space, and `dim` little-endian IEEE-754 float32 values. Whitespace between
/// records (word2vec writes a newline) is skipped.
inline EmbeddingStore read_embeddings_binary(std::istream &in, std::string source = {}) {
    std::string header;
    if (!std::getline(in, header)) throw ValidationError("embedding file is empty");
    const auto fields = detail::split_ws(header);
    std::size_t vocab = 0;
    std::size_t dim = 0;
    if (fields.size() != 2 || !detail::parse_number(fields[0], vocab) || !detail::parse_number(fields[1], dim) ||
        dim == 0)
        throw ValidationError("malformed binary embedding header: '" + header + "'");
    EmbeddingStore store(dim, std::move(source));
    std::vector<double> vec(dim);
    std::vector<unsigned char> raw(dim * 4);
    for (std::size_t w = 0; w < vocab; ++w) {
        int c = in.get();
        while (c == '\n' || c == '\r' || c == ' ' || c == '\t') c = in.get();
        if (c == EOF) throw ValidationError("binary embeddings truncated at word " + std::to_string(w));
        std::string word;
        while (c != ' ' && c != EOF) {
            word += static_cast<char>(c);
            c = in.get();
        }
        if (c == EOF) throw ValidationError("binary embeddings truncated in word " + std::to_string(w));
        if (!in.read(reinterpret_cast<char *>(raw.data()), static_cast<std::streamsize>(raw.size())))
            throw ValidationError("binary embeddings truncated in vector of '" + word + "'");
        for (std::size_t k = 0; k < dim; ++k) {
            const std::uint32_t bits = static_cast<std::uint32_t>(raw[4 * k]) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 1]) << 8) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 2]) << 16) |
                                       (static_cast<std::uint32_t>(raw[4 * k + 3]) << 24);
            vec[k] = static_cast<double>(std::bit_cast<float>(bits));
        }
        store.add(std::move(word), vec);
    }
    if (vocab == 0) throw ValidationError("binary embedding file declares no words");
    return store;
}

inline EmbeddingStore load_embeddings(const std::string &path, EmbeddingFormat format = EmbeddingFormat::text) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open embeddings: " + path);
    return format == EmbeddingFormat::text ? read_embeddings_text(in, path) : read_embeddings_binary(in, path);
}

/// Writes the text format with a header line; values use 17 significant
/// digits so a re-read reproduces them exactly.
inline void write_embeddings_text(std::ostream &out, const EmbeddingStore &store, bool header = true) {
    if (header) out << store.vocabulary_size() << ' ' << store.dimension() << '\n';
    char buf[32];
    for (std::size_t i = 0; i < store.vocabulary_size(); ++i) {
        out << store.words()[i];
        for (double v : store.vector_at(i)) {
            std::snprintf(buf, sizeof buf, " %.17g", v);
            out << buf;
        }
        out << '\n';
    }
}

/// Writes the binary format. Values are narrowed to float32.
inline void write_embeddings_binary(std::ostream &out, const EmbeddingStore &store) {
    out << store.vocabulary_size() << ' ' << store.dimension() << '\n';
    for (std::size_t i = 0; i < store.vocabulary_size(); ++i) {
        out << store.words()[i] << ' ';
        for (double v : store.vector_at(i)) {
            const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
            const char b[4] = {static_cast<char>(bits & 0xFF), static_cast<char>((bits >> 8) & 0xFF),
                               static_cast<char>((bits >> 16) & 0xFF), static_cast<char>((bits >> 24) & 0xFF)};
            out.write(b, 4);
        }
    }
}

// ---------------------------------------------------------------------------
// Metrics

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: length mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) throw UndefinedScore(reason::kZeroVector, "cosine similarity with a zero vector");
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

struct SentenceVector {
    std::vector<double> values;
    std::size_t source_token_count = 0;
};

/// Vectors of the in-vocabulary tokens of `s`, in token order. Out-of-
/// vocabulary tokens are skipped.
inline std::vector<std::span<const double>> in_vocabulary(const TokenSequence &s, const EmbeddingStore &store) {
    std::vector<std::span<const double>> out;
    for (const auto &t : s) {
        if (auto v = store.find(t)) out.push_back(*v);
    }
    return out;
}

/// G(r,h): mean over in-vocabulary tokens of r of the best cosine against the
/// in-vocabulary tokens of h.
inline double greedy_match_directed(const TokenSequence &r, const TokenSequence &h, const EmbeddingStore &store) {
    const auto rv = in_vocabulary(r, store);
    const auto hv = in_vocabulary(h, store);
    if (rv.empty() || hv.empty()) throw UndefinedScore(reason::kOovSentence, "sentence has no in-vocabulary tokens");
    double total = 0.0;
    for (const auto &a : rv) {
        double best = -std::numeric_limits<double>::infinity();
        for (const auto &b : hv) best = std::max(best, cosine_similarity(a, b));
        total += best;
    }
    return total / static_cast<double>(rv.size());
}

/// GM(r,h) = (G(r,h) + G(h,r)) / 2; symmetric.
inline double greedy_match(const TokenSequence &r, const TokenSequence &h, const EmbeddingStore &store) {
    return (greedy_match_directed(r, h, store) + greedy_match_directed(h, r, store)) / 2.0;
}

/// Sum of in-vocabulary token vectors scaled to unit length. Repeated tokens
/// count once per occurrence.
inline SentenceVector embedding_average(const TokenSequence &s, const EmbeddingStore &store) {
    const auto vs = in_vocabulary(s, store);
    if (vs.empty()) throw UndefinedScore(reason::kOovSentence, "sentence has no in-vocabulary tokens");
    SentenceVector out;
    out.values.assign(store.dimension(), 0.0);
    for (const auto &v : vs) {
        for (std::size_t d = 0; d < v.size(); ++d) out.values[d] += v[d];
    }
    double norm2 = 0.0;
    for (double x : out.values) norm2 += x * x;
    if (norm2 == 0.0) throw UndefinedScore(reason::kZeroVector, "token vectors sum to zero");
    const double norm = std::sqrt(norm2);
    for (double &x : out.values) x /= norm;
    out.source_token_count = vs.size();
    return out;
}

inline double average_metric(const TokenSequence &r, const TokenSequence &h, const EmbeddingStore &store) {
    return cosine_similarity(embedding_average(r, store).values, embedding_average(h, store).values);
}

/// Per dimension, the maximum when it strictly exceeds the magnitude of the
/// minimum, otherwise the minimum (so ties go to the minimum).
inline SentenceVector extrema_vector(const TokenSequence &s, const EmbeddingStore &store) {
    const auto vs = in_vocabulary(s, store);
    if (vs.empty()) throw UndefinedScore(reason::kOovSentence, "sentence has no in-vocabulary tokens");
    SentenceVector out;
    out.values.resize(store.dimension());
    for (std::size_t d = 0; d < store.dimension(); ++d) {
        double hi = vs.front()[d];
        double lo = vs.front()[d];
        for (const auto &v : vs) {
            hi = std::max(hi, v[d]);
            lo = std::min(lo, v[d]);
        }
        out.values[d] = hi > std::abs(lo) ? hi : lo;
    }
    out.source_token_count = vs.size();
    return out;
}

inline double extrema_metric(const TokenSequence &r, const TokenSequence &h, const EmbeddingStore &store) {
    return cosine_similarity(extrema_vector(r, store).values, extrema_vector(h, store).values);
}

} // namespace dialeval
