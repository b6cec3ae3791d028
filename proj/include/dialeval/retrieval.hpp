#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dialeval/error.hpp"
#include "dialeval/metrics.hpp"
#include "dialeval/text.hpp"

namespace dialeval {

struct Dialogue {
    std::string id;
    std::vector<std::string> context; ///< turns, oldest first
    std::string response;
};

using Corpus = std::vector<Dialogue>;

enum class RetrievalMode { context, response }; ///< C-TFIDF, R-TFIDF

inline const char *to_string(RetrievalMode m) { return m == RetrievalMode::context ? "C-TFIDF" : "R-TFIDF"; }

inline RetrievalMode parse_retrieval_mode(const std::string &s) {
    if (s == "C-TFIDF" || s == "c-tfidf" || s == "c" || s == "context") return RetrievalMode::context;
    if (s == "R-TFIDF" || s == "r-tfidf" || s == "r" || s == "response") return RetrievalMode::response;
    throw ValidationError("unknown retrieval mode '" + s + "'");
}

/// Which documents document frequencies are counted over.
enum class DfScope {
    dialogue, ///< one table; a document is context + response of a dialogue
    field,    ///< separate tables for contexts and for responses
};

/// Sparse vector with strictly increasing term indices and no zero weights.
struct SparseVector {
    std::vector<std::pair<std::uint32_t, double>> entries;
    double norm2 = 0.0;

    void finish() {
        norm2 = 0.0;
        for (const auto &e : entries) norm2 += e.second * e.second;
    }
};

/// Cosine of two sparse vectors; nullopt when either is zero.
inline std::optional<double> sparse_cosine(const SparseVector &a, const SparseVector &b) {
    if (a.norm2 == 0.0 || b.norm2 == 0.0) return std::nullopt;
    double dot = 0.0;
    auto i = a.entries.begin();
    auto j = b.entries.begin();
    while (i != a.entries.end() && j != b.entries.end()) {
        if (i->first < j->first) {
            ++i;
        } else if (j->first < i->first) {
            ++j;
        } else {
            dot += i->second * j->second;
            ++i;
            ++j;
        }
    }
    return std::clamp(dot / std::sqrt(a.norm2 * b.norm2), -1.0, 1.0);
}

inline TokenSequence tokenize_turns(const std::vector<std::string> &turns, const TokenizerConfig &cfg) {
    std::vector<std::string> all;
    for (const auto &t : turns) {
        auto seq = tokenize(t, cfg);
        all.insert(all.end(), seq.begin(), seq.end());
    }
    return TokenSequence(std::move(all));
}

/// TF-IDF weights: raw count f(w,d) times ln(N / df(w)).
class TfIdfModel {
  public:
    TokenizerConfig tokenizer;
    DfScope df_scope = DfScope::dialogue;
    std::size_t n_dialogues = 0;
    std::vector<std::string> vocabulary; ///< index -> word
    std::vector<std::size_t> df_context; ///< equals df_response under DfScope::dialogue
    std::vector<std::size_t> df_response;
    std::vector<std::string> ids;
    std::vector<std::string> responses;
    std::vector<SparseVector> context_vectors;
    std::vector<SparseVector> response_vectors;

    std::optional<std::uint32_t> index_of(const std::string &w) const {
        auto it = index_.find(w);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    double idf(std::uint32_t term, RetrievalMode field) const {
        const auto df = field == RetrievalMode::context ? df_context[term] : df_response[term];
        if (df == 0) return 0.0;
        return std::log(static_cast<double>(n_dialogues) / static_cast<double>(df));
    }

    /// Vector of `tokens` under the idf table of `field`. Unknown words and
    /// zero-idf words are dropped.
    SparseVector vectorize(const TokenSequence &tokens, RetrievalMode field) const {
        std::map<std::uint32_t, std::size_t> tf;
        for (const auto &t : tokens) {
            if (auto id = index_of(t)) ++tf[*id];
        }
        SparseVector v;
        for (const auto &[term, count] : tf) {
            const double w = static_cast<double>(count) * idf(term, field);
            if (w != 0.0) v.entries.emplace_back(term, w);
        }
        v.finish();
        return v;
    }

    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < vocabulary.size(); ++i) index_.emplace(vocabulary[i], static_cast<std::uint32_t>(i));
    }

  private:
    std::unordered_map<std::string, std::uint32_t> index_;
};

inline TfIdfModel fit_tfidf(const Corpus &corpus, const TokenizerConfig &tokenizer = {},
                            DfScope scope = DfScope::dialogue) {
    if (corpus.empty()) throw ValidationError("cannot fit TF-IDF on an empty corpus");
    TfIdfModel model;
    model.tokenizer = tokenizer;
    model.df_scope = scope;
    model.n_dialogues = corpus.size();

    std::vector<TokenSequence> ctx_tokens;
    std::vector<TokenSequence> rsp_tokens;
    std::map<std::string, std::uint32_t> vocab;
    for (const auto &d : corpus) {
        ctx_tokens.push_back(tokenize_turns(d.context, tokenizer));
        rsp_tokens.push_back(tokenize(d.response, tokenizer));
        for (const auto *seq : {&ctx_tokens.back(), &rsp_tokens.back()}) {
            for (const auto &t : *seq) vocab.emplace(t, 0);
        }
    }
    // sorted vocabulary gives a deterministic column order
    for (auto &[w, idx] : vocab) {
        idx = static_cast<std::uint32_t>(model.vocabulary.size());
        model.vocabulary.push_back(w);
    }
    model.rebuild_index();
    model.df_context.assign(vocab.size(), 0);
    model.df_response.assign(vocab.size(), 0);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::vector<bool> in_ctx(vocab.size(), false);
        std::vector<bool> in_rsp(vocab.size(), false);
        for (const auto &t : ctx_tokens[i]) in_ctx[vocab[t]] = true;
        for (const auto &t : rsp_tokens[i]) in_rsp[vocab[t]] = true;
        for (std::size_t w = 0; w < vocab.size(); ++w) {
            if (scope == DfScope::dialogue) {
                if (in_ctx[w] || in_rsp[w]) {
                    ++model.df_context[w];
                    ++model.df_response[w];
                }
            } else {
                if (in_ctx[w]) ++model.df_context[w];
                if (in_rsp[w]) ++model.df_response[w];
            }
        }
    }
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        model.ids.push_back(corpus[i].id);
        model.responses.push_back(corpus[i].response);
        model.context_vectors.push_back(model.vectorize(ctx_tokens[i], RetrievalMode::context));
        model.response_vectors.push_back(model.vectorize(rsp_tokens[i], RetrievalMode::response));
    }
    return model;
}

struct RankedItem {
    std::size_t index = 0; ///< dialogue position in the corpus
    double similarity = 0.0;
};

/// All comparable corpus items ordered by decreasing cosine, ties by lowest
/// index. Items with zero vectors and the excluded item are left out. Throws
/// UndefinedScore(zero_query) when the query has no weight.
inline std::vector<RankedItem> rank(const TfIdfModel &model, const TokenSequence &query, RetrievalMode mode,
                                    std::optional<std::size_t> exclude = std::nullopt) {
    const auto q = model.vectorize(query, mode);
    if (q.norm2 == 0.0) throw UndefinedScore(reason::kZeroQuery, "query has no weighted in-vocabulary terms");
    const auto &targets = mode == RetrievalMode::context ? model.context_vectors : model.response_vectors;
    std::vector<RankedItem> out;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        if (exclude && *exclude == i) continue;
        if (auto s = sparse_cosine(q, targets[i])) out.push_back({i, *s});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const RankedItem &a, const RankedItem &b) { return a.similarity > b.similarity; });
    return out;
}

struct RetrievalResult {
    std::optional<RankedItem> hit;
    std::string response; ///< response attached to the hit
    std::string source_id;
    std::string reason;   ///< set when there is no hit
};

/// Best response for a query context. C-TFIDF matches against corpus
/// contexts and returns the matched dialogue's response; R-TFIDF matches
/// against corpus responses directly.
inline RetrievalResult retrieve(const TfIdfModel &model, const TokenSequence &query, RetrievalMode mode,
                                std::optional<std::size_t> exclude = std::nullopt) {
    RetrievalResult r;
    try {
        const auto ranking = rank(model, query, mode, exclude);
        if (ranking.empty()) {
            r.reason = reason::kNoCandidates;
            return r;
        }
        r.hit = ranking.front();
        r.response = model.responses[r.hit->index];
        r.source_id = model.ids[r.hit->index];
    } catch (const UndefinedScore &e) {
        r.reason = e.reason();
    }
    return r;
}

inline RetrievalResult retrieve(const TfIdfModel &model, const std::vector<std::string> &context_turns,
                                RetrievalMode mode, std::optional<std::size_t> exclude = std::nullopt) {
    return retrieve(model, tokenize_turns(context_turns, model.tokenizer), mode, exclude);
}

struct RetrievalRow {
    std::string dialogue_id;
    RetrievalResult result;
    std::vector<Cell> scores; ///< one per suite metric
};

/// Leave-one-out evaluation: each dialogue's context is used as the query
/// with that dialogue removed, and the retrieved response is scored against
/// its ground truth. Failures are recorded per row.
inline std::vector<RetrievalRow> evaluate_retrieval(const TfIdfModel &model, const Corpus &corpus, RetrievalMode mode,
                                                    const MetricSuite &suite,
                                                    const TokenizerConfig &metric_tokenizer = {}) {
    std::vector<RetrievalRow> rows;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        RetrievalRow row;
        row.dialogue_id = corpus[i].id;
        row.result = retrieve(model, corpus[i].context, mode, i);
        const auto truth = tokenize(corpus[i].response, metric_tokenizer);
        for (Metric m : suite.metrics) {
            if (!row.result.hit) {
                row.scores.push_back(Cell::undefined(row.result.reason));
                continue;
            }
            row.scores.push_back(suite.score(m, truth, tokenize(row.result.response, metric_tokenizer)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// ---------------------------------------------------------------------------
// On-disk index (JSON, versioned)

inline constexpr int kIndexVersion = 1;

inline nlohmann::json index_to_json(const TfIdfModel &m) {
    using nlohmann::json;
    auto vec_json = [](const SparseVector &v) {
        json a = json::array();
        for (const auto &[t, w] : v.entries) a.push_back(json::array({t, w}));
        return a;
    };
    json j;
    j["format"] = "dialeval-tfidf-index";
    j["version"] = kIndexVersion;
    j["tokenizer"] = {{"lowercase", m.tokenizer.lowercase},
                      {"strip_punctuation", m.tokenizer.strip_punctuation},
                      {"keep_placeholders", m.tokenizer.keep_placeholders}};
    j["df_scope"] = m.df_scope == DfScope::dialogue ? "dialogue" : "field";
    j["n_dialogues"] = m.n_dialogues;
    j["vocabulary"] = m.vocabulary;
    j["df_context"] = m.df_context;
    j["df_response"] = m.df_response;
    json ds = json::array();
    for (std::size_t i = 0; i < m.ids.size(); ++i) {
        ds.push_back({{"id", m.ids[i]},
                      {"response", m.responses[i]},
                      {"context_vector", vec_json(m.context_vectors[i])},
                      {"response_vector", vec_json(m.response_vectors[i])}});
    }
    j["dialogues"] = std::move(ds);
    return j;
}

inline TfIdfModel index_from_json(const nlohmann::json &j) {
    try {
        if (j.at("format") != "dialeval-tfidf-index") throw ValidationError("not a dialeval TF-IDF index");
        if (j.at("version").get<int>() != kIndexVersion)
            throw ValidationError("unsupported index version " + j.at("version").dump());
        TfIdfModel m;
        const auto &tk = j.at("tokenizer");
        m.tokenizer.lowercase = tk.at("lowercase").get<bool>();
        m.tokenizer.strip_punctuation = tk.at("strip_punctuation").get<bool>();
        m.tokenizer.keep_placeholders = tk.at("keep_placeholders").get<bool>();
        m.df_scope = j.at("df_scope").get<std::string>() == "field" ? DfScope::field : DfScope::dialogue;
        m.n_dialogues = j.at("n_dialogues").get<std::size_t>();
        m.vocabulary = j.at("vocabulary").get<std::vector<std::string>>();
        m.df_context = j.at("df_context").get<std::vector<std::size_t>>();
        m.df_response = j.at("df_response").get<std::vector<std::size_t>>();
        if (m.df_context.size() != m.vocabulary.size() || m.df_response.size() != m.vocabulary.size())
            throw ValidationError("index df tables do not match the vocabulary");
        auto read_vec = [&](const nlohmann::json &a) {
            SparseVector v;
            for (const auto &e : a) {
                const auto t = e.at(0).get<std::uint32_t>();
                if (t >= m.vocabulary.size()) throw ValidationError("index term out of range");
                v.entries.emplace_back(t, e.at(1).get<double>());
            }
            v.finish();
            return v;
        };
        for (const auto &d : j.at("dialogues")) {
            m.ids.push_back(d.at("id").get<std::string>());
            m.responses.push_back(d.at("response").get<std::string>());
            m.context_vectors.push_back(read_vec(d.at("context_vector")));
            m.response_vectors.push_back(read_vec(d.at("response_vector")));
        }
        if (m.ids.size() != m.n_dialogues) throw ValidationError("index dialogue count mismatch");
        m.rebuild_index();
        return m;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("malformed index: ") + e.what());
    }
}

inline void save_index(const TfIdfModel &model, const std::string &path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write index: " + path);
    out << index_to_json(model).dump() << '\n';
}

inline TfIdfModel load_index(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open index: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("malformed index: ") + e.what());
    }
    return index_from_json(j);
}

} // namespace dialeval
