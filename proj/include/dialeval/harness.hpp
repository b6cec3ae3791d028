#pragma once

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dialeval/embedding.hpp"
#include "dialeval/error.hpp"
#include "dialeval/metrics.hpp"
#include "dialeval/random.hpp"
#include "dialeval/retrieval.hpp"
#include "dialeval/stats.hpp"
#include "dialeval/text.hpp"

namespace dialeval {

// ---------------------------------------------------------------------------
// Dataset

struct DialogueExample {
    std::string id;
    std::vector<std::string> context;
    std::string ground_truth;
    std::map<std::string, std::string> candidates; ///< candidate id -> response text
};

namespace detail {

/// Orders ids numerically when both are unsigned integers, else bytewise.
inline bool id_less(const std::string &a, const std::string &b) {
    auto numeric = [](const std::string &s) {
        return !s.empty() && s.size() < 19 && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
    };
    if (numeric(a) && numeric(b)) return std::stoull(a) < std::stoull(b);
    return a < b;
}

inline std::string id_string(const nlohmann::json &v, const std::string &where) {
    if (v.is_string()) {
        auto s = v.get<std::string>();
        if (s.empty()) throw ValidationError(where + ": empty id");
        return s;
    }
    if (v.is_number_integer()) return v.dump();
    throw ValidationError(where + ": id must be a string or an integer");
}

/// Parses one JSON value, rejecting duplicate keys inside any object.
inline nlohmann::json parse_strict(const std::string &text, const std::string &where) {
    std::vector<std::set<std::string>> keys;
    nlohmann::json::parser_callback_t cb = [&](int, nlohmann::json::parse_event_t ev, nlohmann::json &parsed) {
        using E = nlohmann::json::parse_event_t;
        if (ev == E::object_start) {
            keys.emplace_back();
        } else if (ev == E::object_end) {
            keys.pop_back();
        } else if (ev == E::key) {
            const auto k = parsed.get<std::string>();
            if (!keys.back().insert(k).second) throw ValidationError(where + ": duplicate key '" + k + "'");
        }
        return true;
    };
    try {
        return nlohmann::json::parse(text, cb);
    } catch (const nlohmann::json::parse_error &e) {
        throw ValidationError(where + ": invalid JSON (" + e.what() + ")");
    }
}

inline std::vector<std::string> context_turns(const nlohmann::json &v, const std::string &where) {
    if (v.is_string()) return {v.get<std::string>()};
    if (!v.is_array()) throw ValidationError(where + ": 'context' must be a list of strings");
    std::vector<std::string> out;
    for (const auto &t : v) {
        if (!t.is_string()) throw ValidationError(where + ": context turns must be strings");
        out.push_back(t.get<std::string>());
    }
    return out;
}

} // namespace detail

/// JSON Lines dataset, one object per line:
/// `{"id": ..., "context": [turns], "response": text, "candidates": {name: text}}`.
/// `ground_truth` is accepted in place of `response`. Blank lines are skipped.
/// The result is stably ordered by id.
inline std::vector<DialogueExample> read_dataset(std::istream &in) {
    std::vector<DialogueExample> out;
    std::map<std::string, std::size_t> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const std::string where = "dataset line " + std::to_string(lineno);
        const auto j = detail::parse_strict(line, where);
        if (!j.is_object()) throw ValidationError(where + ": expected a JSON object");
        DialogueExample ex;
        if (!j.contains("id")) throw ValidationError(where + ": missing 'id'");
        ex.id = detail::id_string(j["id"], where);
        if (!j.contains("context")) throw ValidationError(where + ": missing 'context'");
        ex.context = detail::context_turns(j["context"], where);
        const bool has_resp = j.contains("response");
        const bool has_gt = j.contains("ground_truth");
        if (has_resp && has_gt) throw ValidationError(where + ": both 'response' and 'ground_truth' given");
        if (!has_resp && !has_gt) throw ValidationError(where + ": missing 'response'");
        const auto &gt = has_resp ? j["response"] : j["ground_truth"];
        if (!gt.is_string() || gt.get<std::string>().empty())
            throw ValidationError(where + ": ground-truth response must be a nonempty string");
        ex.ground_truth = gt.get<std::string>();
        if (j.contains("candidates")) {
            const auto &c = j["candidates"];
            if (!c.is_object()) throw ValidationError(where + ": 'candidates' must be an object");
            for (const auto &[name, text] : c.items()) {
                if (name.empty()) throw ValidationError(where + ": empty candidate id");
                if (!text.is_string()) throw ValidationError(where + ": candidate '" + name + "' must be a string");
                ex.candidates.emplace(name, text.get<std::string>());
            }
        }
        if (auto [it, fresh] = seen.emplace(ex.id, lineno); !fresh)
            throw ValidationError(where + ": duplicate id '" + ex.id + "' (first on line " +
                                  std::to_string(it->second) + ")");
        out.push_back(std::move(ex));
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const DialogueExample &a, const DialogueExample &b) { return detail::id_less(a.id, b.id); });
    return out;
}

inline std::vector<DialogueExample> load_dataset(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset: " + path);
    return read_dataset(in);
}

inline Corpus to_corpus(const std::vector<DialogueExample> &dataset) {
    Corpus c;
    for (const auto &ex : dataset) c.push_back({ex.id, ex.context, ex.ground_truth});
    return c;
}

/// Adds a candidate holding the ground truth of a different, randomly chosen
/// example. Example i draws from random stream (seed, i).
inline std::vector<DialogueExample> with_random_baseline(std::vector<DialogueExample> dataset, std::uint64_t seed,
                                                         const std::string &candidate_id = "random") {
    if (dataset.size() < 2) throw ValidationError("random baseline needs at least 2 examples");
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto rng = stream(seed, i);
        auto j = static_cast<std::size_t>(rng.below(dataset.size() - 1));
        if (j >= i) ++j;
        if (dataset[i].candidates.count(candidate_id))
            throw ValidationError("example '" + dataset[i].id + "' already has a '" + candidate_id + "' candidate");
        dataset[i].candidates[candidate_id] = dataset[j].ground_truth;
    }
    return dataset;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
    std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    TokenizerConfig tokenizer;
    BleuConfig bleu;
    MeteorConfig meteor;
    double rouge_beta = 1.0;
    std::string embeddings_path;
    EmbeddingFormat embeddings_format = EmbeddingFormat::text;
    std::string synonyms_path;
    std::string stopwords_path; ///< empty: bundled list
    bool random_baseline = false;
    std::string random_candidate_id = "random";
    Aggregation human_aggregation = Aggregation::mean;
    PValueOptions p_values;
    KappaWeighting kappa_weighting = KappaWeighting::linear;
    double exclusion_threshold = 0.2;
    bool apply_exclusion = true;
    std::size_t length_threshold = 6;
    BucketBoundary length_boundary = BucketBoundary::both_inclusive;
    std::size_t half_split_repeats = 100;
    bool human_row = true;
    RetrievalMode retrieval_mode = RetrievalMode::context;
    DfScope df_scope = DfScope::dialogue;
    std::uint64_t seed = 0;
    std::string dataset_name = "dataset";

    bool uses_embeddings() const {
        return std::any_of(metrics.begin(), metrics.end(), needs_embeddings);
    }

    void validate() const {
        if (metrics.empty()) throw ValidationError("no metrics selected");
        bleu.validate();
        meteor.validate();
        if (!(rouge_beta > 0.0)) throw ValidationError("rouge_beta must be positive");
        if (uses_embeddings() && embeddings_path.empty())
            throw ValidationError("embedding metrics selected but no embeddings file given");
        for (const auto *p : {&embeddings_path, &synonyms_path, &stopwords_path}) {
            if (!p->empty() && !std::filesystem::exists(*p)) throw ValidationError("file not found: " + *p);
        }
        if (half_split_repeats == 0) throw ValidationError("half_split_repeats must be >= 1");
    }

    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json &j);
};

namespace detail {

template <typename E> struct EnumNames;
template <> struct EnumNames<EmbeddingFormat> {
    static constexpr std::pair<EmbeddingFormat, const char *> values[] = {{EmbeddingFormat::text, "text"},
                                                                          {EmbeddingFormat::binary, "binary"}};
};
template <> struct EnumNames<Aggregation> {
    static constexpr std::pair<Aggregation, const char *> values[] = {{Aggregation::mean, "mean"},
                                                                      {Aggregation::median, "median"}};
};
template <> struct EnumNames<PValueMethod> {
    static constexpr std::pair<PValueMethod, const char *> values[] = {{PValueMethod::t_approx, "t_approx"},
                                                                       {PValueMethod::permutation, "permutation"}};
};
template <> struct EnumNames<KappaWeighting> {
    static constexpr std::pair<KappaWeighting, const char *> values[] = {{KappaWeighting::linear, "linear"},
                                                                         {KappaWeighting::quadratic, "quadratic"}};
};
template <> struct EnumNames<BucketBoundary> {
    static constexpr std::pair<BucketBoundary, const char *> values[] = {
        {BucketBoundary::both_inclusive, "both_inclusive"},
        {BucketBoundary::low_inclusive, "low_inclusive"},
        {BucketBoundary::high_inclusive, "high_inclusive"}};
};
template <> struct EnumNames<RetrievalMode> {
    static constexpr std::pair<RetrievalMode, const char *> values[] = {{RetrievalMode::context, "C-TFIDF"},
                                                                        {RetrievalMode::response, "R-TFIDF"}};
};
template <> struct EnumNames<DfScope> {
    static constexpr std::pair<DfScope, const char *> values[] = {{DfScope::dialogue, "dialogue"},
                                                                  {DfScope::field, "field"}};
};
template <> struct EnumNames<ShortOrderPolicy> {
    static constexpr std::pair<ShortOrderPolicy, const char *> values[] = {{ShortOrderPolicy::skip, "skip"},
                                                                           {ShortOrderPolicy::zero, "zero"},
                                                                           {ShortOrderPolicy::undefined, "undefined"}};
};
template <> struct EnumNames<MeteorStage> {
    static constexpr std::pair<MeteorStage, const char *> values[] = {{MeteorStage::exact, "exact"},
                                                                      {MeteorStage::stem, "stem"},
                                                                      {MeteorStage::synonym, "synonym"}};
};

template <typename E> const char *enum_name(E v) {
    for (const auto &[e, n] : EnumNames<E>::values) {
        if (e == v) return n;
    }
    return "?";
}

template <typename E> E enum_parse(const std::string &s, const char *what) {
    for (const auto &[e, n] : EnumNames<E>::values) {
        if (s == n) return e;
    }
    if constexpr (std::is_same_v<E, RetrievalMode>) return parse_retrieval_mode(s);
    throw ValidationError(std::string("unknown ") + what + " '" + s + "'");
}

} // namespace detail

inline nlohmann::json RunConfig::to_json() const {
    using detail::enum_name;
    nlohmann::json j;
    std::vector<std::string> ms;
    for (Metric m : metrics) ms.emplace_back(metric_id(m));
    j["metrics"] = ms;
    j["tokenizer"] = {{"lowercase", tokenizer.lowercase},
                      {"strip_punctuation", tokenizer.strip_punctuation},
                      {"keep_placeholders", tokenizer.keep_placeholders}};
    j["bleu"] = {{"weights", bleu.weights},
                 {"smoothing_epsilon", bleu.smoothing_epsilon},
                 {"short_orders", enum_name(bleu.short_orders)}};
    std::vector<std::string> stages;
    for (auto s : meteor.stages) stages.emplace_back(enum_name(s));
    j["meteor"] = {{"alpha", meteor.alpha}, {"gamma", meteor.gamma}, {"beta_frag", meteor.beta_frag},
                   {"stages", stages}, {"search_budget", meteor.search_budget}};
    j["rouge_beta"] = rouge_beta;
    j["embeddings"] = {{"path", embeddings_path}, {"format", enum_name(embeddings_format)}};
    j["synonyms_path"] = synonyms_path;
    j["stopwords_path"] = stopwords_path;
    j["random_baseline"] = random_baseline;
    j["random_candidate_id"] = random_candidate_id;
    j["human_aggregation"] = enum_name(human_aggregation);
    j["p_values"] = {{"method", enum_name(p_values.method)},
                     {"exact_max_n", p_values.exact_max_n},
                     {"samples", p_values.samples}};
    j["kappa_weighting"] = enum_name(kappa_weighting);
    j["exclusion_threshold"] = exclusion_threshold;
    j["apply_exclusion"] = apply_exclusion;
    j["length_threshold"] = length_threshold;
    j["length_boundary"] = enum_name(length_boundary);
    j["half_split_repeats"] = half_split_repeats;
    j["human_row"] = human_row;
    j["retrieval_mode"] = enum_name(retrieval_mode);
    j["df_scope"] = enum_name(df_scope);
    j["seed"] = seed;
    j["dataset_name"] = dataset_name;
    return j;
}

/// Reads a config object; absent keys keep their defaults, unknown keys are
/// rejected.
inline RunConfig RunConfig::from_json(const nlohmann::json &j) {
    using detail::enum_parse;
    static const std::set<std::string> known{
        "metrics",        "tokenizer",          "bleu",           "meteor",           "rouge_beta",
        "embeddings",     "synonyms_path",      "stopwords_path", "random_baseline",  "random_candidate_id",
        "human_aggregation", "p_values",        "kappa_weighting", "exclusion_threshold", "apply_exclusion",
        "length_threshold", "length_boundary",  "half_split_repeats", "human_row",     "retrieval_mode",
        "df_scope",       "seed",               "dataset_name"};
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    for (const auto &[k, v] : j.items()) {
        if (!known.count(k)) throw ValidationError("unknown config key '" + k + "'");
    }
    RunConfig c;
    try {
        if (j.contains("metrics")) {
            c.metrics.clear();
            for (const auto &m : j["metrics"]) c.metrics.push_back(parse_metric(m.get<std::string>()));
        }
        if (j.contains("tokenizer")) {
            const auto &t = j["tokenizer"];
            c.tokenizer.lowercase = t.value("lowercase", c.tokenizer.lowercase);
            c.tokenizer.strip_punctuation = t.value("strip_punctuation", c.tokenizer.strip_punctuation);
            c.tokenizer.keep_placeholders = t.value("keep_placeholders", c.tokenizer.keep_placeholders);
        }
        if (j.contains("bleu")) {
            const auto &b = j["bleu"];
            c.bleu.weights = b.value("weights", c.bleu.weights);
            c.bleu.smoothing_epsilon = b.value("smoothing_epsilon", c.bleu.smoothing_epsilon);
            if (b.contains("short_orders"))
                c.bleu.short_orders = enum_parse<ShortOrderPolicy>(b["short_orders"], "short-order policy");
        }
        if (j.contains("meteor")) {
            const auto &m = j["meteor"];
            c.meteor.alpha = m.value("alpha", c.meteor.alpha);
            c.meteor.gamma = m.value("gamma", c.meteor.gamma);
            c.meteor.beta_frag = m.value("beta_frag", c.meteor.beta_frag);
            c.meteor.search_budget = m.value("search_budget", c.meteor.search_budget);
            if (m.contains("stages")) {
                c.meteor.stages.clear();
                for (const auto &s : m["stages"]) c.meteor.stages.push_back(enum_parse<MeteorStage>(s, "METEOR stage"));
            }
        }
        c.rouge_beta = j.value("rouge_beta", c.rouge_beta);
        if (j.contains("embeddings")) {
            const auto &e = j["embeddings"];
            c.embeddings_path = e.value("path", c.embeddings_path);
            if (e.contains("format")) c.embeddings_format = enum_parse<EmbeddingFormat>(e["format"], "embedding format");
        }
        c.synonyms_path = j.value("synonyms_path", c.synonyms_path);
        c.stopwords_path = j.value("stopwords_path", c.stopwords_path);
        c.random_baseline = j.value("random_baseline", c.random_baseline);
        c.random_candidate_id = j.value("random_candidate_id", c.random_candidate_id);
        if (j.contains("human_aggregation"))
            c.human_aggregation = enum_parse<Aggregation>(j["human_aggregation"], "aggregation");
        if (j.contains("p_values")) {
            const auto &p = j["p_values"];
            if (p.contains("method")) c.p_values.method = enum_parse<PValueMethod>(p["method"], "p-value method");
            c.p_values.exact_max_n = p.value("exact_max_n", c.p_values.exact_max_n);
            c.p_values.samples = p.value("samples", c.p_values.samples);
        }
        if (j.contains("kappa_weighting"))
            c.kappa_weighting = enum_parse<KappaWeighting>(j["kappa_weighting"], "kappa weighting");
        c.exclusion_threshold = j.value("exclusion_threshold", c.exclusion_threshold);
        c.apply_exclusion = j.value("apply_exclusion", c.apply_exclusion);
        c.length_threshold = j.value("length_threshold", c.length_threshold);
        if (j.contains("length_boundary"))
            c.length_boundary = enum_parse<BucketBoundary>(j["length_boundary"], "length boundary");
        c.half_split_repeats = j.value("half_split_repeats", c.half_split_repeats);
        c.human_row = j.value("human_row", c.human_row);
        if (j.contains("retrieval_mode"))
            c.retrieval_mode = enum_parse<RetrievalMode>(j["retrieval_mode"], "retrieval mode");
        if (j.contains("df_scope")) c.df_scope = enum_parse<DfScope>(j["df_scope"], "df scope");
        c.seed = j.value("seed", c.seed);
        c.dataset_name = j.value("dataset_name", c.dataset_name);
    } catch (const nlohmann::json::exception &e) {
        throw ValidationError(std::string("bad config value: ") + e.what());
    }
    c.p_values.seed = c.seed;
    return c;
}

inline RunConfig load_run_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return RunConfig::from_json(detail::parse_strict(text, "config"));
}

/// Resources named by a RunConfig, loaded once and shared read-only.
struct Resources {
    std::optional<EmbeddingStore> embeddings;
    StopList stoplist = default_stoplist();

    MetricSuite suite(const RunConfig &cfg) const {
        MetricSuite s;
        s.metrics = cfg.metrics;
        s.bleu = cfg.bleu;
        s.meteor = cfg.meteor;
        s.rouge_beta = cfg.rouge_beta;
        s.embeddings = embeddings ? &*embeddings : nullptr;
        return s;
    }
};

/// Validates the config and loads what it references. The synonym lexicon is
/// placed into `cfg.meteor`.
inline Resources load_resources(RunConfig &cfg) {
    cfg.validate();
    Resources r;
    if (cfg.uses_embeddings()) r.embeddings = load_embeddings(cfg.embeddings_path, cfg.embeddings_format);
    if (!cfg.synonyms_path.empty()) cfg.meteor.synonyms = load_synonym_lexicon(cfg.synonyms_path);
    if (!cfg.stopwords_path.empty()) r.stoplist = load_stoplist(cfg.stopwords_path);
    return r;
}

// ---------------------------------------------------------------------------
// Score matrix

struct ScoreRow {
    std::string example_id;
    std::string candidate_id;
    std::size_t ref_len = 0; ///< ground-truth tokens
    std::size_t hyp_len = 0; ///< candidate tokens
    std::vector<Cell> cells; ///< one per ScoreMatrix::metrics entry

    std::size_t delta_words() const { return ref_len > hyp_len ? ref_len - hyp_len : hyp_len - ref_len; }
};

struct ScoreMatrix {
    std::vector<Metric> metrics;
    std::vector<ScoreRow> rows;

    std::size_t column(Metric m) const {
        auto it = std::find(metrics.begin(), metrics.end(), m);
        if (it == metrics.end()) throw ValidationError("metric '" + std::string(metric_id(m)) + "' not in score matrix");
        return static_cast<std::size_t>(it - metrics.begin());
    }

    std::size_t defined_count(Metric m) const {
        const auto c = column(m);
        return static_cast<std::size_t>(
            std::count_if(rows.begin(), rows.end(), [&](const ScoreRow &r) { return r.cells[c].defined(); }));
    }
};

/// Optional transformation applied to both token sequences before scoring.
using TokenFilter = std::function<TokenSequence(const TokenSequence &)>;

/// Scores every (example, candidate) cell. Per-cell failures become
/// reason-tagged undefined cells; the batch never aborts on one row.
/// Rows are spread over `threads` workers (0: hardware concurrency); each
/// worker writes only its own rows, so the result does not depend on it.
inline ScoreMatrix score_all(const std::vector<DialogueExample> &dataset, const MetricSuite &suite,
                             const TokenizerConfig &tokenizer = {}, const TokenFilter &filter = {},
                             unsigned threads = 1) {
    ScoreMatrix out;
    out.metrics = suite.metrics;
    std::vector<std::pair<TokenSequence, TokenSequence>> work;
    for (const auto &ex : dataset) {
        auto ref = tokenize(ex.ground_truth, tokenizer);
        if (filter) ref = filter(ref);
        for (const auto &[cid, text] : ex.candidates) {
            auto hyp = tokenize(text, tokenizer);
            if (filter) hyp = filter(hyp);
            out.rows.push_back({ex.id, cid, ref.size(), hyp.size(), {}});
            work.emplace_back(ref, std::move(hyp));
        }
    }
    auto fill = [&](std::size_t i) {
        auto &cells = out.rows[i].cells;
        cells.reserve(suite.metrics.size());
        for (Metric m : suite.metrics) cells.push_back(suite.score(m, work[i].first, work[i].second));
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, out.rows.size()));
    if (threads <= 1) {
        for (std::size_t i = 0; i < out.rows.size(); ++i) fill(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                try {
                    for (std::size_t i = next++; i < out.rows.size(); i = next++) fill(i);
                } catch (...) {
                    std::lock_guard lock(failure_mu);
                    if (!failure) failure = std::current_exception();
                    next = out.rows.size();
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

// ---------------------------------------------------------------------------
// Correlation with human judgements

struct CorrelationRow {
    std::string label;
    std::size_t n = 0;                   ///< joined rows with a defined cell
    std::size_t undefined = 0;           ///< rated rows dropped for an undefined cell
    std::optional<CorrelationResult> spearman;
    std::optional<CorrelationResult> pearson;
    std::string reason;                  ///< why a correlation is missing
};

struct CorrelationReport {
    std::string dataset;
    std::size_t matrix_rows = 0;
    std::size_t rated_rows = 0;   ///< matrix rows with a human score
    std::size_t unrated_rows = 0; ///< matrix rows without one
    std::vector<CorrelationRow> rows;
    std::optional<HalfSplitSummary> human;
};

namespace detail {

inline CorrelationRow correlate_vectors(std::string label, const std::vector<double> &metric,
                                        const std::vector<double> &human, std::size_t undefined,
                                        const PValueOptions &p) {
    CorrelationRow row;
    row.label = std::move(label);
    row.n = metric.size();
    row.undefined = undefined;
    try {
        row.spearman = spearman(metric, human, p);
    } catch (const UndefinedScore &e) {
        row.reason = e.reason();
    }
    try {
        row.pearson = pearson(metric, human, p);
    } catch (const UndefinedScore &e) {
        row.reason = e.reason();
    }
    return row;
}

} // namespace detail

/// Per metric, Spearman and Pearson between the metric column and the human
/// score of each rated (example, candidate) row. Undefined cells are dropped
/// metric by metric and counted.
inline CorrelationReport correlate(const ScoreMatrix &matrix, const std::map<ItemKey, double> &human,
                                   const PValueOptions &p = {}) {
    CorrelationReport rep;
    rep.matrix_rows = matrix.rows.size();
    for (const auto &r : matrix.rows) {
        if (human.count({r.example_id, r.candidate_id})) {
            ++rep.rated_rows;
        } else {
            ++rep.unrated_rows;
        }
    }
    if (rep.rated_rows == 0) throw ValidationError("no score-matrix row has a human rating");
    for (std::size_t c = 0; c < matrix.metrics.size(); ++c) {
        std::vector<double> xs;
        std::vector<double> ys;
        std::size_t undefined = 0;
        for (const auto &r : matrix.rows) {
            auto it = human.find({r.example_id, r.candidate_id});
            if (it == human.end()) continue;
            if (!r.cells[c].defined()) {
                ++undefined;
                continue;
            }
            xs.push_back(*r.cells[c].value);
            ys.push_back(it->second);
        }
        rep.rows.push_back(
            detail::correlate_vectors(std::string(metric_label(matrix.metrics[c])), xs, ys, undefined, p));
    }
    return rep;
}

/// Human scores per item under the config: annotators below the kappa
/// threshold are dropped first when `apply_exclusion` is set.
inline std::map<ItemKey, double> human_scores(const RatingsTable &ratings, const RunConfig &cfg,
                                              AgreementReport *agreement_out = nullptr) {
    std::set<std::string> keep;
    if (cfg.apply_exclusion && ratings.annotators().size() >= 2) {
        auto rep = agreement_report(ratings, cfg.exclusion_threshold, cfg.kappa_weighting);
        keep = rep.retained;
        if (keep.empty()) throw ValidationError("every annotator was excluded by the kappa threshold");
        if (agreement_out) *agreement_out = std::move(rep);
    }
    return item_scores(ratings, keep, cfg.human_aggregation);
}

/// Ratings of the listed annotators only.
inline RatingsTable restrict_annotators(const RatingsTable &ratings, const std::set<std::string> &keep) {
    RatingsTable out;
    for (const auto &r : ratings.entries()) {
        if (keep.count(r.annotator_id)) out.add(r);
    }
    return out;
}

/// correlate() against ratings under the config, with the split-half Human
/// row (over retained annotators) when enabled and at least 4 remain.
inline CorrelationReport correlate_with_ratings(const ScoreMatrix &matrix, const RatingsTable &ratings,
                                                const RunConfig &cfg) {
    AgreementReport agreement;
    const auto human = human_scores(ratings, cfg, &agreement);
    auto rep = correlate(matrix, human, cfg.p_values);
    rep.dataset = cfg.dataset_name;
    if (cfg.human_row) {
        const auto kept = agreement.retained.empty() ? ratings : restrict_annotators(ratings, agreement.retained);
        if (kept.annotators().size() >= 4) rep.human = random_half_correlation(kept, cfg.seed, cfg.half_split_repeats);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Ablations

struct AblationRow {
    CorrelationRow before;
    CorrelationRow after;
};

struct AblationReport {
    std::string stoplist_hash;
    std::size_t stoplist_size = 0;
    std::size_t undefined_after = 0; ///< cells undefined only after token removal
    std::vector<AblationRow> rows;
};

/// Correlations before and after removing stoplist tokens (the bundled list
/// also covers punctuation) from both responses.
inline AblationReport ablate_stopwords(const std::vector<DialogueExample> &dataset, const MetricSuite &suite,
                                       const TokenizerConfig &tokenizer, const StopList &stoplist,
                                       const std::map<ItemKey, double> &human, const PValueOptions &p = {}) {
    const auto before = score_all(dataset, suite, tokenizer);
    const auto after =
        score_all(dataset, suite, tokenizer, [&](const TokenSequence &s) { return remove_stopwords(s, stoplist); });
    const auto cb = correlate(before, human, p);
    const auto ca = correlate(after, human, p);
    AblationReport rep;
    rep.stoplist_hash = stoplist.hash();
    rep.stoplist_size = stoplist.size();
    for (std::size_t i = 0; i < before.rows.size(); ++i) {
        for (std::size_t c = 0; c < before.metrics.size(); ++c) {
            if (before.rows[i].cells[c].defined() && !after.rows[i].cells[c].defined()) ++rep.undefined_after;
        }
    }
    for (std::size_t c = 0; c < cb.rows.size(); ++c) rep.rows.push_back({cb.rows[c], ca.rows[c]});
    return rep;
}

struct LengthEffectRow {
    std::string label;
    std::optional<LengthBucketResult> result;
    std::string reason;
};

struct LengthEffectReport {
    std::size_t threshold = 0;
    BucketBoundary boundary = BucketBoundary::both_inclusive;
    std::vector<LengthEffectRow> rows; ///< one per metric, then "Human"
};

/// Bucket comparison by |#words(ground truth) - #words(candidate)| for every
/// metric column and for the human score.
inline LengthEffectReport length_effect(const ScoreMatrix &matrix, const std::map<ItemKey, double> &human,
                                        std::size_t threshold, const LengthBucketOptions &opts = {}) {
    LengthEffectReport rep;
    rep.threshold = threshold;
    rep.boundary = opts.boundary;
    auto run = [&](std::string label, const std::vector<LengthRow> &rows) {
        LengthEffectRow out;
        out.label = std::move(label);
        try {
            out.result = length_bucket_test(rows, threshold, opts);
        } catch (const UndefinedScore &e) {
            out.reason = e.reason();
        }
        rep.rows.push_back(std::move(out));
    };
    for (std::size_t c = 0; c < matrix.metrics.size(); ++c) {
        std::vector<LengthRow> rows;
        for (const auto &r : matrix.rows) {
            if (r.cells[c].defined()) rows.push_back({*r.cells[c].value, r.delta_words()});
        }
        run(std::string(metric_label(matrix.metrics[c])), rows);
    }
    std::vector<LengthRow> rows;
    for (const auto &r : matrix.rows) {
        auto it = human.find({r.example_id, r.candidate_id});
        if (it != human.end()) rows.push_back({it->second, r.delta_words()});
    }
    run("Human", rows);
    return rep;
}

// ---------------------------------------------------------------------------
// Scatter export

struct ScatterSummary {
    std::string metric;
    std::size_t written = 0;
    std::size_t undefined = 0; ///< rated rows whose metric cell is undefined
    std::size_t unrated = 0;   ///< rows without a human score
};

/// Writes `human,metric` pairs (17 significant digits) for one metric and a
/// `<path>.summary.json` sidecar with the omitted-row counts.
inline ScatterSummary export_scatter(const ScoreMatrix &matrix, const std::map<ItemKey, double> &human, Metric metric,
                                     const std::string &path) {
    const auto c = matrix.column(metric);
    ScatterSummary s;
    s.metric = std::string(metric_id(metric));
    std::ofstream out(path);
    if (!out) throw Error("cannot write scatter file: " + path);
    out << "human,metric\n";
    char buf[64];
    for (const auto &r : matrix.rows) {
        auto it = human.find({r.example_id, r.candidate_id});
        if (it == human.end()) {
            ++s.unrated;
            continue;
        }
        if (!r.cells[c].defined()) {
            ++s.undefined;
            continue;
        }
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", it->second, *r.cells[c].value);
        out << buf;
        ++s.written;
    }
    std::ofstream side(path + ".summary.json");
    if (!side) throw Error("cannot write scatter summary: " + path + ".summary.json");
    side << nlohmann::json{{"metric", s.metric},
                           {"rows_written", s.written},
                           {"undefined_omitted", s.undefined},
                           {"unrated_omitted", s.unrated}}
                .dump(2)
         << '\n';
    return s;
}

} // namespace dialeval
