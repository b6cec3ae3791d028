#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dialeval/error.hpp"
#include "dialeval/porter_stemmer.hpp"
#include "dialeval/text.hpp"

namespace dialeval {

/// A metric value in [0,1] together with the quantities it was computed from.
struct OverlapScore {
    double value = 0.0;
    std::map<std::string, double> components;

    double component(const std::string &name) const {
        auto it = components.find(name);
        if (it == components.end()) throw Error("missing score component: " + name);
        return it->second;
    }
};

// ---------------------------------------------------------------------------
// BLEU

/// What to do with an n-gram order when the candidate has fewer than n tokens.
enum class ShortOrderPolicy {
    skip,      ///< drop the order and renormalize the remaining weights
    zero,      ///< the whole score is 0
    undefined, ///< raise UndefinedScore(order_too_long)
};

struct BleuConfig {
    int max_order = 4;
    /// Per-order weights; empty means uniform 1/N.
    std::vector<double> weights;
    /// Added to a zero clipped-match count before dividing.
    double smoothing_epsilon = 1e-10;
    ShortOrderPolicy short_orders = ShortOrderPolicy::skip;

    std::vector<double> resolved_weights() const {
        validate();
        if (weights.empty()) return std::vector<double>(static_cast<std::size_t>(max_order), 1.0 / max_order);
        return weights;
    }

    void validate() const {
        if (max_order < 1 || max_order > 4) throw ValidationError("BLEU max order must be in 1..4");
        if (!(smoothing_epsilon >= 0.0) || !std::isfinite(smoothing_epsilon))
            throw ValidationError("BLEU smoothing epsilon must be finite and >= 0");
        if (weights.empty()) return;
        if (weights.size() != static_cast<std::size_t>(max_order))
            throw ValidationError("BLEU weights must have one entry per order");
        double sum = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ValidationError("BLEU weights must be nonnegative");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("BLEU weights must sum to 1");
    }
};

/// Clipped n-gram co-occurrence counts of one (reference, candidate) pair.
struct ClippedCounts {
    std::size_t matches = 0;
    std::size_t total = 0; ///< number of candidate n-grams
};

inline ClippedCounts clipped_counts(const TokenSequence &ref, const TokenSequence &hyp, std::size_t n) {
    const auto hyp_grams = ngrams(hyp, n);
    const auto ref_grams = ngrams(ref, n);
    ClippedCounts out;
    for (const auto &[gram, c] : hyp_grams.counts) {
        out.matches += std::min(c, ref_grams.count(gram));
        out.total += c;
    }
    return out;
}

/// Clipped n-gram precision of `hyp` against `ref`. A zero match count is
/// replaced by `epsilon`. Throws UndefinedScore(order_too_long) when `hyp` has
/// no n-grams of this order.
inline double ngram_precision(const TokenSequence &ref, const TokenSequence &hyp, std::size_t n, double epsilon) {
    if (n == 0) throw ValidationError("ngram_precision: order must be >= 1");
    const auto cc = clipped_counts(ref, hyp, n);
    if (cc.total == 0) throw UndefinedScore(reason::kOrderTooLong, "candidate shorter than the n-gram order");
    const double num = cc.matches > 0 ? static_cast<double>(cc.matches) : epsilon;
    return num / static_cast<double>(cc.total);
}

inline double brevity_penalty(std::size_t ref_len, std::size_t hyp_len) {
    if (hyp_len == 0) throw UndefinedScore(reason::kEmptyCandidate, "brevity penalty of an empty candidate");
    if (hyp_len > ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
}

namespace detail {

/// Combines per-order clipped counts into a BLEU score. Shared by the
/// sentence and corpus variants so that both treat short orders identically.
inline OverlapScore combine_bleu(std::span<const ClippedCounts> orders, std::size_t ref_len, std::size_t hyp_len,
                                 const BleuConfig &config) {
    const auto weights = config.resolved_weights();
    OverlapScore score;
    score.components["ref_len"] = static_cast<double>(ref_len);
    score.components["hyp_len"] = static_cast<double>(hyp_len);

    double kept_weight = 0.0;
    bool short_order = false;
    for (std::size_t n = 0; n < orders.size(); ++n) {
        if (orders[n].total == 0) {
            short_order = true;
        } else {
            kept_weight += weights[n];
        }
    }
    if (short_order && config.short_orders == ShortOrderPolicy::undefined)
        throw UndefinedScore(reason::kOrderTooLong, "candidate shorter than the maximum n-gram order");

    const double bp = brevity_penalty(ref_len, hyp_len);
    score.components["bp"] = bp;

    if (short_order && config.short_orders == ShortOrderPolicy::zero) {
        for (std::size_t n = 0; n < orders.size(); ++n) score.components["w" + std::to_string(n + 1)] = 0.0;
        score.components["short_order_zero"] = 1.0;
        score.value = 0.0;
        return score;
    }
    if (kept_weight <= 0.0) {
        score.components["no_orders"] = 1.0;
        score.value = 0.0;
        return score;
    }

    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 0; n < orders.size(); ++n) {
        const auto key = std::to_string(n + 1);
        if (orders[n].total == 0) {
            score.components["w" + key] = 0.0;
            continue;
        }
        const double w = weights[n] / kept_weight;
        const double num =
            orders[n].matches > 0 ? static_cast<double>(orders[n].matches) : config.smoothing_epsilon;
        const double p = num / static_cast<double>(orders[n].total);
        score.components["w" + key] = w;
        score.components["p" + key] = p;
        if (w == 0.0) continue;
        if (p == 0.0) {
            zero = true;
        } else {
            log_sum += w * std::log(p);
        }
    }
    score.value = zero ? 0.0 : bp * std::exp(log_sum);
    return score;
}

} // namespace detail

/// Recomputes BLEU from the components of a score returned by bleu() or
/// corpus_bleu(): bp * exp(sum_n w_n log p_n).
inline double bleu_from_components(const OverlapScore &s, int max_order) {
    if (s.components.count("short_order_zero") || s.components.count("no_orders")) return 0.0;
    double log_sum = 0.0;
    for (int n = 1; n <= max_order; ++n) {
        const double w = s.component("w" + std::to_string(n));
        if (w == 0.0) continue;
        const double p = s.component("p" + std::to_string(n));
        if (p == 0.0) return 0.0;
        log_sum += w * std::log(p);
    }
    return s.component("bp") * std::exp(log_sum);
}

/// Sentence-level BLEU-N.
inline OverlapScore bleu(const TokenSequence &ref, const TokenSequence &hyp, const BleuConfig &config = {}) {
    config.validate();
    if (hyp.empty()) throw UndefinedScore(reason::kEmptyCandidate, "BLEU of an empty candidate");
    std::vector<ClippedCounts> orders;
    for (int n = 1; n <= config.max_order; ++n) orders.push_back(clipped_counts(ref, hyp, static_cast<std::size_t>(n)));
    return detail::combine_bleu(orders, ref.size(), hyp.size(), config);
}

/// Corpus-level BLEU: clipped counts and lengths are pooled over all pairs
/// before forming precisions and the brevity penalty.
inline OverlapScore corpus_bleu(std::span<const std::pair<TokenSequence, TokenSequence>> pairs,
                                const BleuConfig &config = {}) {
    config.validate();
    if (pairs.empty()) throw ValidationError("corpus_bleu: no pairs");
    std::vector<ClippedCounts> orders(static_cast<std::size_t>(config.max_order));
    std::size_t ref_len = 0;
    std::size_t hyp_len = 0;
    for (const auto &[ref, hyp] : pairs) {
        if (hyp.empty()) throw UndefinedScore(reason::kEmptyCandidate, "corpus_bleu: empty candidate");
        ref_len += ref.size();
        hyp_len += hyp.size();
        for (int n = 1; n <= config.max_order; ++n) {
            const auto cc = clipped_counts(ref, hyp, static_cast<std::size_t>(n));
            orders[static_cast<std::size_t>(n - 1)].matches += cc.matches;
            orders[static_cast<std::size_t>(n - 1)].total += cc.total;
        }
    }
    return detail::combine_bleu(orders, ref_len, hyp_len, config);
}

// ---------------------------------------------------------------------------
// ROUGE-L

inline std::size_t lcs_length(const TokenSequence &a, const TokenSequence &b) {
    if (a.empty() || b.empty()) return 0;
    // one DP row; short inputs stay on the stack
    std::array<std::size_t, 64> small{};
    std::vector<std::size_t> large;
    std::size_t *row = small.data();
    if (b.size() + 1 > small.size()) {
        large.assign(b.size() + 1, 0);
        row = large.data();
    }
    for (const auto &x : a) {
        std::size_t diag = 0; // row[j - 1] of the previous pass
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const auto &y = b[j - 1];
            // s[0] is the terminator for an empty string, so this stays branch-free for short tokens
            bool same = (x.size() == y.size()) & (x[0] == y[0]);
            if (x.size() > 1 && same) same = x == y;
            row[j] = same ? diag + 1 : std::max(up, row[j - 1]);
            diag = up;
        }
    }
    return row[b.size()];
}

/// ROUGE-L F-measure; `beta` weights recall over precision.
inline OverlapScore rouge_l(const TokenSequence &ref, const TokenSequence &hyp, double beta = 1.0) {
    if (ref.empty()) throw UndefinedScore(reason::kEmptyReference, "ROUGE-L of an empty reference");
    if (hyp.empty()) throw UndefinedScore(reason::kEmptyCandidate, "ROUGE-L of an empty candidate");
    if (!(beta > 0.0)) throw ValidationError("ROUGE-L beta must be positive");
    const auto lcs = lcs_length(ref, hyp);
    const double recall = static_cast<double>(lcs) / static_cast<double>(ref.size());
    const double precision = static_cast<double>(lcs) / static_cast<double>(hyp.size());
    const double b2 = beta * beta;
    OverlapScore s;
    s.components = {{"lcs", static_cast<double>(lcs)}, {"recall", recall}, {"precision", precision}, {"beta", beta}};
    s.value = (recall + precision == 0.0) ? 0.0 : (1.0 + b2) * recall * precision / (recall + b2 * precision);
    return s;
}

// ---------------------------------------------------------------------------
// METEOR

enum class MeteorStage { exact, stem, synonym };

using SynonymLexicon = std::map<std::string, std::set<std::string>>;

struct MeteorConfig {
    double alpha = 0.9;
    double gamma = 0.5;
    double beta_frag = 3.0;
    std::vector<MeteorStage> stages{MeteorStage::exact, MeteorStage::stem, MeteorStage::synonym};
    std::optional<SynonymLexicon> synonyms;
    /// Upper bound on search nodes per stage when minimizing chunks.
    std::size_t search_budget = 200000;

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("METEOR alpha must be in (0,1)");
        // gamma above 1 would push scores below zero
        if (!(gamma >= 0.0 && gamma <= 1.0)) throw ValidationError("METEOR gamma must be in [0,1]");
        if (!(beta_frag > 0.0)) throw ValidationError("METEOR fragmentation exponent must be positive");
        if (stages.empty() || stages.front() != MeteorStage::exact)
            throw ValidationError("METEOR stages must start with the exact stage");
        std::set<MeteorStage> seen(stages.begin(), stages.end());
        if (seen.size() != stages.size()) throw ValidationError("METEOR stages must not repeat");
    }
};

/// Parses a synonym lexicon: lines `head: syn1, syn2, ...`. Blank lines and
/// lines starting with `#` are ignored. Entries are lowercased by the caller's
/// tokenizer convention, not here.
inline SynonymLexicon parse_synonym_lexicon(std::istream &in) {
    SynonymLexicon lex;
    std::string line;
    std::size_t lineno = 0;
    auto trim = [](std::string s) {
        auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return std::string();
        auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto colon = t.find(':');
        if (colon == std::string::npos)
            throw ValidationError("synonym lexicon line " + std::to_string(lineno) + ": missing ':'");
        const auto head = trim(t.substr(0, colon));
        if (head.empty()) throw ValidationError("synonym lexicon line " + std::to_string(lineno) + ": empty head");
        auto &syns = lex[head];
        std::string rest = t.substr(colon + 1);
        std::size_t pos = 0;
        while (pos <= rest.size()) {
            auto comma = rest.find(',', pos);
            if (comma == std::string::npos) comma = rest.size();
            auto word = trim(rest.substr(pos, comma - pos));
            if (!word.empty()) syns.insert(word);
            pos = comma + 1;
        }
    }
    return lex;
}

inline SynonymLexicon load_synonym_lexicon(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open synonym lexicon: " + path);
    return parse_synonym_lexicon(in);
}

/// One-to-one alignment between candidate and reference positions.
struct MeteorAlignment {
    std::vector<int> hyp_to_ref; ///< -1 when unaligned
    std::vector<MeteorStage> stage_of; ///< stage that produced each link
    std::size_t matches = 0;
};

/// Number of chunks: maximal runs of links adjacent in both sentences.
inline std::size_t count_chunks(const std::vector<int> &hyp_to_ref) {
    std::size_t chunks = 0;
    int prev_ref = -2;
    bool prev_linked = false;
    for (int r : hyp_to_ref) {
        if (r < 0) {
            prev_linked = false;
            continue;
        }
        if (!(prev_linked && r == prev_ref + 1)) ++chunks;
        prev_ref = r;
        prev_linked = true;
    }
    return chunks;
}

namespace detail {

inline bool stage_matches(MeteorStage stage, const std::string &h, const std::string &r, const std::string &h_stem,
                          const std::string &r_stem, const MeteorConfig &config) {
    switch (stage) {
    case MeteorStage::exact:
        return h == r;
    case MeteorStage::stem:
        return h_stem == r_stem;
    case MeteorStage::synonym: {
        if (!config.synonyms) return false;
        const auto &lex = *config.synonyms;
        auto has = [&](const std::string &a, const std::string &b) {
            auto it = lex.find(a);
            return it != lex.end() && it->second.count(b) > 0;
        };
        return has(h, r) || has(r, h);
    }
    }
    return false;
}

/// Finds, among maximum-cardinality matchings of one stage, one that
/// minimizes the chunk count of the combined alignment. Exhaustive
/// branch-and-bound with a node budget; falls back to the best matching found.
class StageAligner {
  public:
    StageAligner(std::vector<int> &hyp_to_ref, std::vector<bool> &ref_used,
                 const std::vector<std::vector<int>> &candidates, std::size_t budget)
        : hyp_to_ref_(hyp_to_ref), ref_used_(ref_used), cand_(candidates), budget_(budget) {
        for (std::size_t i = 0; i < cand_.size(); ++i) {
            if (!cand_[i].empty()) positions_.push_back(static_cast<int>(i));
        }
    }

    /// Returns the number of links added.
    std::size_t run() {
        if (positions_.empty()) return 0;
        target_ = max_matching();
        if (target_ == 0) return 0;
        best_ = seed_;
        best_chunks_ = chunks_with(seed_);
        std::vector<int> assign(positions_.size(), -1);
        if (best_chunks_ > 1) dfs(0, 0, assign);
        for (std::size_t k = 0; k < positions_.size(); ++k) {
            if (best_[k] >= 0) {
                hyp_to_ref_[static_cast<std::size_t>(positions_[k])] = best_[k];
                ref_used_[static_cast<std::size_t>(best_[k])] = true;
            }
        }
        return target_;
    }

  private:
    std::vector<int> &hyp_to_ref_;
    std::vector<bool> &ref_used_;
    const std::vector<std::vector<int>> &cand_;
    std::size_t budget_;
    std::vector<int> positions_;
    std::size_t target_ = 0;
    std::vector<int> seed_;
    std::vector<int> best_;
    std::size_t best_chunks_ = 0;
    std::size_t nodes_ = 0;
    bool done_ = false;

    // Kuhn's augmenting paths; the matching also seeds the search.
    std::size_t max_matching() {
        std::vector<int> ref_owner(ref_used_.size(), -1);
        std::size_t count = 0;
        for (std::size_t k = 0; k < positions_.size(); ++k) {
            std::vector<bool> seen(ref_used_.size(), false);
            if (augment(k, seen, ref_owner)) ++count;
        }
        seed_.assign(positions_.size(), -1);
        for (std::size_t r = 0; r < ref_owner.size(); ++r) {
            if (ref_owner[r] >= 0) seed_[static_cast<std::size_t>(ref_owner[r])] = static_cast<int>(r);
        }
        return count;
    }

    bool augment(std::size_t k, std::vector<bool> &seen, std::vector<int> &ref_owner) {
        for (int r : cand_[static_cast<std::size_t>(positions_[k])]) {
            if (seen[static_cast<std::size_t>(r)]) continue;
            seen[static_cast<std::size_t>(r)] = true;
            auto &owner = ref_owner[static_cast<std::size_t>(r)];
            if (owner < 0 || augment(static_cast<std::size_t>(owner), seen, ref_owner)) {
                owner = static_cast<int>(k);
                return true;
            }
        }
        return false;
    }

    std::size_t chunks_with(const std::vector<int> &assign) const {
        auto combined = hyp_to_ref_;
        for (std::size_t k = 0; k < positions_.size(); ++k) {
            if (assign[k] >= 0) combined[static_cast<std::size_t>(positions_[k])] = assign[k];
        }
        return count_chunks(combined);
    }

    void dfs(std::size_t k, std::size_t count, std::vector<int> &assign) {
        if (done_) return;
        if (++nodes_ > budget_) {
            done_ = true;
            return;
        }
        if (count + (positions_.size() - k) < target_) return;
        if (k == positions_.size()) {
            const auto c = chunks_with(assign);
            if (c < best_chunks_) {
                best_chunks_ = c;
                best_ = assign;
                if (c <= 1) done_ = true;
            }
            return;
        }
        const auto pos = static_cast<std::size_t>(positions_[k]);
        // Prefer extending the link of the previous candidate position.
        int preferred = -1;
        if (pos > 0) {
            int prev = hyp_to_ref_[pos - 1];
            if (k > 0 && static_cast<std::size_t>(positions_[k - 1]) == pos - 1 && assign[k - 1] >= 0)
                prev = assign[k - 1];
            if (prev >= 0) preferred = prev + 1;
        }
        auto try_ref = [&](int r) {
            auto used = ref_used_[static_cast<std::size_t>(r)];
            if (used) return;
            used = true;
            assign[k] = r;
            dfs(k + 1, count + 1, assign);
            assign[k] = -1;
            used = false;
        };
        const auto &options = cand_[pos];
        if (preferred >= 0 && std::find(options.begin(), options.end(), preferred) != options.end())
            try_ref(preferred);
        for (int r : options) {
            if (done_) return;
            if (r != preferred) try_ref(r);
        }
        if (!done_) dfs(k + 1, count, assign);
    }
};

} // namespace detail

/// Staged one-to-one alignment: each stage links only tokens left unaligned
/// by earlier stages, maximizing links and then minimizing chunks.
inline MeteorAlignment meteor_align(const TokenSequence &ref, const TokenSequence &hyp, const MeteorConfig &config) {
    MeteorAlignment al;
    al.hyp_to_ref.assign(hyp.size(), -1);
    al.stage_of.assign(hyp.size(), MeteorStage::exact);
    std::vector<bool> ref_used(ref.size(), false);

    std::vector<std::string> hyp_stem;
    std::vector<std::string> ref_stem;
    for (const auto &t : hyp) hyp_stem.push_back(porter_stem(t));
    for (const auto &t : ref) ref_stem.push_back(porter_stem(t));

    for (MeteorStage stage : config.stages) {
        std::vector<std::vector<int>> candidates(hyp.size());
        for (std::size_t i = 0; i < hyp.size(); ++i) {
            if (al.hyp_to_ref[i] >= 0) continue;
            for (std::size_t j = 0; j < ref.size(); ++j) {
                if (ref_used[j]) continue;
                if (detail::stage_matches(stage, hyp[i], ref[j], hyp_stem[i], ref_stem[j], config))
                    candidates[i].push_back(static_cast<int>(j));
            }
        }
        auto before = al.hyp_to_ref;
        detail::StageAligner aligner(al.hyp_to_ref, ref_used, candidates, config.search_budget);
        al.matches += aligner.run();
        for (std::size_t i = 0; i < hyp.size(); ++i) {
            if (before[i] < 0 && al.hyp_to_ref[i] >= 0) al.stage_of[i] = stage;
        }
    }
    return al;
}

inline OverlapScore meteor(const TokenSequence &ref, const TokenSequence &hyp, const MeteorConfig &config = {}) {
    config.validate();
    if (ref.empty()) throw UndefinedScore(reason::kEmptyReference, "METEOR of an empty reference");
    if (hyp.empty()) throw UndefinedScore(reason::kEmptyCandidate, "METEOR of an empty candidate");
    const auto al = meteor_align(ref, hyp, config);
    OverlapScore s;
    double per_stage[3] = {0, 0, 0};
    for (std::size_t i = 0; i < hyp.size(); ++i) {
        if (al.hyp_to_ref[i] >= 0) per_stage[static_cast<int>(al.stage_of[i])] += 1;
    }
    const auto m = static_cast<double>(al.matches);
    const auto chunks = static_cast<double>(count_chunks(al.hyp_to_ref));
    s.components = {{"matches", m},
                    {"matches_exact", per_stage[0]},
                    {"matches_stem", per_stage[1]},
                    {"matches_synonym", per_stage[2]},
                    {"chunks", chunks},
                    {"alpha", config.alpha},
                    {"gamma", config.gamma},
                    {"beta_frag", config.beta_frag}};
    if (al.matches == 0) {
        s.components["precision"] = 0.0;
        s.components["recall"] = 0.0;
        s.components["fmean"] = 0.0;
        s.components["penalty"] = 0.0;
        s.value = 0.0;
        return s;
    }
    const double precision = m / static_cast<double>(hyp.size());
    const double recall = m / static_cast<double>(ref.size());
    const double fmean = precision * recall / (config.alpha * precision + (1.0 - config.alpha) * recall);
    const double penalty = config.gamma * std::pow(chunks / m, config.beta_frag);
    s.components["precision"] = precision;
    s.components["recall"] = recall;
    s.components["fmean"] = fmean;
    s.components["penalty"] = penalty;
    s.value = fmean * (1.0 - penalty);
    return s;
}

} // namespace dialeval
