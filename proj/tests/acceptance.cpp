// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dialeval/harness.hpp"
#include "dialeval/report.hpp"
#include "retrieval_oracle.hpp"

using namespace dialeval;

namespace {

const std::string kData = DIALEVAL_TEST_DATA;

struct Check {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string &what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

int failures = 0;

void run(int id, const char *name, const std::function<void(Check &)> &body, double limit_s = 0.0) {
    Check c;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception &e) {
        c.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (limit_s > 0.0) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "runtime %.2fs exceeds %.0fs", secs, limit_s);
        c.require(secs < limit_s, buf);
    }
    if (!c.ok) ++failures;
    std::printf("%s criterion %d: %s (%.2fs)%s%s\n", c.ok ? "PASS" : "FAIL", id, name, secs, c.ok ? "" : " -- ",
                c.detail.c_str());
    std::fflush(stdout);
}

std::string slurp(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char *f, double a, double b = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b);
    return buf;
}

TokenSequence random_sentence(std::mt19937_64 &rng, const std::vector<std::string> &vocab, std::size_t max_len) {
    std::uniform_int_distribution<std::size_t> len(1, max_len), pick(0, vocab.size() - 1);
    std::vector<std::string> t;
    for (std::size_t k = len(rng); k > 0; --k) t.push_back(vocab[pick(rng)]);
    return TokenSequence(t);
}

EmbeddingStore random_store(std::mt19937_64 &rng, const std::vector<std::string> &vocab, std::size_t dim,
                            double scale = 1.0) {
    std::normal_distribution<double> nd;
    EmbeddingStore s(dim);
    std::vector<double> v(dim);
    for (const auto &w : vocab) {
        for (auto &x : v) x = scale * nd(rng);
        s.add(w, v);
    }
    return s;
}

// ---------------------------------------------------------------------------

void identity(Check &c) {
    std::vector<std::string> vocab;
    for (int i = 0; i < 40; ++i) vocab.push_back("w" + std::to_string(i));
    std::mt19937_64 rng(101);
    const auto store = random_store(rng, vocab, 16);
    for (int i = 0; i < 200; ++i) {
        const auto s = random_sentence(rng, vocab, 15);
        for (int n = 1; n <= 4; ++n) {
            BleuConfig cfg;
            cfg.max_order = n;
            c.require(bleu(s, s, cfg).value == 1.0, "BLEU-" + std::to_string(n) + " != 1 for " + s.join());
        }
        c.require(rouge_l(s, s).value == 1.0, "ROUGE-L != 1 for " + s.join());
        c.require(std::abs(greedy_match(s, s, store) - 1.0) <= 1e-9, "greedy != 1");
        c.require(std::abs(average_metric(s, s, store) - 1.0) <= 1e-9, "average != 1");
        c.require(std::abs(extrema_metric(s, s, store) - 1.0) <= 1e-9, "extrema != 1");
        const MeteorConfig mc;
        const double m = static_cast<double>(s.size());
        const double want = 1.0 - mc.gamma * std::pow(1.0 / m, mc.beta_frag);
        c.require(std::abs(meteor(s, s, mc).value - want) <= 1e-12, "METEOR identity formula for " + s.join());
    }
}

void table_one(Check &c) {
    const auto ref = tokenize("Nah, I hate that stuff, let's do something active.");
    const auto hyp = tokenize("Oh sure! Heard the film about Turing is out!");
    BleuConfig cfg;
    cfg.max_order = 2;
    cfg.smoothing_epsilon = 0.0;
    c.require(bleu(ref, hyp, cfg).value == 0.0, "BLEU-2 is not 0");
    c.require(rouge_l(ref, hyp).value == 0.0, "ROUGE-L is not 0");
}

// Every sequence over {0,1,2} of length 0..8, indexed by (length, base-3 value).
struct SequenceSpace {
    static constexpr int kMax = 8;
    std::array<std::size_t, kMax + 2> offset{};
    std::vector<std::vector<int>> seqs;

    SequenceSpace() {
        std::size_t p = 1;
        for (int l = 0; l <= kMax; ++l) {
            offset[static_cast<std::size_t>(l) + 1] = offset[static_cast<std::size_t>(l)] + p;
            for (std::size_t v = 0; v < p; ++v) {
                std::vector<int> s(static_cast<std::size_t>(l));
                std::size_t x = v;
                for (int k = l - 1; k >= 0; --k) {
                    s[static_cast<std::size_t>(k)] = static_cast<int>(x % 3);
                    x /= 3;
                }
                seqs.push_back(s);
            }
            p *= 3;
        }
    }

    std::size_t index(const std::vector<int> &s) const {
        std::size_t v = 0;
        for (int x : s) v = v * 3 + static_cast<std::size_t>(x);
        return offset[s.size()] + v;
    }
};

// LCS of a and b: the longest subsequence of a that is also a subsequence of b,
// found by enumerating subsequences of both explicitly.
class SubsequenceOracle {
  public:
    explicit SubsequenceOracle(const SequenceSpace &sp) : sp_(sp), words_((sp.seqs.size() + 63) / 64) {
        bits_.assign(sp.seqs.size() * words_, 0);
        subs_.resize(sp.seqs.size());
        for (std::size_t i = 0; i < sp.seqs.size(); ++i) {
            const auto &s = sp.seqs[i];
            std::set<std::size_t> seen;
            for (unsigned mask = 0; mask < (1u << s.size()); ++mask) {
                std::vector<int> sub;
                for (std::size_t k = 0; k < s.size(); ++k) {
                    if (mask & (1u << k)) sub.push_back(s[k]);
                }
                const auto j = sp.index(sub);
                if (seen.insert(j).second) {
                    bits_[i * words_ + j / 64] |= std::uint64_t{1} << (j % 64);
                    subs_[i].push_back(j);
                }
            }
            std::sort(subs_[i].begin(), subs_[i].end(), [&](std::size_t x, std::size_t y) {
                return sp.seqs[x].size() > sp.seqs[y].size();
            });
        }
    }

    std::size_t lcs(std::size_t a, std::size_t b) const {
        for (std::size_t j : subs_[a]) {
            if (bits_[b * words_ + j / 64] >> (j % 64) & 1) return sp_.seqs[j].size();
        }
        return 0;
    }

  private:
    const SequenceSpace &sp_;
    std::size_t words_;
    std::vector<std::uint64_t> bits_;
    std::vector<std::vector<std::size_t>> subs_;
};

void overlap_oracles(Check &c) {
    const SequenceSpace sp;
    const SubsequenceOracle oracle(sp);
    const std::array<std::string, 3> sym{"a", "b", "c"};
    std::vector<TokenSequence> toks;
    for (const auto &s : sp.seqs) {
        std::vector<std::string> t;
        for (int x : s) t.push_back(sym[static_cast<std::size_t>(x)]);
        toks.emplace_back(t);
    }
    std::size_t pairs = 0;
    for (std::size_t i = 0; i < toks.size() && c.ok; ++i) {
        for (std::size_t j = 0; j < toks.size(); ++j) {
            ++pairs;
            if (lcs_length(toks[i], toks[j]) != oracle.lcs(i, j)) {
                c.require(false, "lcs mismatch on " + toks[i].join() + " / " + toks[j].join());
                break;
            }
        }
    }
    c.require(pairs == toks.size() * toks.size(), "sweep incomplete");

    // clipped precision: pair each candidate n-gram occurrence with an unused reference occurrence
    std::mt19937_64 rng(3);
    const std::vector<std::string> vocab{"x", "y", "z", "u"};
    for (int k = 0; k < 1000; ++k) {
        const auto ref = random_sentence(rng, vocab, 12);
        const auto hyp = random_sentence(rng, vocab, 12);
        for (std::size_t n = 1; n <= 4; ++n) {
            std::size_t matches = 0, total = 0;
            if (hyp.size() >= n) {
                const std::size_t rc = ref.size() >= n ? ref.size() - n + 1 : 0;
                std::vector<bool> used(rc, false);
                for (std::size_t h = 0; h + n <= hyp.size(); ++h) {
                    ++total;
                    for (std::size_t r = 0; r < rc; ++r) {
                        if (!used[r] && std::equal(hyp.begin() + static_cast<long>(h),
                                                   hyp.begin() + static_cast<long>(h + n),
                                                   ref.begin() + static_cast<long>(r))) {
                            used[r] = true;
                            ++matches;
                            break;
                        }
                    }
                }
            }
            const auto got = clipped_counts(ref, hyp, n);
            c.require(got.matches == matches && got.total == total, "clipped counts mismatch");
            if (total > 0 && matches > 0) {
                c.require(ngram_precision(ref, hyp, n, 0.0) == double(matches) / double(total), "precision mismatch");
            }
        }
    }
}

double cos_oracle(const std::vector<double> &a, const std::vector<double> &b) {
    long double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += (long double)a[i] * b[i];
        na += (long double)a[i] * a[i];
        nb += (long double)b[i] * b[i];
    }
    return static_cast<double>(dot / std::sqrt(na * nb));
}

std::vector<double> vec_of(const EmbeddingStore &s, const std::string &w) {
    const auto v = *s.find(w);
    return {v.begin(), v.end()};
}

void embedding_oracles(Check &c) {
    std::mt19937_64 rng(404);
    const std::vector<std::string> vocab{"p", "q", "r", "s", "t", "u"};
    std::uniform_int_distribution<std::size_t> dim(1, 5);
    std::uniform_real_distribution<double> scale(0.01, 100.0);
    for (int k = 0; k < 1000; ++k) {
        const auto store = random_store(rng, vocab, dim(rng));
        const auto r = random_sentence(rng, vocab, 4);
        const auto h = random_sentence(rng, vocab, 4);
        // greedy: both directions, every pair enumerated
        auto directed = [&](const TokenSequence &x, const TokenSequence &y) {
            double total = 0;
            for (const auto &a : x) {
                double best = -2;
                for (const auto &b : y) best = std::max(best, cos_oracle(vec_of(store, a), vec_of(store, b)));
                total += best;
            }
            return total / double(x.size());
        };
        const double gm = (directed(r, h) + directed(h, r)) / 2;
        // average: plain sum of vectors, cosine is scale free
        auto sum = [&](const TokenSequence &x) {
            std::vector<double> out(store.dimension(), 0.0);
            for (const auto &w : x) {
                const auto v = vec_of(store, w);
                for (std::size_t d = 0; d < v.size(); ++d) out[d] += v[d];
            }
            return out;
        };
        // extrema: per dimension the value of largest magnitude, the negative one on a tie
        auto extrema = [&](const TokenSequence &x) {
            std::vector<double> out(store.dimension());
            for (std::size_t d = 0; d < out.size(); ++d) {
                double pick = vec_of(store, x[0])[d];
                for (const auto &w : x) {
                    const double v = vec_of(store, w)[d];
                    if (std::abs(v) > std::abs(pick) || (std::abs(v) == std::abs(pick) && v < pick)) pick = v;
                }
                out[d] = pick;
            }
            return out;
        };
        const double got_gm = greedy_match(r, h, store);
        c.require(std::abs(got_gm - gm) <= 1e-9, "greedy mismatch");
        try {
            const double avg = cos_oracle(sum(r), sum(h));
            c.require(std::abs(average_metric(r, h, store) - avg) <= 1e-9, "average mismatch");
        } catch (const UndefinedScore &) {
            // vectors summing to zero are undefined by definition
        }
        c.require(std::abs(extrema_metric(r, h, store) - cos_oracle(extrema(r), extrema(h))) <= 1e-9,
                  "extrema mismatch");
        c.require(std::abs(greedy_match(h, r, store) - got_gm) <= 1e-12, "greedy not symmetric");
        EmbeddingStore scaled(store.dimension());
        const double f = scale(rng);
        for (const auto &w : vocab) {
            auto v = vec_of(store, w);
            for (auto &x : v) x *= f;
            scaled.add(w, v);
        }
        c.require(std::abs(greedy_match(r, h, scaled) - got_gm) <= 1e-12, "greedy not scale invariant");
    }
}

// ---------------------------------------------------------------------------

double pearson_oracle(const std::vector<double> &x, const std::vector<double> &y) {
    const long double n = x.size();
    long double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += (long double)x[i] * x[i];
        syy += (long double)y[i] * y[i];
        sxy += (long double)x[i] * y[i];
    }
    return static_cast<double>((n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy)));
}

std::vector<double> rank_oracle(const std::vector<double> &v) {
    std::vector<double> r;
    for (double a : v) {
        double less = 0, equal = 0;
        for (double b : v) {
            less += b < a;
            equal += b == a;
        }
        r.push_back(less + (equal + 1) / 2);
    }
    return r;
}

double permutation_oracle(const std::vector<double> &x, std::vector<double> y, bool ranks) {
    auto stat = [&](const std::vector<double> &yy) {
        return std::abs(ranks ? pearson_oracle(rank_oracle(x), rank_oracle(yy)) : pearson_oracle(x, yy));
    };
    const double obs = stat(y);
    std::size_t hits = 0, total = 0;
    std::sort(y.begin(), y.end());
    do {
        ++total;
        hits += stat(y) >= obs - 1e-9;
    } while (std::next_permutation(y.begin(), y.end()));
    return double(hits) / double(total);
}

void stats_oracles(Check &c) {
    std::mt19937_64 rng(505);
    std::uniform_int_distribution<int> small(1, 5);
    std::normal_distribution<double> nd;
    int defined = 0;
    for (int k = 0; k < 1000; ++k) {
        const std::size_t n = 3 + k % 40;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = k % 2 ? small(rng) : std::round(nd(rng) * 4) / 4; // ties in both kinds
            y[i] = small(rng);
        }
        try {
            const auto p = pearson(x, y);
            const auto s = spearman(x, y);
            c.require(std::abs(p.coefficient - pearson_oracle(x, y)) <= 1e-12, "pearson mismatch");
            c.require(std::abs(s.coefficient - pearson_oracle(rank_oracle(x), rank_oracle(y))) <= 1e-12,
                      "spearman mismatch");
            ++defined;
        } catch (const UndefinedScore &) {
        }
    }
    c.require(defined >= 950, "too many constant draws");

    PValueOptions perm;
    perm.method = PValueMethod::permutation;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 3 + k % 5;
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = nd(rng);
            y[i] = nd(rng);
        }
        // distinct values, so distinct orderings are all n! permutations
        c.require(pearson(x, y, perm).p_value == permutation_oracle(x, y, false), "permutation p (pearson)");
        c.require(spearman(x, y, perm).p_value == permutation_oracle(x, y, true), "permutation p (spearman)");
    }

    std::uniform_int_distribution<int> len(2, 60);
    int fixtures = 0;
    while (fixtures < 100) {
        std::vector<int> a(static_cast<std::size_t>(len(rng))), b(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            a[i] = small(rng);
            b[i] = std::clamp(a[i] + small(rng) / 2 - 1, 1, 5);
        }
        std::int64_t table[6][6] = {}, rows[6] = {}, cols[6] = {};
        for (std::size_t i = 0; i < a.size(); ++i) {
            ++table[a[i]][b[i]];
            ++rows[a[i]];
            ++cols[b[i]];
        }
        for (bool quad : {false, true}) {
            std::int64_t num = 0, den = 0;
            for (int i = 1; i <= 5; ++i) {
                for (int j = 1; j <= 5; ++j) {
                    const std::int64_t w = quad ? (i - j) * (i - j) : std::abs(i - j);
                    num += w * static_cast<std::int64_t>(a.size()) * table[i][j];
                    den += w * rows[i] * cols[j];
                }
            }
            if (den == 0) {
                c.require(false, "degenerate kappa fixture");
                continue;
            }
            const auto w = quad ? KappaWeighting::quadratic : KappaWeighting::linear;
            c.require(weighted_kappa(a, b, w) == 1.0 - double(num) / double(den), "kappa mismatch");
        }
        ++fixtures;
    }

    std::vector<int> a(10000), b(10000);
    for (auto &v : a) v = small(rng);
    for (auto &v : b) v = small(rng);
    const double k = weighted_kappa(a, b);
    c.require(std::abs(k) < 0.05, fmt("independent raters kappa %.4f", k));
}

void retrieval_protocol(Check &c) {
    const auto corpus = oracle::synthetic_corpus(100, 606);
    const auto model = fit_tfidf(corpus);
    const oracle::BruteForce bf(corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (bool ctx : {true, false}) {
            const auto mode = ctx ? RetrievalMode::context : RetrievalMode::response;
            const auto want = bf.scan(corpus[i].context, ctx, i);
            std::vector<RankedItem> got;
            try {
                got = rank(model, tokenize_turns(corpus[i].context, model.tokenizer), mode, i);
            } catch (const UndefinedScore &) {
                c.require(want.empty(), "zero query where the scan finds candidates");
                continue;
            }
            c.require(got.size() == want.size(), "ranking length differs");
            for (std::size_t k = 0; k < std::min(got.size(), want.size()); ++k) {
                c.require(got[k].index == want[k].index && got[k].similarity == want[k].similarity,
                          "ranking differs from scan at query " + corpus[i].id);
            }
            const auto r = retrieve(model, corpus[i].context, mode, i);
            c.require(!r.hit || r.source_id != corpus[i].id, "excluded id returned");
        }
    }
    const Corpus dup{{"a", {"how do i mount the disk"}, "use the mount command"},
                     {"b", {"wifi card not found"}, "install the driver"},
                     {"c", {"how do i mount the disk"}, "check fstab first"},
                     {"d", {"sound is broken"}, "try alsamixer"}};
    const auto r = retrieve(fit_tfidf(dup), dup[0].context, RetrievalMode::context, 0);
    c.require(r.hit && r.source_id == "c" && r.response == "check fstab first", "duplicate context not returned");
}

void smoothing(Check &c) {
    // candidates share unigrams with the reference but no bigram; every
    // candidate has at least 4 tokens so that all four orders are present
    std::mt19937_64 rng(707);
    std::uniform_int_distribution<int> len(4, 12);
    int tiny = 0, positive = 0;
    for (int k = 0; k < 100; ++k) {
        std::vector<std::string> ref, hyp;
        const int n = len(rng);
        for (int i = 0; i < n; ++i) ref.push_back("r" + std::to_string(i));
        std::vector<int> order(static_cast<std::size_t>(n));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        const int shared = 2 + k % (n / 2);
        for (int i = 0; i < shared; ++i) {
            hyp.push_back(ref[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])]);
            hyp.push_back("x" + std::to_string(i));
        }
        const TokenSequence r(ref), h(hyp);
        c.require(clipped_counts(r, h, 2).matches == 0, "fixture shares a bigram");
        c.require(h.size() >= 4, "candidate shorter than 4 tokens");
        const double s = bleu(r, h).value;
        positive += s > 0.0;
        tiny += s > 0.0 && s < 1e-6;
    }
    c.require(positive == 100, "a smoothed BLEU-4 score is zero");
    c.require(tiny >= 95, "only " + std::to_string(tiny) + " pairs below 1e-6");
}

std::string pipeline_outputs(unsigned threads) {
    auto cfg = RunConfig::from_json({{"embeddings", {{"path", kData + "/toy_embeddings.txt"}}},
                                     {"synonyms_path", kData + "/synonyms.txt"},
                                     {"stopwords_path", kData + "/stopwords.txt"},
                                     {"random_baseline", true},
                                     {"p_values", {{"method", "permutation"}, {"samples", 500}}},
                                     {"half_split_repeats", 25},
                                     {"seed", 1234},
                                     {"dataset_name", "fixture20"}});
    const auto res = load_resources(cfg);
    const auto meta = report_meta(cfg, res);
    const auto suite = res.suite(cfg);
    auto ds = load_dataset(kData + "/dataset20.jsonl");
    ds = with_random_baseline(ds, cfg.seed, cfg.random_candidate_id);
    const auto ratings = load_ratings(kData + "/ratings20.csv");
    std::ostringstream out;
    const auto m = score_all(ds, suite, cfg.tokenizer, {}, threads);
    write_score_matrix_csv(out, m, meta);
    report::write_json(out, score_matrix_json(m, meta));
    const auto corr = correlate_with_ratings(m, ratings, cfg);
    write_correlation_csv(out, corr, meta);
    report::write_json(out, correlation_json(corr, meta));
    const auto agr = agreement_report(ratings, cfg.exclusion_threshold, cfg.kappa_weighting);
    write_agreement_csv(out, agr, meta);
    report::write_json(out, agreement_json(agr, meta));
    const auto human = human_scores(ratings, cfg);
    const auto abl = ablate_stopwords(ds, suite, cfg.tokenizer, res.stoplist, human, cfg.p_values);
    write_ablation_csv(out, abl, meta);
    report::write_json(out, ablation_json(abl, meta));
    LengthBucketOptions lo;
    lo.boundary = cfg.length_boundary;
    lo.p = cfg.p_values;
    const auto len = length_effect(m, human, cfg.length_threshold, lo);
    write_length_csv(out, len, meta);
    report::write_json(out, length_json(len, meta));
    const auto model = fit_tfidf(to_corpus(ds), cfg.tokenizer, cfg.df_scope);
    const auto rows = evaluate_retrieval(model, to_corpus(ds), cfg.retrieval_mode, suite, cfg.tokenizer);
    write_retrieval_csv(out, rows, suite.metrics, meta);
    return out.str();
}

void determinism(Check &c) {
    const auto a = pipeline_outputs(1);
    const auto b = pipeline_outputs(3);
    c.require(a.size() > 10000, "pipeline produced too little output");
    c.require(a == b, "reports differ between runs");
}

void schema(Check &c) {
    ScoreMatrix m;
    m.metrics = {Metric::bleu2};
    std::map<ItemKey, double> human;
    for (int i = 0; i < 5; ++i) {
        m.rows.push_back({std::to_string(i), "s", 3, 3, {Cell::of(0.1 * i)}});
        human[{std::to_string(i), "s"}] = i;
    }
    std::ostringstream csv;
    write_correlation_csv(csv, correlate(m, human), {});
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line); // config comment
    std::getline(lines, line);
    c.require(line.rfind("metric,spearman,spearman_p,pearson,pearson_p,", 0) == 0, "correlation header: " + line);
    std::getline(lines, line);
    c.require(line.rfind("BLEU-2,1,", 0) == 0, "correlation row: " + line);

    auto without_config = [](const std::string &s) { return s.substr(s.find('\n') + 1); };
    const auto ratings = load_ratings(kData + "/kappa25.csv");
    const auto rep = agreement_report(ratings);
    c.require(rep.retained.size() == 23 && rep.excluded.size() == 2, "expected 23 retained annotators");
    std::ostringstream agr;
    write_agreement_csv(agr, rep, {});
    c.require(without_config(agr.str()) == slurp(kData + "/golden/agreement_kappa25.csv"),
              "kappa distribution differs from golden: " + agr.str());

    std::ostringstream ag20;
    write_agreement_csv(ag20, agreement_report(load_ratings(kData + "/ratings20.csv")), {{"fixture", "golden"}});
    c.require(ag20.str() == slurp(kData + "/golden/agreement.csv"), "agreement golden differs");

    ScoreMatrix g;
    g.metrics = {Metric::bleu2, Metric::rouge_l};
    std::map<ItemKey, double> gh;
    const std::vector<double> h{1, 3, 2, 5, 4, 2, 3}, b{0.1, 0.4, 0.2, 0.8, 0.5, 0.3, 0.2},
        r{0.3, 0.1, 0.5, 0.4, 0.2, 0.2, 0.6};
    for (std::size_t i = 0; i < h.size(); ++i) {
        g.rows.push_back({"e" + std::to_string(i), "sys", 4, 5, {Cell::of(b[i]), Cell::of(r[i])}});
        gh[{"e" + std::to_string(i), "sys"}] = h[i];
    }
    std::ostringstream gc;
    write_correlation_csv(gc, correlate(g, gh), {{"fixture", "golden"}});
    c.require(gc.str() == slurp(kData + "/golden/correlation.csv"), "correlation golden differs");
}

} // namespace

int main() {
    run(1, "metric identity suite", identity, 5.0);
    run(2, "two-response example scores zero under BLEU-2 and ROUGE-L", table_one);
    run(3, "overlap oracles (complete LCS sweep, clipped precision)", overlap_oracles, 60.0);
    run(4, "embedding oracles", embedding_oracles);
    run(5, "statistics oracles", stats_oracles);
    run(6, "retrieval protocol", retrieval_protocol, 10.0);
    run(7, "smoothed BLEU-4 on unigram-only overlap", smoothing);
    run(8, "pipeline determinism", determinism);
    run(9, "report schema against goldens", schema);
    std::printf("%d of 9 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
