#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "dialeval/error.hpp"
#include "dialeval/random.hpp"

namespace dialeval {

// ---------------------------------------------------------------------------
// Correlation

enum class CorrelationMethod { pearson, spearman };
enum class PValueMethod { t_approx, permutation };

inline const char *to_string(CorrelationMethod m) { return m == CorrelationMethod::pearson ? "pearson" : "spearman"; }
inline const char *to_string(PValueMethod m) { return m == PValueMethod::t_approx ? "t_approx" : "permutation"; }

struct PValueOptions {
    PValueMethod method = PValueMethod::t_approx;
    /// Permutation tests enumerate all n! orderings up to this n, and sample
    /// `samples` random orderings above it.
    std::size_t exact_max_n = 8;
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
};

struct CorrelationResult {
    CorrelationMethod method = CorrelationMethod::pearson;
    double coefficient = 0.0;
    double p_value = 1.0;
    std::size_t n = 0;
    PValueMethod p_method = PValueMethod::t_approx;
};

/// Two-sided p-value of a Student-t statistic with `df` degrees of freedom,
/// via the regularized incomplete beta function I_{df/(df+t^2)}(df/2, 1/2).
inline double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw ValidationError("t distribution needs positive degrees of freedom");
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) throw ValidationError("t statistic is NaN");
    const double x = df / (df + t * t);
    return std::clamp(boost::math::ibeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

/// Product-moment coefficient. Throws UndefinedScore(constant_input) when
/// either input has zero variance.
inline double pearson_coefficient(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    if (x.size() < 2) throw UndefinedScore(reason::kTooFewSamples, "correlation needs at least 2 samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedScore(reason::kConstantInput, "correlation of a constant input");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// 1-based ranks; tied values share the mean of the ranks they cover.
inline std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

/// Two-sided permutation p-value of |statistic(x, permuted y)| >= |observed|.
/// Exact over all n! orderings when n <= exact_max_n, otherwise Monte Carlo
/// with the add-one estimator; each sample draws from its own seeded stream.
inline double permutation_p_value(std::span<const double> x, std::span<const double> y,
                                  const std::function<double(std::span<const double>, std::span<const double>)> &stat,
                                  const PValueOptions &opts) {
    const double observed = std::abs(stat(x, y));
    const double tol = 1e-12 * std::max(1.0, observed);
    std::vector<double> perm(y.begin(), y.end());
    if (y.size() <= opts.exact_max_n) {
        std::vector<std::size_t> idx(y.size());
        std::iota(idx.begin(), idx.end(), 0);
        std::uint64_t hits = 0;
        std::uint64_t total = 0;
        do {
            for (std::size_t i = 0; i < idx.size(); ++i) perm[i] = y[idx[i]];
            ++total;
            if (std::abs(stat(x, perm)) >= observed - tol) ++hits;
        } while (std::next_permutation(idx.begin(), idx.end()));
        return static_cast<double>(hits) / static_cast<double>(total);
    }
    if (opts.samples == 0) throw ValidationError("permutation test needs at least one sample");
    std::uint64_t hits = 0;
    for (std::size_t b = 0; b < opts.samples; ++b) {
        auto rng = stream(opts.seed, b);
        std::copy(y.begin(), y.end(), perm.begin());
        shuffle(perm, rng);
        if (std::abs(stat(x, perm)) >= observed - tol) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(opts.samples + 1);
}

namespace detail {

inline double correlation_p(double r, std::size_t n) {
    if (n < 3) throw UndefinedScore(reason::kTooFewSamples, "p-value needs at least 3 samples");
    if (std::abs(r) >= 1.0) return 0.0;
    const double df = static_cast<double>(n - 2);
    const double t = r * std::sqrt(df / (1.0 - r * r));
    return student_t_two_sided_p(t, df);
}

} // namespace detail

inline CorrelationResult pearson(std::span<const double> x, std::span<const double> y,
                                 const PValueOptions &opts = {}) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    if (x.size() < 3) throw UndefinedScore(reason::kTooFewSamples, "correlation needs at least 3 samples");
    CorrelationResult out;
    out.method = CorrelationMethod::pearson;
    out.n = x.size();
    out.coefficient = pearson_coefficient(x, y);
    out.p_method = opts.method;
    if (opts.method == PValueMethod::t_approx) {
        out.p_value = detail::correlation_p(out.coefficient, out.n);
    } else {
        out.p_value = permutation_p_value(
            x, y, [](std::span<const double> a, std::span<const double> b) { return pearson_coefficient(a, b); },
            opts);
    }
    return out;
}

/// Pearson on average ranks.
inline CorrelationResult spearman(std::span<const double> x, std::span<const double> y,
                                  const PValueOptions &opts = {}) {
    if (x.size() != y.size()) throw ValidationError("correlation inputs differ in length");
    const auto rx = average_ranks(x);
    const auto ry = average_ranks(y);
    auto out = pearson(rx, ry, opts);
    out.method = CorrelationMethod::spearman;
    return out;
}

inline CorrelationResult correlate_by(CorrelationMethod m, std::span<const double> x, std::span<const double> y,
                                      const PValueOptions &opts = {}) {
    return m == CorrelationMethod::pearson ? pearson(x, y, opts) : spearman(x, y, opts);
}

// ---------------------------------------------------------------------------
// Weighted kappa

enum class KappaWeighting { linear, quadratic };

inline const char *to_string(KappaWeighting w) { return w == KappaWeighting::linear ? "linear" : "quadratic"; }

inline constexpr int kMinScore = 1;
inline constexpr int kMaxScore = 5;

/// Cohen's weighted kappa on the 1..5 scale with disagreement weights |i-j|
/// or (i-j)^2. Computed in integer arithmetic, so kappa(a,a) is exactly 1
/// and the result is exactly symmetric in its arguments.
inline double weighted_kappa(std::span<const int> a, std::span<const int> b,
                             KappaWeighting weighting = KappaWeighting::linear) {
    if (a.size() != b.size()) throw ValidationError("kappa inputs differ in length");
    if (a.empty()) throw ValidationError("kappa of empty input");
    constexpr int K = kMaxScore - kMinScore + 1;
    std::int64_t observed[K][K] = {};
    std::int64_t row[K] = {};
    std::int64_t col[K] = {};
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] < kMinScore || a[i] > kMaxScore || b[i] < kMinScore || b[i] > kMaxScore)
            throw ValidationError("kappa scores must be in 1..5");
        const int r = a[i] - kMinScore;
        const int c = b[i] - kMinScore;
        ++observed[r][c];
        ++row[r];
        ++col[c];
    }
    const auto n = static_cast<std::int64_t>(a.size());
    std::int64_t num = 0;
    std::int64_t den = 0;
    for (int i = 0; i < K; ++i) {
        for (int j = 0; j < K; ++j) {
            const std::int64_t d = i > j ? i - j : j - i;
            const std::int64_t w = weighting == KappaWeighting::linear ? d : d * d;
            num += w * observed[i][j] * n;
            den += w * row[i] * col[j];
        }
    }
    if (den == 0) throw UndefinedScore(reason::kDegenerateMarginals, "kappa undefined: both raters use one category");
    return 1.0 - static_cast<double>(num) / static_cast<double>(den);
}

// ---------------------------------------------------------------------------
// Ratings

struct Rating {
    std::string example_id;
    std::string candidate_id;
    std::string annotator_id;
    int score = 0;
};

using ItemKey = std::pair<std::string, std::string>; ///< (example id, candidate id)

/// Human ratings on the 1..5 scale, at most one per (example, candidate,
/// annotator).
class RatingsTable {
  public:
    void add(Rating r) {
        if (r.score < kMinScore || r.score > kMaxScore)
            throw ValidationError("rating score " + std::to_string(r.score) + " outside 1..5");
        if (r.example_id.empty() || r.candidate_id.empty() || r.annotator_id.empty())
            throw ValidationError("rating has an empty id");
        auto key = std::make_tuple(r.example_id, r.candidate_id, r.annotator_id);
        if (!seen_.insert(key).second)
            throw ValidationError("duplicate rating for (" + r.example_id + ", " + r.candidate_id + ", " +
                                  r.annotator_id + ")");
        annotators_.insert(r.annotator_id);
        entries_.push_back(std::move(r));
    }

    const std::vector<Rating> &entries() const noexcept { return entries_; }
    const std::set<std::string> &annotators() const noexcept { return annotators_; }
    std::size_t size() const noexcept { return entries_.size(); }

    /// annotator -> item -> score
    std::map<std::string, std::map<ItemKey, int>> by_annotator() const {
        std::map<std::string, std::map<ItemKey, int>> out;
        for (const auto &r : entries_) out[r.annotator_id][{r.example_id, r.candidate_id}] = r.score;
        return out;
    }

  private:
    std::vector<Rating> entries_;
    std::set<std::tuple<std::string, std::string, std::string>> seen_;
    std::set<std::string> annotators_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(std::move(cur));
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(std::move(cur));
    return out;
}

} // namespace detail

/// Ratings CSV with header `example_id,candidate_id,annotator_id,score`.
inline RatingsTable read_ratings_csv(std::istream &in) {
    RatingsTable table;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        auto f = detail::split_csv_line(line);
        if (!header) {
            if (f != std::vector<std::string>{"example_id", "candidate_id", "annotator_id", "score"})
                throw ValidationError("ratings line 1: expected header example_id,candidate_id,annotator_id,score");
            header = true;
            continue;
        }
        if (f.size() != 4) throw ValidationError("ratings line " + std::to_string(lineno) + ": expected 4 fields");
        int score = 0;
        try {
            std::size_t used = 0;
            score = std::stoi(f[3], &used);
            if (used != f[3].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception &) {
            throw ValidationError("ratings line " + std::to_string(lineno) + ": bad score '" + f[3] + "'");
        }
        try {
            table.add({f[0], f[1], f[2], score});
        } catch (const ValidationError &e) {
            throw ValidationError("ratings line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (!header) throw ValidationError("ratings file is empty");
    return table;
}

inline RatingsTable load_ratings(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open ratings: " + path);
    return read_ratings_csv(in);
}

enum class Aggregation { mean, median };

inline double median_of(std::vector<double> v) {
    if (v.empty()) throw UndefinedScore(reason::kTooFewSamples, "median of nothing");
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
}

/// Per-item human score over the given annotators (all when `keep` is empty).
inline std::map<ItemKey, double> item_scores(const RatingsTable &ratings, const std::set<std::string> &keep = {},
                                             Aggregation agg = Aggregation::mean) {
    std::map<ItemKey, std::vector<double>> grouped;
    for (const auto &r : ratings.entries()) {
        if (!keep.empty() && !keep.count(r.annotator_id)) continue;
        grouped[{r.example_id, r.candidate_id}].push_back(r.score);
    }
    std::map<ItemKey, double> out;
    for (auto &[k, v] : grouped) {
        if (agg == Aggregation::median) {
            out[k] = median_of(v);
        } else {
            double s = 0.0;
            for (double x : v) s += x;
            out[k] = s / static_cast<double>(v.size());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Agreement

struct PairKappa {
    std::string a;
    std::string b;
    double kappa = 0.0;
    std::size_t items = 0;
};

struct OmittedPair {
    std::string a;
    std::string b;
    std::string reason;
};

struct ThresholdRow {
    double threshold = 0.0;
    std::size_t pairs_above = 0;
    std::size_t pairs_total = 0;
    double share() const { return pairs_total ? static_cast<double>(pairs_above) / static_cast<double>(pairs_total) : 0.0; }
};

struct AgreementReport {
    KappaWeighting weighting = KappaWeighting::linear;
    double exclusion_threshold = 0.2;
    std::vector<PairKappa> pairs; ///< every defined pair, sorted by (a, b) with a < b
    std::vector<OmittedPair> omitted;
    std::map<std::string, double> mean_kappa; ///< per annotator, over its defined pairs
    std::set<std::string> excluded;
    std::set<std::string> retained;
    double median_kappa = 0.0;     ///< over pairs of retained annotators
    double median_kappa_all = 0.0; ///< over all defined pairs
    std::vector<ThresholdRow> distribution; ///< retained pairs with kappa > 0.2, 0.3, ..., 0.8
};

/// Pairwise weighted kappa over co-rated items. An annotator is excluded when
/// the mean of its pairwise kappas is below `exclusion_threshold` (one pass).
/// The threshold distribution and `median_kappa` cover retained pairs only.
inline AgreementReport agreement_report(const RatingsTable &ratings, double exclusion_threshold = 0.2,
                                        KappaWeighting weighting = KappaWeighting::linear) {
    const auto by = ratings.by_annotator();
    if (by.size() < 2) throw ValidationError("agreement needs at least 2 annotators");
    AgreementReport rep;
    rep.weighting = weighting;
    rep.exclusion_threshold = exclusion_threshold;
    std::map<std::string, std::vector<double>> per;
    for (auto ia = by.begin(); ia != by.end(); ++ia) {
        for (auto ib = std::next(ia); ib != by.end(); ++ib) {
            std::vector<int> sa;
            std::vector<int> sb;
            for (const auto &[item, score] : ia->second) {
                auto it = ib->second.find(item);
                if (it == ib->second.end()) continue;
                sa.push_back(score);
                sb.push_back(it->second);
            }
            if (sa.empty()) {
                rep.omitted.push_back({ia->first, ib->first, "no_overlap"});
                continue;
            }
            try {
                const double k = weighted_kappa(sa, sb, weighting);
                rep.pairs.push_back({ia->first, ib->first, k, sa.size()});
                per[ia->first].push_back(k);
                per[ib->first].push_back(k);
            } catch (const UndefinedScore &e) {
                rep.omitted.push_back({ia->first, ib->first, e.reason()});
            }
        }
    }
    for (const auto &[who, items] : by) {
        auto it = per.find(who);
        if (it == per.end()) {
            // no defined pair: nothing to judge the annotator against
            rep.retained.insert(who);
            continue;
        }
        const double m = std::accumulate(it->second.begin(), it->second.end(), 0.0) /
                         static_cast<double>(it->second.size());
        rep.mean_kappa[who] = m;
        if (m < exclusion_threshold) {
            rep.excluded.insert(who);
        } else {
            rep.retained.insert(who);
        }
    }
    std::vector<double> all;
    std::vector<double> kept;
    for (const auto &p : rep.pairs) {
        all.push_back(p.kappa);
        if (rep.retained.count(p.a) && rep.retained.count(p.b)) kept.push_back(p.kappa);
    }
    if (!all.empty()) rep.median_kappa_all = median_of(all);
    if (!kept.empty()) rep.median_kappa = median_of(kept);
    for (int t = 2; t <= 8; ++t) {
        ThresholdRow row;
        row.threshold = t / 10.0;
        row.pairs_total = kept.size();
        for (double k : kept) {
            if (k > row.threshold) ++row.pairs_above;
        }
        rep.distribution.push_back(row);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Confidence intervals and two-sample tests

struct MeanCI {
    double mean = 0.0;
    double halfwidth = 0.0;
};

/// Normal-approximation 95% interval: mean +/- 1.96 * s / sqrt(n), with the
/// n-1 sample standard deviation.
inline MeanCI ci95(std::span<const double> samples) {
    if (samples.size() < 2) throw UndefinedScore(reason::kTooFewSamples, "ci95 needs at least 2 samples");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double x : samples) mean += x;
    mean /= n;
    double ss = 0.0;
    for (double x : samples) ss += (x - mean) * (x - mean);
    const double sd = std::sqrt(ss / (n - 1.0));
    return {mean, 1.96 * sd / std::sqrt(n)};
}

/// "0.650 ± 0.003"
inline std::string format_ci(const MeanCI &ci, int digits = 3) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*f \xC2\xB1 %.*f", digits, ci.mean, digits, ci.halfwidth);
    return buf;
}

struct WelchResult {
    double t = 0.0;
    double df = 0.0;
    double p_value = 1.0;
};

inline WelchResult welch_t_test(std::span<const double> a, std::span<const double> b) {
    if (a.size() < 2 || b.size() < 2)
        throw UndefinedScore(reason::kTooFewSamples, "Welch t-test needs at least 2 samples per group");
    auto moments = [](std::span<const double> v) {
        double m = 0.0;
        for (double x : v) m += x;
        m /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - m) * (x - m);
        return std::pair{m, ss / static_cast<double>(v.size() - 1)};
    };
    const auto [ma, va] = moments(a);
    const auto [mb, vb] = moments(b);
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    const double sa = va / na;
    const double sb = vb / nb;
    WelchResult r;
    if (sa + sb == 0.0) {
        r.t = ma == mb ? 0.0 : std::copysign(INFINITY, ma - mb);
        r.df = na + nb - 2.0;
        r.p_value = ma == mb ? 1.0 : 0.0;
        return r;
    }
    r.t = (ma - mb) / std::sqrt(sa + sb);
    r.df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    r.p_value = student_t_two_sided_p(r.t, r.df);
    return r;
}

/// Two-sided permutation test on |mean(a) - mean(b)|: the pooled values are
/// reshuffled into groups of the original sizes.
inline double permutation_mean_diff_p(std::span<const double> a, std::span<const double> b,
                                      const PValueOptions &opts) {
    if (a.empty() || b.empty()) throw UndefinedScore(reason::kTooFewSamples, "empty group");
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    auto diff = [&](const std::vector<double> &v) {
        double sa = 0.0;
        double sb = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) sa += v[i];
        for (std::size_t i = a.size(); i < v.size(); ++i) sb += v[i];
        return std::abs(sa / static_cast<double>(a.size()) - sb / static_cast<double>(b.size()));
    };
    const double observed = diff(pooled);
    const double tol = 1e-12 * std::max(1.0, observed);
    if (opts.samples == 0) throw ValidationError("permutation test needs at least one sample");
    std::uint64_t hits = 0;
    std::vector<double> perm(pooled.size());
    for (std::size_t s = 0; s < opts.samples; ++s) {
        auto rng = stream(opts.seed, s);
        perm = pooled;
        shuffle(perm, rng);
        if (diff(perm) >= observed - tol) ++hits;
    }
    return static_cast<double>(hits + 1) / static_cast<double>(opts.samples + 1);
}

enum class BucketBoundary {
    both_inclusive, ///< low: dw <= t, high: dw >= t (rows at t land in both)
    low_inclusive,  ///< low: dw <= t, high: dw > t
    high_inclusive, ///< low: dw < t,  high: dw >= t
};

struct LengthRow {
    double score = 0.0;
    std::size_t delta_words = 0;
};

struct LengthBucketResult {
    double mean_low = 0.0;
    double mean_high = 0.0;
    std::size_t n_low = 0;
    std::size_t n_high = 0;
    double p_value = 1.0;
    PValueMethod p_method = PValueMethod::t_approx;
};

struct LengthBucketOptions {
    BucketBoundary boundary = BucketBoundary::both_inclusive;
    PValueOptions p;
};

/// Compares a score between small and large length differences with a
/// Welch t-test (or a permutation test).
inline LengthBucketResult length_bucket_test(std::span<const LengthRow> rows, std::size_t threshold,
                                             const LengthBucketOptions &opts = {}) {
    std::vector<double> low;
    std::vector<double> high;
    for (const auto &r : rows) {
        const bool in_low = opts.boundary == BucketBoundary::high_inclusive ? r.delta_words < threshold
                                                                            : r.delta_words <= threshold;
        const bool in_high = opts.boundary == BucketBoundary::low_inclusive ? r.delta_words > threshold
                                                                            : r.delta_words >= threshold;
        if (in_low) low.push_back(r.score);
        if (in_high) high.push_back(r.score);
    }
    if (low.empty() || high.empty()) throw UndefinedScore(reason::kTooFewSamples, "empty length bucket");
    LengthBucketResult out;
    out.n_low = low.size();
    out.n_high = high.size();
    out.mean_low = std::accumulate(low.begin(), low.end(), 0.0) / static_cast<double>(low.size());
    out.mean_high = std::accumulate(high.begin(), high.end(), 0.0) / static_cast<double>(high.size());
    out.p_method = opts.p.method;
    out.p_value = opts.p.method == PValueMethod::t_approx ? welch_t_test(low, high).p_value
                                                           : permutation_mean_diff_p(low, high, opts.p);
    return out;
}

// ---------------------------------------------------------------------------
// Human split-half agreement

struct HalfSplitSummary {
    double spearman = 0.0; ///< mean over defined repeats
    double spearman_p = 1.0;
    double pearson = 0.0;
    double pearson_p = 1.0;
    std::size_t repeats = 0;
    std::size_t spearman_defined = 0;
    std::size_t pearson_defined = 0;
    double mean_items = 0.0; ///< items rated by both halves, averaged over repeats
};

/// Splits the annotators into two random halves `repeats` times; per item the
/// mean score of each half is computed and the two mean vectors correlated.
/// Split r uses random stream (seed, r), so results depend only on the seed.
inline HalfSplitSummary random_half_correlation(const RatingsTable &ratings, std::uint64_t seed,
                                                std::size_t repeats) {
    if (ratings.annotators().size() < 4) throw ValidationError("split-half correlation needs at least 4 annotators");
    if (repeats == 0) throw ValidationError("split-half correlation needs at least one repeat");
    const std::vector<std::string> roster(ratings.annotators().begin(), ratings.annotators().end());
    HalfSplitSummary out;
    out.repeats = repeats;
    double items_total = 0.0;
    double sp = 0.0, sp_p = 0.0, pe = 0.0, pe_p = 0.0;
    for (std::size_t r = 0; r < repeats; ++r) {
        auto order = roster;
        auto rng = stream(seed, r);
        shuffle(order, rng);
        const auto mid = order.begin() + static_cast<std::ptrdiff_t>(order.size() / 2);
        const std::set<std::string> first(order.begin(), mid);
        const std::set<std::string> second(mid, order.end());
        const auto s1 = item_scores(ratings, first);
        const auto s2 = item_scores(ratings, second);
        std::vector<double> x;
        std::vector<double> y;
        for (const auto &[item, v] : s1) {
            auto it = s2.find(item);
            if (it == s2.end()) continue;
            x.push_back(v);
            y.push_back(it->second);
        }
        items_total += static_cast<double>(x.size());
        try {
            const auto c = spearman(x, y);
            sp += c.coefficient;
            sp_p += c.p_value;
            ++out.spearman_defined;
        } catch (const UndefinedScore &) {
        }
        try {
            const auto c = pearson(x, y);
            pe += c.coefficient;
            pe_p += c.p_value;
            ++out.pearson_defined;
        } catch (const UndefinedScore &) {
        }
    }
    if (out.spearman_defined) {
        out.spearman = sp / static_cast<double>(out.spearman_defined);
        out.spearman_p = sp_p / static_cast<double>(out.spearman_defined);
    }
    if (out.pearson_defined) {
        out.pearson = pe / static_cast<double>(out.pearson_defined);
        out.pearson_p = pe_p / static_cast<double>(out.pearson_defined);
    }
    out.mean_items = items_total / static_cast<double>(repeats);
    return out;
}

} // namespace dialeval
