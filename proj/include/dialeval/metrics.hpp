#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dialeval/embedding.hpp"
#include "dialeval/error.hpp"
#include "dialeval/overlap.hpp"
#include "dialeval/text.hpp"

namespace dialeval {

enum class Metric { greedy, average, extrema, meteor, bleu1, bleu2, bleu3, bleu4, rouge_l };

/// Metric order used by every report.
inline constexpr std::array<Metric, 9> kAllMetrics{Metric::greedy, Metric::average, Metric::extrema,
                                                   Metric::meteor, Metric::bleu1,   Metric::bleu2,
                                                   Metric::bleu3,  Metric::bleu4,   Metric::rouge_l};

/// Identifier used on the command line and in config files.
inline std::string_view metric_id(Metric m) {
    switch (m) {
    case Metric::greedy: return "greedy";
    case Metric::average: return "average";
    case Metric::extrema: return "extrema";
    case Metric::meteor: return "meteor";
    case Metric::bleu1: return "bleu1";
    case Metric::bleu2: return "bleu2";
    case Metric::bleu3: return "bleu3";
    case Metric::bleu4: return "bleu4";
    case Metric::rouge_l: return "rouge_l";
    }
    return "";
}

/// Name printed in report rows.
inline std::string_view metric_label(Metric m) {
    switch (m) {
    case Metric::greedy: return "Greedy";
    case Metric::average: return "Average";
    case Metric::extrema: return "Extrema";
    case Metric::meteor: return "METEOR";
    case Metric::bleu1: return "BLEU-1";
    case Metric::bleu2: return "BLEU-2";
    case Metric::bleu3: return "BLEU-3";
    case Metric::bleu4: return "BLEU-4";
    case Metric::rouge_l: return "ROUGE";
    }
    return "";
}

inline Metric parse_metric(std::string_view s) {
    for (Metric m : kAllMetrics) {
        if (s == metric_id(m) || s == metric_label(m)) return m;
    }
    throw ValidationError("unknown metric '" + std::string(s) + "'");
}

inline bool needs_embeddings(Metric m) {
    return m == Metric::greedy || m == Metric::average || m == Metric::extrema;
}

/// A metric value, or the reason it is undefined.
struct Cell {
    std::optional<double> value;
    std::string reason;

    static Cell of(double v) { return {v, {}}; }
    static Cell undefined(std::string why) { return {std::nullopt, std::move(why)}; }
    bool defined() const noexcept { return value.has_value(); }
};

/// Metric parameters shared by batch scoring and retrieval evaluation.
struct MetricSuite {
    std::vector<Metric> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    BleuConfig bleu; ///< max_order is replaced per BLEU-N column
    MeteorConfig meteor;
    double rouge_beta = 1.0;
    const EmbeddingStore *embeddings = nullptr;

    double compute(Metric m, const TokenSequence &ref, const TokenSequence &hyp) const {
        if (ref.empty()) throw UndefinedScore(reason::kEmptyReference, "empty reference");
        if (hyp.empty()) throw UndefinedScore(reason::kEmptyCandidate, "empty candidate");
        auto store = [&]() -> const EmbeddingStore & {
            if (!embeddings) throw ValidationError("metric " + std::string(metric_id(m)) + " needs embeddings");
            return *embeddings;
        };
        switch (m) {
        case Metric::greedy: return greedy_match(ref, hyp, store());
        case Metric::average: return average_metric(ref, hyp, store());
        case Metric::extrema: return extrema_metric(ref, hyp, store());
        case Metric::meteor: return dialeval::meteor(ref, hyp, meteor).value;
        case Metric::bleu1:
        case Metric::bleu2:
        case Metric::bleu3:
        case Metric::bleu4: {
            auto cfg = bleu;
            cfg.max_order = static_cast<int>(m) - static_cast<int>(Metric::bleu1) + 1;
            if (!cfg.weights.empty() && cfg.weights.size() != static_cast<std::size_t>(cfg.max_order))
                cfg.weights.clear();
            return dialeval::bleu(ref, hyp, cfg).value;
        }
        case Metric::rouge_l: return dialeval::rouge_l(ref, hyp, rouge_beta).value;
        }
        throw Error("unhandled metric");
    }

    /// Like compute(), with UndefinedScore turned into a reason-tagged cell.
    Cell score(Metric m, const TokenSequence &ref, const TokenSequence &hyp) const {
        try {
            return Cell::of(compute(m, ref, hyp));
        } catch (const UndefinedScore &e) {
            return Cell::undefined(e.reason());
        }
    }
};

} // namespace dialeval
