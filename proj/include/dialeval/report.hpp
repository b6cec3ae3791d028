#pragma once

#include <cstdio>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dialeval/error.hpp"
#include "dialeval/harness.hpp"
#include "dialeval/metrics.hpp"
#include "dialeval/retrieval.hpp"
#include "dialeval/stats.hpp"

// Report writers. Every CSV starts with a single `# config: {...}` line
// carrying the run metadata as compact JSON; numbers use %.10g and missing
// values are written as NA.

namespace dialeval {

namespace report {

inline std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

inline std::string num(const std::optional<double> &v) { return v ? num(*v) : std::string("NA"); }

inline nlohmann::json jnum(const std::optional<double> &v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

/// Quotes a CSV field when it holds a comma, quote or line break.
inline std::string field(const std::string &s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + '"';
}

inline void config_line(std::ostream &out, const nlohmann::json &meta) { out << "# config: " << meta.dump() << '\n'; }

inline std::string cell_text(const Cell &c) { return c.defined() ? num(*c.value) : "NA:" + c.reason; }

inline void write_json(std::ostream &out, const nlohmann::json &j) { out << j.dump(2) << '\n'; }

} // namespace report

/// Metadata echoed into every report: the run config plus provenance of the
/// loaded resources.
inline nlohmann::json report_meta(const RunConfig &cfg, const Resources &res) {
    nlohmann::json meta;
    meta["config"] = cfg.to_json();
    meta["embedding_source"] = res.embeddings ? res.embeddings->source() : std::string();
    meta["stoplist_hash"] = res.stoplist.hash();
    return meta;
}

// ---------------------------------------------------------------------------
// Score matrix

inline void write_score_matrix_csv(std::ostream &out, const ScoreMatrix &m, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "example_id,candidate_id,ref_len,hyp_len";
    for (Metric x : m.metrics) out << ',' << metric_id(x);
    out << '\n';
    for (const auto &r : m.rows) {
        out << report::field(r.example_id) << ',' << report::field(r.candidate_id) << ',' << r.ref_len << ','
            << r.hyp_len;
        for (const auto &c : r.cells) out << ',' << report::cell_text(c);
        out << '\n';
    }
}

inline nlohmann::json score_matrix_json(const ScoreMatrix &m, const nlohmann::json &meta) {
    nlohmann::json j;
    j["meta"] = meta;
    std::vector<std::string> ids;
    for (Metric x : m.metrics) ids.emplace_back(metric_id(x));
    j["metrics"] = ids;
    j["rows"] = nlohmann::json::array();
    for (const auto &r : m.rows) {
        nlohmann::json row{{"example_id", r.example_id},
                           {"candidate_id", r.candidate_id},
                           {"ref_len", r.ref_len},
                           {"hyp_len", r.hyp_len}};
        nlohmann::json cells = nlohmann::json::object();
        for (std::size_t c = 0; c < r.cells.size(); ++c) {
            const auto &cell = r.cells[c];
            cells[ids[c]] = cell.defined() ? nlohmann::json(*cell.value) : nlohmann::json{{"undefined", cell.reason}};
        }
        row["scores"] = cells;
        j["rows"].push_back(row);
    }
    return j;
}

/// Reads a matrix written by write_score_matrix_csv. Comment lines are
/// skipped; values round-trip to 10 significant digits.
inline ScoreMatrix read_score_matrix_csv(std::istream &in) {
    ScoreMatrix m;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        const auto f = detail::split_csv_line(line);
        const std::string where = "score matrix line " + std::to_string(lineno);
        if (!header) {
            if (f.size() < 4 || f[0] != "example_id" || f[1] != "candidate_id" || f[2] != "ref_len" ||
                f[3] != "hyp_len")
                throw ValidationError(where + ": expected header example_id,candidate_id,ref_len,hyp_len,...");
            for (std::size_t i = 4; i < f.size(); ++i) m.metrics.push_back(parse_metric(f[i]));
            header = true;
            continue;
        }
        if (f.size() != 4 + m.metrics.size()) throw ValidationError(where + ": wrong number of fields");
        ScoreRow r;
        r.example_id = f[0];
        r.candidate_id = f[1];
        try {
            r.ref_len = std::stoul(f[2]);
            r.hyp_len = std::stoul(f[3]);
            for (std::size_t i = 4; i < f.size(); ++i) {
                if (f[i].rfind("NA", 0) == 0) {
                    r.cells.push_back(Cell::undefined(f[i].size() > 3 ? f[i].substr(3) : std::string()));
                } else {
                    std::size_t used = 0;
                    const double v = std::stod(f[i], &used);
                    if (used != f[i].size()) throw std::invalid_argument(f[i]);
                    r.cells.push_back(Cell::of(v));
                }
            }
        } catch (const std::logic_error &) {
            throw ValidationError(where + ": malformed number");
        }
        m.rows.push_back(std::move(r));
    }
    if (!header) throw ValidationError("score matrix: missing header");
    return m;
}

inline ScoreMatrix load_score_matrix(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open score matrix: " + path);
    return read_score_matrix_csv(in);
}

// ---------------------------------------------------------------------------
// Correlation (one row per metric: metric, Spearman, p, Pearson, p, n)

namespace report {

struct CorrCells {
    std::optional<double> spearman, spearman_p, pearson, pearson_p;
};

inline CorrCells corr_cells(const CorrelationRow &r) {
    CorrCells c;
    if (r.spearman) {
        c.spearman = r.spearman->coefficient;
        c.spearman_p = r.spearman->p_value;
    }
    if (r.pearson) {
        c.pearson = r.pearson->coefficient;
        c.pearson_p = r.pearson->p_value;
    }
    return c;
}

inline CorrCells corr_cells(const HalfSplitSummary &h) {
    CorrCells c;
    if (h.spearman_defined) {
        c.spearman = h.spearman;
        c.spearman_p = h.spearman_p;
    }
    if (h.pearson_defined) {
        c.pearson = h.pearson;
        c.pearson_p = h.pearson_p;
    }
    return c;
}

} // namespace report

inline void write_correlation_csv(std::ostream &out, const CorrelationReport &rep, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "metric,spearman,spearman_p,pearson,pearson_p,n,dropped_undefined\n";
    for (const auto &r : rep.rows) {
        const auto c = report::corr_cells(r);
        out << report::field(r.label) << ',' << report::num(c.spearman) << ',' << report::num(c.spearman_p) << ','
            << report::num(c.pearson) << ',' << report::num(c.pearson_p) << ',' << r.n << ',' << r.undefined << '\n';
    }
    if (rep.human) {
        const auto c = report::corr_cells(*rep.human);
        out << "Human," << report::num(c.spearman) << ',' << report::num(c.spearman_p) << ','
            << report::num(c.pearson) << ',' << report::num(c.pearson_p) << ',' << report::num(rep.human->mean_items)
            << ",0\n";
    }
}

inline nlohmann::json correlation_json(const CorrelationReport &rep, const nlohmann::json &meta) {
    nlohmann::json j;
    j["meta"] = meta;
    j["dataset"] = rep.dataset;
    j["matrix_rows"] = rep.matrix_rows;
    j["rated_rows"] = rep.rated_rows;
    j["unrated_rows"] = rep.unrated_rows;
    j["rows"] = nlohmann::json::array();
    for (const auto &r : rep.rows) {
        const auto c = report::corr_cells(r);
        nlohmann::json row{{"metric", r.label},
                           {"spearman", report::jnum(c.spearman)},
                           {"spearman_p", report::jnum(c.spearman_p)},
                           {"pearson", report::jnum(c.pearson)},
                           {"pearson_p", report::jnum(c.pearson_p)},
                           {"n", r.n},
                           {"dropped_undefined", r.undefined}};
        if (!r.reason.empty()) row["reason"] = r.reason;
        j["rows"].push_back(row);
    }
    if (rep.human) {
        const auto c = report::corr_cells(*rep.human);
        j["human"] = {{"metric", "Human"},
                      {"spearman", report::jnum(c.spearman)},
                      {"spearman_p", report::jnum(c.spearman_p)},
                      {"pearson", report::jnum(c.pearson)},
                      {"pearson_p", report::jnum(c.pearson_p)},
                      {"repeats", rep.human->repeats},
                      {"mean_items", rep.human->mean_items}};
    }
    return j;
}

// ---------------------------------------------------------------------------
// Agreement

/// Threshold distribution: `>0.2,253/253,100.0`.
inline void write_agreement_csv(std::ostream &out, const AgreementReport &rep, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "kappa,pairs,percent\n";
    char buf[96];
    for (const auto &row : rep.distribution) {
        std::snprintf(buf, sizeof buf, ">%.1f,%zu/%zu,%.1f\n", row.threshold, row.pairs_above, row.pairs_total,
                      100.0 * row.share());
        out << buf;
    }
}

inline void write_agreement_pairs_csv(std::ostream &out, const AgreementReport &rep, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "annotator_a,annotator_b,kappa,items\n";
    for (const auto &p : rep.pairs)
        out << report::field(p.a) << ',' << report::field(p.b) << ',' << report::num(p.kappa) << ',' << p.items
            << '\n';
    for (const auto &p : rep.omitted)
        out << report::field(p.a) << ',' << report::field(p.b) << ",NA:" << p.reason << ",0\n";
}

inline nlohmann::json agreement_json(const AgreementReport &rep, const nlohmann::json &meta) {
    nlohmann::json j;
    j["meta"] = meta;
    j["weighting"] = to_string(rep.weighting);
    j["exclusion_threshold"] = rep.exclusion_threshold;
    j["annotators"] = rep.retained.size() + rep.excluded.size();
    j["excluded"] = rep.excluded;
    j["retained"] = rep.retained;
    j["median_kappa"] = rep.median_kappa;
    j["median_kappa_all"] = rep.median_kappa_all;
    nlohmann::json means = nlohmann::json::object();
    for (const auto &[who, k] : rep.mean_kappa) means[who] = k;
    j["mean_kappa"] = means;
    j["distribution"] = nlohmann::json::array();
    for (const auto &row : rep.distribution) {
        j["distribution"].push_back({{"kappa_above", row.threshold},
                                     {"pairs_above", row.pairs_above},
                                     {"pairs_total", row.pairs_total},
                                     {"share", row.share()}});
    }
    j["pairs"] = nlohmann::json::array();
    for (const auto &p : rep.pairs) j["pairs"].push_back({{"a", p.a}, {"b", p.b}, {"kappa", p.kappa}, {"items", p.items}});
    j["omitted_pairs"] = nlohmann::json::array();
    for (const auto &p : rep.omitted) j["omitted_pairs"].push_back({{"a", p.a}, {"b", p.b}, {"reason", p.reason}});
    return j;
}

// ---------------------------------------------------------------------------
// Ablations

inline void write_ablation_csv(std::ostream &out, const AblationReport &rep, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "metric,spearman_before,spearman_p_before,pearson_before,pearson_p_before,n_before,"
           "spearman_after,spearman_p_after,pearson_after,pearson_p_after,n_after\n";
    for (const auto &r : rep.rows) {
        const auto b = report::corr_cells(r.before);
        const auto a = report::corr_cells(r.after);
        out << report::field(r.before.label) << ',' << report::num(b.spearman) << ',' << report::num(b.spearman_p)
            << ',' << report::num(b.pearson) << ',' << report::num(b.pearson_p) << ',' << r.before.n << ','
            << report::num(a.spearman) << ',' << report::num(a.spearman_p) << ',' << report::num(a.pearson) << ','
            << report::num(a.pearson_p) << ',' << r.after.n << '\n';
    }
}

inline nlohmann::json ablation_json(const AblationReport &rep, const nlohmann::json &meta) {
    nlohmann::json j;
    j["meta"] = meta;
    j["stoplist_hash"] = rep.stoplist_hash;
    j["stoplist_size"] = rep.stoplist_size;
    j["cells_undefined_after_removal"] = rep.undefined_after;
    j["rows"] = nlohmann::json::array();
    for (const auto &r : rep.rows) {
        auto side = [](const CorrelationRow &x) {
            const auto c = report::corr_cells(x);
            return nlohmann::json{{"spearman", report::jnum(c.spearman)},
                                  {"spearman_p", report::jnum(c.spearman_p)},
                                  {"pearson", report::jnum(c.pearson)},
                                  {"pearson_p", report::jnum(c.pearson_p)},
                                  {"n", x.n},
                                  {"dropped_undefined", x.undefined}};
        };
        j["rows"].push_back({{"metric", r.before.label}, {"before", side(r.before)}, {"after", side(r.after)}});
    }
    return j;
}

inline void write_length_csv(std::ostream &out, const LengthEffectReport &rep, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "metric,mean_low,n_low,mean_high,n_high,p_value\n";
    for (const auto &r : rep.rows) {
        out << report::field(r.label) << ',';
        if (r.result) {
            out << report::num(r.result->mean_low) << ',' << r.result->n_low << ',' << report::num(r.result->mean_high)
                << ',' << r.result->n_high << ',' << report::num(r.result->p_value) << '\n';
        } else {
            out << "NA,0,NA,0,NA\n";
        }
    }
}

inline nlohmann::json length_json(const LengthEffectReport &rep, const nlohmann::json &meta) {
    static const char *names[] = {"both_inclusive", "low_inclusive", "high_inclusive"};
    nlohmann::json j;
    j["meta"] = meta;
    j["threshold"] = rep.threshold;
    j["boundary"] = names[static_cast<int>(rep.boundary)];
    j["rows"] = nlohmann::json::array();
    for (const auto &r : rep.rows) {
        nlohmann::json row{{"metric", r.label}};
        if (r.result) {
            row["mean_low"] = r.result->mean_low;
            row["n_low"] = r.result->n_low;
            row["mean_high"] = r.result->mean_high;
            row["n_high"] = r.result->n_high;
            row["p_value"] = r.result->p_value;
            row["p_method"] = to_string(r.result->p_method);
        } else {
            row["reason"] = r.reason;
        }
        j["rows"].push_back(row);
    }
    return j;
}

// ---------------------------------------------------------------------------
// Retrieval

struct RetrievalSummaryRow {
    std::string metric;
    std::size_t n = 0;
    std::optional<MeanCI> ci;
};

inline std::vector<RetrievalSummaryRow> summarize_retrieval(const std::vector<RetrievalRow> &rows,
                                                            const std::vector<Metric> &metrics) {
    std::vector<RetrievalSummaryRow> out;
    for (std::size_t c = 0; c < metrics.size(); ++c) {
        RetrievalSummaryRow s;
        s.metric = std::string(metric_label(metrics[c]));
        std::vector<double> v;
        for (const auto &r : rows) {
            if (c < r.scores.size() && r.scores[c].defined()) v.push_back(*r.scores[c].value);
        }
        s.n = v.size();
        if (v.size() >= 2) s.ci = ci95(v);
        out.push_back(std::move(s));
    }
    return out;
}

inline void write_retrieval_csv(std::ostream &out, const std::vector<RetrievalRow> &rows,
                                const std::vector<Metric> &metrics, const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "dialogue_id,source_id,similarity";
    for (Metric m : metrics) out << ',' << metric_id(m);
    out << '\n';
    for (const auto &r : rows) {
        out << report::field(r.dialogue_id) << ',';
        if (r.result.hit) {
            out << report::field(r.result.source_id) << ',' << report::num(r.result.hit->similarity);
        } else {
            out << ",NA:" << r.result.reason;
        }
        for (const auto &c : r.scores) out << ',' << report::cell_text(c);
        out << '\n';
    }
}

/// Per-metric mean with a 95% interval, as `0.650 ± 0.003`.
inline void write_retrieval_summary_csv(std::ostream &out, const std::vector<RetrievalSummaryRow> &rows,
                                        const nlohmann::json &meta) {
    report::config_line(out, meta);
    out << "metric,mean,ci95_halfwidth,n,display\n";
    for (const auto &s : rows) {
        out << report::field(s.metric) << ',';
        if (s.ci) {
            out << report::num(s.ci->mean) << ',' << report::num(s.ci->halfwidth) << ',' << s.n << ','
                << format_ci(*s.ci) << '\n';
        } else {
            out << "NA,NA," << s.n << ",NA\n";
        }
    }
}

inline nlohmann::json retrieval_json(const std::vector<RetrievalRow> &rows, const std::vector<Metric> &metrics,
                                     const nlohmann::json &meta) {
    nlohmann::json j;
    j["meta"] = meta;
    j["rows"] = nlohmann::json::array();
    for (const auto &r : rows) {
        nlohmann::json row{{"dialogue_id", r.dialogue_id}};
        if (r.result.hit) {
            row["source_id"] = r.result.source_id;
            row["similarity"] = r.result.hit->similarity;
            row["response"] = r.result.response;
        } else {
            row["undefined"] = r.result.reason;
        }
        nlohmann::json cells = nlohmann::json::object();
        for (std::size_t c = 0; c < r.scores.size() && c < metrics.size(); ++c) {
            const auto &cell = r.scores[c];
            cells[std::string(metric_id(metrics[c]))] =
                cell.defined() ? nlohmann::json(*cell.value) : nlohmann::json{{"undefined", cell.reason}};
        }
        row["scores"] = cells;
        j["rows"].push_back(row);
    }
    j["summary"] = nlohmann::json::array();
    for (const auto &s : summarize_retrieval(rows, metrics)) {
        nlohmann::json row{{"metric", s.metric}, {"n", s.n}};
        if (s.ci) {
            row["mean"] = s.ci->mean;
            row["ci95_halfwidth"] = s.ci->halfwidth;
            row["display"] = format_ci(*s.ci);
        }
        j["summary"].push_back(row);
    }
    return j;
}

} // namespace dialeval
