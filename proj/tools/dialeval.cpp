// dialeval: command-line front end for scoring, correlation, agreement,
// ablation, retrieval and scatter export.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dialeval/harness.hpp"
#include "dialeval/report.hpp"
#include "dialeval/retrieval.hpp"

namespace {

using namespace dialeval;

// Flags that override the config file; unset flags leave it alone.
struct Overrides {
    std::string config_path;
    std::optional<std::string> metrics;
    std::optional<std::string> embeddings;
    std::optional<std::string> embeddings_format;
    std::optional<std::string> synonyms;
    std::optional<std::string> stopwords;
    std::optional<std::uint64_t> seed;
    std::optional<bool> lowercase;
    std::optional<bool> strip_punct;
    std::optional<double> bleu_epsilon;
    std::optional<std::string> short_orders;
    std::optional<double> meteor_alpha;
    std::optional<double> meteor_gamma;
    std::optional<double> meteor_beta;
    std::optional<double> rouge_beta;
    std::optional<std::string> p_method;
    std::optional<std::size_t> permutations;
    std::optional<std::string> kappa_weighting;
    std::optional<double> exclusion_threshold;
    std::optional<bool> exclusion;
    std::optional<std::string> aggregation;
    std::optional<std::size_t> length_threshold;
    std::optional<std::string> length_boundary;
    std::optional<std::size_t> half_repeats;
    std::optional<bool> human_row;
    std::optional<bool> random_baseline;
    std::optional<std::string> mode;
    std::optional<std::string> df_scope;
    std::optional<std::string> dataset_name;
};

struct Outputs {
    std::string csv;
    std::string json;
};

void add_config_flags(CLI::App *app, Overrides &o) {
    app->add_option("--config", o.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--metrics", o.metrics, "comma-separated metric ids (greedy,average,extrema,meteor,bleu1..bleu4,rouge_l)");
    app->add_option("--embeddings", o.embeddings, "word embedding file");
    app->add_option("--embeddings-format", o.embeddings_format, "text or binary");
    app->add_option("--synonyms", o.synonyms, "METEOR synonym lexicon");
    app->add_option("--stopwords", o.stopwords, "stopword file (default: bundled list)");
    app->add_option("--seed", o.seed, "random seed");
    app->add_option("--lowercase", o.lowercase, "lowercase tokens (true/false)");
    app->add_option("--strip-punct", o.strip_punct, "drop punctuation tokens (true/false)");
    app->add_option("--bleu-epsilon", o.bleu_epsilon, "BLEU smoothing epsilon (0 disables)");
    app->add_option("--short-orders", o.short_orders, "skip, zero or undefined");
    app->add_option("--meteor-alpha", o.meteor_alpha);
    app->add_option("--meteor-gamma", o.meteor_gamma);
    app->add_option("--meteor-beta", o.meteor_beta);
    app->add_option("--rouge-beta", o.rouge_beta);
    app->add_option("--p-method", o.p_method, "t_approx or permutation");
    app->add_option("--permutations", o.permutations, "Monte Carlo permutation samples");
    app->add_option("--kappa-weighting", o.kappa_weighting, "linear or quadratic");
    app->add_option("--exclusion-threshold", o.exclusion_threshold, "minimum mean pairwise kappa");
    app->add_option("--exclusion", o.exclusion, "drop low-agreement annotators (true/false)");
    app->add_option("--aggregation", o.aggregation, "mean or median");
    app->add_option("--length-threshold", o.length_threshold);
    app->add_option("--length-boundary", o.length_boundary, "both_inclusive, low_inclusive or high_inclusive");
    app->add_option("--half-repeats", o.half_repeats, "random annotator splits for the Human row");
    app->add_option("--human-row", o.human_row, "add the split-half Human row (true/false)");
    app->add_option("--random-baseline", o.random_baseline, "add a random ground-truth candidate (true/false)");
    app->add_option("--mode", o.mode, "C-TFIDF or R-TFIDF");
    app->add_option("--df-scope", o.df_scope, "dialogue or field");
    app->add_option("--dataset-name", o.dataset_name);
}

void add_outputs(CLI::App *app, Outputs &out) {
    app->add_option("--csv", out.csv, "CSV report path (default: stdout)");
    app->add_option("--json", out.json, "JSON report path");
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

RunConfig build_config(const Overrides &o) {
    RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
    nlohmann::json j = c.to_json();
    if (o.metrics) j["metrics"] = split_list(*o.metrics);
    if (o.embeddings) j["embeddings"]["path"] = *o.embeddings;
    if (o.embeddings_format) j["embeddings"]["format"] = *o.embeddings_format;
    if (o.synonyms) j["synonyms_path"] = *o.synonyms;
    if (o.stopwords) j["stopwords_path"] = *o.stopwords;
    if (o.seed) j["seed"] = *o.seed;
    if (o.lowercase) j["tokenizer"]["lowercase"] = *o.lowercase;
    if (o.strip_punct) j["tokenizer"]["strip_punctuation"] = *o.strip_punct;
    if (o.bleu_epsilon) j["bleu"]["smoothing_epsilon"] = *o.bleu_epsilon;
    if (o.short_orders) j["bleu"]["short_orders"] = *o.short_orders;
    if (o.meteor_alpha) j["meteor"]["alpha"] = *o.meteor_alpha;
    if (o.meteor_gamma) j["meteor"]["gamma"] = *o.meteor_gamma;
    if (o.meteor_beta) j["meteor"]["beta_frag"] = *o.meteor_beta;
    if (o.rouge_beta) j["rouge_beta"] = *o.rouge_beta;
    if (o.p_method) j["p_values"]["method"] = *o.p_method;
    if (o.permutations) j["p_values"]["samples"] = *o.permutations;
    if (o.kappa_weighting) j["kappa_weighting"] = *o.kappa_weighting;
    if (o.exclusion_threshold) j["exclusion_threshold"] = *o.exclusion_threshold;
    if (o.exclusion) j["apply_exclusion"] = *o.exclusion;
    if (o.aggregation) j["human_aggregation"] = *o.aggregation;
    if (o.length_threshold) j["length_threshold"] = *o.length_threshold;
    if (o.length_boundary) j["length_boundary"] = *o.length_boundary;
    if (o.half_repeats) j["half_split_repeats"] = *o.half_repeats;
    if (o.human_row) j["human_row"] = *o.human_row;
    if (o.random_baseline) j["random_baseline"] = *o.random_baseline;
    if (o.mode) j["retrieval_mode"] = *o.mode;
    if (o.df_scope) j["df_scope"] = *o.df_scope;
    if (o.dataset_name) j["dataset_name"] = *o.dataset_name;
    return RunConfig::from_json(j);
}

// Writes the CSV to --csv (or stdout when neither output is given) and the
// JSON to --json.
template <typename CsvFn>
void emit(const Outputs &out, CsvFn &&csv, const nlohmann::json &json) {
    if (!out.csv.empty()) {
        std::ofstream f(out.csv, std::ios::binary);
        if (!f) throw Error("cannot write " + out.csv);
        csv(f);
    } else if (out.json.empty()) {
        csv(std::cout);
    }
    if (!out.json.empty()) {
        std::ofstream f(out.json, std::ios::binary);
        if (!f) throw Error("cannot write " + out.json);
        report::write_json(f, json);
    }
}

std::vector<DialogueExample> dataset_for(const std::string &path, const RunConfig &cfg) {
    auto ds = load_dataset(path);
    if (cfg.random_baseline) ds = with_random_baseline(std::move(ds), cfg.seed, cfg.random_candidate_id);
    return ds;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Word-overlap and embedding metrics for dialogue responses, with human-correlation analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "dialeval 1.0.0");

    Overrides o;
    Outputs out;
    std::string dataset_path, ratings_path, matrix_path, scatter_metric, scatter_out, ablation_kind;
    std::string index_in, index_out, pairs_csv, summary_csv, query;
    unsigned threads = 0;

    auto *score = app.add_subcommand("score", "score every candidate of a dataset");
    score->add_option("--dataset", dataset_path, "dataset JSONL")->required()->check(CLI::ExistingFile);
    score->add_option("--threads", threads, "worker threads (0: all cores)");
    add_config_flags(score, o);
    add_outputs(score, out);

    auto *corr = app.add_subcommand("correlate", "correlate metric scores with human ratings");
    auto *corr_ds = corr->add_option("--dataset", dataset_path, "dataset JSONL")->check(CLI::ExistingFile);
    auto *corr_mx = corr->add_option("--matrix", matrix_path, "score matrix CSV from `score`")->check(CLI::ExistingFile);
    corr_ds->excludes(corr_mx);
    corr->add_option("--ratings", ratings_path, "ratings CSV")->required()->check(CLI::ExistingFile);
    corr->add_option("--threads", threads, "worker threads (0: all cores)");
    add_config_flags(corr, o);
    add_outputs(corr, out);

    auto *agree = app.add_subcommand("agreement", "pairwise weighted kappa and annotator exclusion");
    agree->add_option("--ratings", ratings_path, "ratings CSV")->required()->check(CLI::ExistingFile);
    agree->add_option("--pairs-csv", pairs_csv, "also write per-pair kappa values");
    add_config_flags(agree, o);
    add_outputs(agree, out);

    auto *abl = app.add_subcommand("ablate", "stopword removal or length-bucket analysis");
    abl->add_option("kind", ablation_kind, "stopwords or length")->required()->check(CLI::IsMember({"stopwords", "length"}));
    abl->add_option("--dataset", dataset_path, "dataset JSONL")->required()->check(CLI::ExistingFile);
    abl->add_option("--ratings", ratings_path, "ratings CSV")->required()->check(CLI::ExistingFile);
    add_config_flags(abl, o);
    add_outputs(abl, out);

    auto *ret = app.add_subcommand("retrieve", "TF-IDF nearest-neighbour response retrieval");
    auto *ret_ds = ret->add_option("--dataset", dataset_path, "corpus JSONL")->check(CLI::ExistingFile);
    auto *ret_ix = ret->add_option("--index", index_in, "load a saved index instead of fitting")->check(CLI::ExistingFile);
    ret_ds->excludes(ret_ix);
    ret->add_option("--save-index", index_out, "write the fitted index");
    ret->add_option("--query", query, "retrieve for one context (turns separated by ' | ')");
    ret->add_option("--summary-csv", summary_csv, "per-metric mean and 95% interval");
    add_config_flags(ret, o);
    add_outputs(ret, out);

    auto *sc = app.add_subcommand("scatter", "export (human, metric) pairs for plotting");
    auto *sc_ds = sc->add_option("--dataset", dataset_path, "dataset JSONL")->check(CLI::ExistingFile);
    auto *sc_mx = sc->add_option("--matrix", matrix_path, "score matrix CSV")->check(CLI::ExistingFile);
    sc_ds->excludes(sc_mx);
    sc->add_option("--ratings", ratings_path, "ratings CSV")->required()->check(CLI::ExistingFile);
    sc->add_option("--metric", scatter_metric, "metric id")->required();
    sc->add_option("--out", scatter_out, "output CSV")->required();
    add_config_flags(sc, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = build_config(o);
        // Only load what the subcommand needs.
        const bool scoring = score->parsed() || abl->parsed() || (ret->parsed() && query.empty()) ||
                             ((corr->parsed() || sc->parsed()) && matrix_path.empty());
        if ((corr->parsed() || sc->parsed()) && matrix_path.empty() && dataset_path.empty())
            throw ValidationError("either --dataset or --matrix is required");
        // Subcommands that do not score skip loading embeddings and lexicons.
        RunConfig load_cfg = cfg;
        if (!scoring) {
            load_cfg.metrics = {Metric::bleu1};
            load_cfg.embeddings_path.clear();
            load_cfg.synonyms_path.clear();
        }
        Resources res = load_resources(load_cfg);
        cfg.meteor = load_cfg.meteor;
        const auto meta = report_meta(cfg, res);
        const auto suite = res.suite(cfg);

        auto matrix_for = [&]() -> ScoreMatrix {
            if (!matrix_path.empty()) return load_score_matrix(matrix_path);
            return score_all(dataset_for(dataset_path, cfg), suite, cfg.tokenizer, {}, threads);
        };

        if (score->parsed()) {
            const auto m = matrix_for();
            emit(out, [&](std::ostream &s) { write_score_matrix_csv(s, m, meta); }, score_matrix_json(m, meta));
        } else if (corr->parsed()) {
            const auto m = matrix_for();
            const auto ratings = load_ratings(ratings_path);
            const auto rep = correlate_with_ratings(m, ratings, cfg);
            emit(out, [&](std::ostream &s) { write_correlation_csv(s, rep, meta); }, correlation_json(rep, meta));
        } else if (agree->parsed()) {
            const auto ratings = load_ratings(ratings_path);
            const auto rep = agreement_report(ratings, cfg.exclusion_threshold, cfg.kappa_weighting);
            if (!pairs_csv.empty()) {
                std::ofstream f(pairs_csv, std::ios::binary);
                if (!f) throw Error("cannot write " + pairs_csv);
                write_agreement_pairs_csv(f, rep, meta);
            }
            emit(out, [&](std::ostream &s) { write_agreement_csv(s, rep, meta); }, agreement_json(rep, meta));
        } else if (abl->parsed()) {
            const auto ds = dataset_for(dataset_path, cfg);
            const auto ratings = load_ratings(ratings_path);
            const auto human = human_scores(ratings, cfg);
            if (ablation_kind == "stopwords") {
                const auto rep = ablate_stopwords(ds, suite, cfg.tokenizer, res.stoplist, human, cfg.p_values);
                emit(out, [&](std::ostream &s) { write_ablation_csv(s, rep, meta); }, ablation_json(rep, meta));
            } else {
                const auto m = score_all(ds, suite, cfg.tokenizer);
                LengthBucketOptions lo;
                lo.boundary = cfg.length_boundary;
                lo.p = cfg.p_values;
                const auto rep = length_effect(m, human, cfg.length_threshold, lo);
                emit(out, [&](std::ostream &s) { write_length_csv(s, rep, meta); }, length_json(rep, meta));
            }
        } else if (ret->parsed()) {
            if (dataset_path.empty() && index_in.empty()) throw ValidationError("either --dataset or --index is required");
            const Corpus corpus = dataset_path.empty() ? Corpus{} : to_corpus(load_dataset(dataset_path));
            const TfIdfModel model =
                index_in.empty() ? fit_tfidf(corpus, cfg.tokenizer, cfg.df_scope) : load_index(index_in);
            if (!index_out.empty()) save_index(model, index_out);
            if (!query.empty()) {
                std::vector<std::string> turns;
                std::string::size_type pos = 0;
                while (true) {
                    const auto next = query.find(" | ", pos);
                    turns.push_back(query.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
                    if (next == std::string::npos) break;
                    pos = next + 3;
                }
                const auto r = retrieve(model, turns, cfg.retrieval_mode);
                if (!r.hit) {
                    std::printf("NA:%s\n", r.reason.c_str());
                    return 0;
                }
                std::printf("%s\t%.10g\t%s\n", r.source_id.c_str(), r.hit->similarity, r.response.c_str());
                return 0;
            }
            if (corpus.empty()) throw ValidationError("leave-one-out evaluation needs --dataset");
            const auto rows = evaluate_retrieval(model, corpus, cfg.retrieval_mode, suite, cfg.tokenizer);
            if (!summary_csv.empty()) {
                std::ofstream f(summary_csv, std::ios::binary);
                if (!f) throw Error("cannot write " + summary_csv);
                write_retrieval_summary_csv(f, summarize_retrieval(rows, suite.metrics), meta);
            }
            emit(out, [&](std::ostream &s) { write_retrieval_csv(s, rows, suite.metrics, meta); },
                 retrieval_json(rows, suite.metrics, meta));
        } else if (sc->parsed()) {
            const Metric metric = parse_metric(scatter_metric);
            if (matrix_path.empty() &&
                std::find(cfg.metrics.begin(), cfg.metrics.end(), metric) == cfg.metrics.end())
                throw ValidationError("metric '" + scatter_metric + "' is not selected");
            const auto m = matrix_for();
            const auto ratings = load_ratings(ratings_path);
            const auto s = export_scatter(m, human_scores(ratings, cfg), metric, scatter_out);
            std::fprintf(stderr, "%zu rows written, %zu undefined, %zu unrated\n", s.written, s.undefined, s.unrated);
        }
    } catch (const ValidationError &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
