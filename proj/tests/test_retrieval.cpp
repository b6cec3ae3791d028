#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "dialeval/retrieval.hpp"
#include "retrieval_oracle.hpp"

using namespace dialeval;

namespace {

Dialogue dlg(std::string id, std::vector<std::string> ctx, std::string rsp) {
    return {std::move(id), std::move(ctx), std::move(rsp)};
}

void expect_same_ranking(const std::vector<RankedItem> &got, const std::vector<oracle::Scored> &want) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t k = 0; k < got.size(); ++k) {
        EXPECT_EQ(got[k].index, want[k].index) << "rank " << k;
        EXPECT_EQ(got[k].similarity, want[k].similarity) << "rank " << k;
    }
}

} // namespace

TEST(SparseCosine, Examples) {
    SparseVector a, b, z;
    a.entries = {{0, 1.0}, {2, 2.0}};
    b.entries = {{0, 2.0}, {2, 4.0}};
    a.finish();
    b.finish();
    z.finish();
    EXPECT_NEAR(*sparse_cosine(a, b), 1.0, 1e-15);
    SparseVector c;
    c.entries = {{1, 3.0}};
    c.finish();
    EXPECT_EQ(*sparse_cosine(a, c), 0.0);
    EXPECT_FALSE(sparse_cosine(a, z));
}

TEST(TfIdf, HandComputedWeights) {
    // "cat" appears in 1 of 3 dialogues, "the" in all 3
    const Corpus c{dlg("1", {"the cat the cat"}, "the"), dlg("2", {"the dog"}, "ok"), dlg("3", {"the"}, "no")};
    const auto m = fit_tfidf(c);
    const auto cat = *m.index_of("cat");
    EXPECT_NEAR(m.idf(cat, RetrievalMode::context), std::log(3.0), 1e-15);
    EXPECT_EQ(m.idf(*m.index_of("the"), RetrievalMode::context), 0.0);
    ASSERT_EQ(m.context_vectors[0].entries.size(), 1u);
    EXPECT_NEAR(m.context_vectors[0].entries[0].second, 2 * std::log(3.0), 1e-15);
    EXPECT_TRUE(m.response_vectors[0].entries.empty());
}

TEST(TfIdf, FieldScopeSeparatesTables) {
    const Corpus c{dlg("1", {"alpha beta"}, "alpha"), dlg("2", {"gamma"}, "beta"), dlg("3", {"gamma"}, "delta")};
    const auto d = fit_tfidf(c, {}, DfScope::dialogue);
    const auto f = fit_tfidf(c, {}, DfScope::field);
    const auto alpha = *d.index_of("alpha");
    EXPECT_EQ(d.df_context[alpha], 1u);
    EXPECT_EQ(d.df_context, d.df_response);
    EXPECT_EQ(f.df_context[*f.index_of("beta")], 1u);
    EXPECT_EQ(f.df_response[*f.index_of("beta")], 1u);
    EXPECT_EQ(f.df_response[*f.index_of("gamma")], 0u);
    EXPECT_EQ(d.df_context[*d.index_of("beta")], 2u);
}

TEST(TfIdf, EmptyCorpusRejected) { EXPECT_THROW(fit_tfidf({}), ValidationError); }

TEST(Retrieve, SelfRetrievalIsExactlyOne) {
    const auto corpus = oracle::synthetic_corpus(60, 2);
    const auto m = fit_tfidf(corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto r = retrieve(m, corpus[i].context, RetrievalMode::context);
        if (!r.hit) continue;
        EXPECT_EQ(r.hit->similarity, 1.0);
    }
}

TEST(Retrieve, MatchesBruteForceScan) {
    const auto corpus = oracle::synthetic_corpus(100, 7);
    const auto m = fit_tfidf(corpus);
    const oracle::BruteForce bf(corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (bool ctx : {true, false}) {
            const auto mode = ctx ? RetrievalMode::context : RetrievalMode::response;
            const auto want = bf.scan(corpus[i].context, ctx, i);
            try {
                expect_same_ranking(rank(m, tokenize_turns(corpus[i].context, {}), mode, i), want);
            } catch (const UndefinedScore &e) {
                EXPECT_EQ(e.reason(), reason::kZeroQuery);
            }
        }
    }
}

TEST(Retrieve, ExclusionNeverReturnsExcludedId) {
    const auto corpus = oracle::synthetic_corpus(80, 3);
    const auto m = fit_tfidf(corpus);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        for (auto mode : {RetrievalMode::context, RetrievalMode::response}) {
            const auto r = retrieve(m, corpus[i].context, mode, i);
            if (r.hit) {
                EXPECT_NE(r.source_id, corpus[i].id);
            }
        }
    }
}

TEST(Retrieve, DuplicatedContextReturnsDuplicateResponse) {
    const Corpus c{dlg("a", {"how do i mount the disk"}, "use the mount command"),
                   dlg("b", {"wifi card not found"}, "install the driver"),
                   dlg("c", {"how do i mount the disk"}, "check fstab first"),
                   dlg("d", {"sound is broken"}, "try alsamixer")};
    const auto m = fit_tfidf(c);
    const auto r = retrieve(m, c[0].context, RetrievalMode::context, 0);
    ASSERT_TRUE(r.hit);
    EXPECT_EQ(r.source_id, "c");
    EXPECT_EQ(r.response, "check fstab first");
    EXPECT_EQ(r.hit->similarity, 1.0);
}

TEST(Retrieve, TieBreakIsLowestIndex) {
    const Corpus c{dlg("q", {"alpha"}, "zero"), dlg("x", {"alpha beta"}, "one"), dlg("y", {"alpha beta"}, "two"),
                   dlg("z", {"gamma"}, "three")};
    const auto m = fit_tfidf(c);
    const auto r = retrieve(m, c[0].context, RetrievalMode::context, 0);
    ASSERT_TRUE(r.hit);
    EXPECT_EQ(r.source_id, "x");
}

TEST(Retrieve, ZeroQueryAndNoCandidates) {
    const Corpus c{dlg("1", {"alpha"}, "beta"), dlg("2", {"gamma"}, "delta")};
    const auto m = fit_tfidf(c);
    const auto unknown = retrieve(m, std::vector<std::string>{"nothing known"}, RetrievalMode::context);
    EXPECT_FALSE(unknown.hit);
    EXPECT_EQ(unknown.reason, reason::kZeroQuery);
    // an orthogonal document is still a candidate
    const auto orth = retrieve(m, c[0].context, RetrievalMode::context, 0);
    ASSERT_TRUE(orth.hit);
    EXPECT_EQ(orth.hit->similarity, 0.0);
    // a document with no weighted terms is not
    const Corpus e{dlg("1", {"alpha"}, "beta"), dlg("2", {""}, "delta")};
    const auto none = retrieve(fit_tfidf(e), e[0].context, RetrievalMode::context, 0);
    EXPECT_FALSE(none.hit);
    EXPECT_EQ(none.reason, reason::kNoCandidates);
}

TEST(Evaluate, SingleDialogueCorpusIsUndefined) {
    const Corpus c{dlg("only", {"hello there"}, "hi")};
    MetricSuite suite;
    suite.metrics = {Metric::bleu1, Metric::rouge_l};
    const auto rows = evaluate_retrieval(fit_tfidf(c), c, RetrievalMode::context, suite);
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_FALSE(rows[0].result.hit);
    for (const auto &cell : rows[0].scores) EXPECT_FALSE(cell.defined());
}

TEST(Evaluate, DuplicatedCorpusScoresOne) {
    Corpus c;
    for (int i = 0; i < 5; ++i) c.push_back(dlg(std::to_string(i), {"is the kernel updated"}, "yes it is updated now"));
    c.push_back(dlg("other", {"totally different words"}, "nope"));
    MetricSuite suite;
    suite.metrics = {Metric::meteor, Metric::bleu1, Metric::bleu2, Metric::bleu3, Metric::bleu4, Metric::rouge_l};
    const auto rows = evaluate_retrieval(fit_tfidf(c), c, RetrievalMode::context, suite);
    for (std::size_t i = 0; i < 5; ++i) {
        ASSERT_TRUE(rows[i].result.hit);
        for (std::size_t k = 1; k < suite.metrics.size(); ++k) EXPECT_EQ(*rows[i].scores[k].value, 1.0);
        EXPECT_GT(*rows[i].scores[0].value, 0.9);
    }
}

TEST(Evaluate, ToyCorpusScoreTable) {
    // contexts pair up: 0 <-> 1 and 2 <-> 3
    const Corpus c{dlg("0", {"grub boot error"}, "reinstall grub"), dlg("1", {"grub boot fails"}, "reinstall grub now"),
                   dlg("2", {"wifi card driver"}, "install firmware"), dlg("3", {"wifi driver missing"}, "firmware")};
    MetricSuite suite;
    suite.metrics = {Metric::bleu1, Metric::rouge_l};
    const auto rows = evaluate_retrieval(fit_tfidf(c), c, RetrievalMode::context, suite);
    const std::vector<std::string> src{"1", "0", "3", "2"};
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(rows[i].result.source_id, src[i]);
    // 0: ref "reinstall grub", hyp "reinstall grub now": p1 = 2/3, c > r so bp = 1
    EXPECT_NEAR(*rows[0].scores[0].value, 2.0 / 3.0, 1e-12);
    // rouge: lcs 2, P = 2/3, R = 1, F = 2PR/(P+R) = 0.8
    EXPECT_NEAR(*rows[0].scores[1].value, 0.8, 1e-12);
    // 1: ref "reinstall grub now", hyp "reinstall grub": p1 = 1, bp = exp(1 - 3/2)
    EXPECT_NEAR(*rows[1].scores[0].value, std::exp(-0.5), 1e-12);
    EXPECT_NEAR(*rows[1].scores[1].value, 0.8, 1e-12);
    // 3: ref "firmware", hyp "install firmware": p1 = 1/2, bp = 1
    EXPECT_NEAR(*rows[3].scores[0].value, 0.5, 1e-12);
}

TEST(Index, RoundTripPreservesRankings) {
    const auto corpus = oracle::synthetic_corpus(40, 9);
    const auto m = fit_tfidf(corpus, {}, DfScope::field);
    const auto path = (std::filesystem::temp_directory_path() / "dialeval_index.json").string();
    save_index(m, path);
    const auto back = load_index(path);
    std::filesystem::remove(path);
    EXPECT_EQ(back.vocabulary, m.vocabulary);
    EXPECT_EQ(back.df_scope, DfScope::field);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto a = retrieve(m, corpus[i].context, RetrievalMode::response, i);
        const auto b = retrieve(back, corpus[i].context, RetrievalMode::response, i);
        EXPECT_EQ(a.source_id, b.source_id);
        if (a.hit) {
            EXPECT_EQ(a.hit->similarity, b.hit->similarity);
        }
    }
}

TEST(Index, RejectsMalformed) {
    EXPECT_THROW(index_from_json(nlohmann::json::object()), ValidationError);
    auto j = index_to_json(fit_tfidf(oracle::synthetic_corpus(3, 1)));
    j["version"] = 99;
    EXPECT_THROW(index_from_json(j), ValidationError);
    EXPECT_THROW(load_index("/nonexistent/index.json"), ValidationError);
    EXPECT_EQ(parse_retrieval_mode("C-TFIDF"), RetrievalMode::context);
    EXPECT_THROW(parse_retrieval_mode("bm25"), ValidationError);
}
