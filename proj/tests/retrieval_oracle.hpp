#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "dialeval/retrieval.hpp"

namespace oracle {

// Synthetic corpus over a small vocabulary so that many terms are shared.
inline dialeval::Corpus synthetic_corpus(std::size_t n, std::uint64_t seed) {
    static const std::vector<std::string> words = {
        "hello", "ubuntu", "install", "driver", "kernel", "boot", "grub",  "apt",  "sudo",  "update",
        "thanks", "error", "wifi",    "card",   "sound",  "disk", "mount", "file", "where", "how",
        "what",  "the",   "a",       "it",     "works",  "now",  "try",   "lol",  "yes",   "no"};
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, words.size() - 1);
    std::uniform_int_distribution<int> len(1, 8), turns(1, 3);
    auto sentence = [&] {
        std::string s;
        for (int k = len(rng); k > 0; --k) s += (s.empty() ? "" : " ") + words[pick(rng)];
        return s;
    };
    dialeval::Corpus c;
    for (std::size_t i = 0; i < n; ++i) {
        dialeval::Dialogue d;
        d.id = "d" + std::to_string(i);
        for (int t = turns(rng); t > 0; --t) d.context.push_back(sentence());
        d.response = sentence();
        c.push_back(d);
    }
    return c;
}

struct Scored {
    std::size_t index;
    double similarity;
};

// Dense TF-IDF built directly from the definition: weight = count * ln(N / df),
// df counted over whole dialogues; cosine scan over every other document.
class BruteForce {
  public:
    explicit BruteForce(const dialeval::Corpus &corpus, const dialeval::TokenizerConfig &cfg = {}) : cfg_(cfg) {
        std::set<std::string> vocab;
        for (const auto &d : corpus) {
            ctx_.push_back(words(d.context));
            rsp_.push_back(words({d.response}));
            for (const auto &w : ctx_.back()) vocab.insert(w);
            for (const auto &w : rsp_.back()) vocab.insert(w);
        }
        vocab_.assign(vocab.begin(), vocab.end());
        for (const auto &w : vocab_) {
            std::size_t df = 0;
            for (std::size_t i = 0; i < corpus.size(); ++i) {
                const bool in = std::count(ctx_[i].begin(), ctx_[i].end(), w) > 0 ||
                                std::count(rsp_[i].begin(), rsp_[i].end(), w) > 0;
                df += in;
            }
            idf_.push_back(std::log(double(corpus.size()) / double(df)));
        }
    }

    std::vector<Scored> scan(const std::vector<std::string> &query_turns, bool context_mode,
                             std::optional<std::size_t> exclude) const {
        const auto q = dense(words(query_turns));
        std::vector<Scored> out;
        const auto &docs = context_mode ? ctx_ : rsp_;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            if (exclude && *exclude == i) continue;
            const auto d = dense(docs[i]);
            double dot = 0, nq = 0, nd = 0;
            for (std::size_t k = 0; k < q.size(); ++k) {
                dot += q[k] * d[k];
                nq += q[k] * q[k];
                nd += d[k] * d[k];
            }
            if (nq == 0 || nd == 0) continue;
            out.push_back({i, std::clamp(dot / std::sqrt(nq * nd), -1.0, 1.0)});
        }
        std::stable_sort(out.begin(), out.end(),
                         [](const Scored &a, const Scored &b) { return a.similarity > b.similarity; });
        return out;
    }

  private:
    std::vector<std::string> words(const std::vector<std::string> &turns) const {
        std::vector<std::string> out;
        for (const auto &t : turns) {
            for (const auto &w : dialeval::tokenize(t, cfg_)) out.push_back(w);
        }
        return out;
    }

    std::vector<double> dense(const std::vector<std::string> &toks) const {
        std::vector<double> v(vocab_.size(), 0.0);
        for (std::size_t k = 0; k < vocab_.size(); ++k) {
            const auto c = std::count(toks.begin(), toks.end(), vocab_[k]);
            v[k] = double(c) * idf_[k];
        }
        return v;
    }

    dialeval::TokenizerConfig cfg_;
    std::vector<std::vector<std::string>> ctx_, rsp_;
    std::vector<std::string> vocab_;
    std::vector<double> idf_;
};

} // namespace oracle
