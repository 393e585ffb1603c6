#include "nmtlab/error.hpp"
#include "nmtlab/metrics.hpp"
#include "nmtlab/rng.hpp"

#include "oracles/ngram_bleu.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace nmtlab;
using metrics::Tokens;

namespace {

Tokens words(const std::string& s) {
    Tokens out;
    std::string cur;
    for (char c : s + " ") {
        if (c == ' ') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

std::vector<Tokens> random_corpus(Rng& rng, std::size_t n, std::size_t vocab, std::size_t max_len) {
    std::vector<Tokens> out(n);
    for (auto& s : out) {
        const std::size_t len = rng.below(max_len + 1);
        for (std::size_t i = 0; i < len; ++i) s.push_back("t" + std::to_string(rng.below(vocab)));
    }
    return out;
}

} // namespace

TEST(Bleu, Identity) {
    const std::vector<Tokens> c{words("a b c d"), words("the cat sat on the mat")};
    const auto r = metrics::corpus_bleu(c, c);
    EXPECT_EQ(r.score, 1.0);
    EXPECT_EQ(r.brevity_penalty, 1.0);
}

TEST(Bleu, HandExample) {
    const auto r = metrics::corpus_bleu({words("the cat sat on mat")}, {words("the cat sat on the mat")});
    EXPECT_DOUBLE_EQ(r.precisions[0], 1.0);
    EXPECT_DOUBLE_EQ(r.precisions[1], 3.0 / 4.0);
    EXPECT_DOUBLE_EQ(r.precisions[2], 2.0 / 3.0);
    EXPECT_DOUBLE_EQ(r.precisions[3], 1.0 / 2.0);
    EXPECT_DOUBLE_EQ(r.brevity_penalty, std::exp(-0.2));
    EXPECT_NEAR(r.score, 0.5789, 1e-3);
    const auto o = oracle::corpus_bleu({words("the cat sat on mat")}, {words("the cat sat on the mat")});
    EXPECT_NEAR(r.score, o.score, 1e-15);
}

TEST(Bleu, NoFourGramGivesZero) {
    EXPECT_EQ(metrics::corpus_bleu({words("a b c x e f")}, {words("a b c d e f")}).score, 0.0);
}

TEST(Bleu, Errors) {
    EXPECT_THROW(metrics::corpus_bleu({words("a")}, {}), DomainError);
    EXPECT_THROW(metrics::corpus_bleu({}, {}), DomainError);
}

TEST(Bleu, AllEmptyHypotheses) {
    const auto r = metrics::corpus_bleu({{}, {}}, {words("a b"), words("c")});
    EXPECT_EQ(r.score, 0.0);
    EXPECT_EQ(r.brevity_penalty, 0.0);
}

TEST(Bleu, ClippingCapsRepeatedUnigram) {
    for (int k = 0; k < 5; ++k) {
        Tokens hyp = words("the cat");
        for (int i = 0; i < k; ++i) hyp.push_back("the");
        EXPECT_LE(metrics::corpus_bleu({hyp}, {words("the cat sat")}).matches[0], 2u);
    }
}

TEST(BleuProperty, MatchesBruteForceCounter) {
    Rng rng(8);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + rng.below(6);
        const auto hyps = random_corpus(rng, n, 4, 12);
        const auto refs = random_corpus(rng, n, 4, 12);
        const auto r = metrics::corpus_bleu(hyps, refs);
        const auto o = oracle::corpus_bleu(hyps, refs);
        for (int k = 0; k < 4; ++k) ASSERT_NEAR(r.precisions[k], o.precisions[k], 1e-15);
        ASSERT_NEAR(r.brevity_penalty, o.bp, 1e-15);
        ASSERT_NEAR(r.score, o.score, 1e-12);
    }
}

TEST(BleuProperty, PermutationInvariant) {
    Rng rng(9);
    auto hyps = random_corpus(rng, 20, 5, 10);
    auto refs = random_corpus(rng, 20, 5, 10);
    const double before = metrics::corpus_bleu(hyps, refs).score;
    std::vector<std::size_t> idx(20);
    for (std::size_t i = 0; i < 20; ++i) idx[i] = i;
    rng.shuffle(idx);
    std::vector<Tokens> h2, r2;
    for (auto i : idx) {
        h2.push_back(hyps[i]);
        r2.push_back(refs[i]);
    }
    EXPECT_EQ(metrics::corpus_bleu(h2, r2).score, before);
}

TEST(BleuProperty, ShorteningNeverRaisesBrevityPenalty) {
    Rng rng(10);
    for (int trial = 0; trial < 100; ++trial) {
        auto hyps = random_corpus(rng, 5, 5, 10);
        const auto refs = random_corpus(rng, 5, 5, 10);
        for (auto& h : hyps) h.push_back("x");
        double bp = metrics::corpus_bleu(hyps, refs).brevity_penalty;
        for (auto& h : hyps) h.pop_back();
        EXPECT_LE(metrics::corpus_bleu(hyps, refs).brevity_penalty, bp);
    }
}

TEST(BleuProperty, SelfScoreIsOne) {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        auto c = random_corpus(rng, 6, 8, 10);
        for (auto& s : c)
            while (s.size() < 4) s.push_back("pad");
        EXPECT_EQ(metrics::corpus_bleu(c, c).score, 1.0);
    }
}
