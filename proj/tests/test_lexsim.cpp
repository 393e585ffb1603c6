#include "nmtlab/error.hpp"
#include "nmtlab/lexsim.hpp"
#include "nmtlab/rng.hpp"

#include "oracles/edit_script.hpp"

#include <gtest/gtest.h>

#include <algorithm>

using namespace nmtlab;
using namespace nmtlab::lexsim;

namespace {

std::u32string random_string(Rng& rng, std::size_t max_len, char32_t alphabet) {
    std::u32string s(rng.below(max_len + 1), U'a');
    for (auto& c : s) c = U'a' + static_cast<char32_t>(rng.below(alphabet));
    return s;
}

// Every string over {a, b, c} of length <= max_len.
std::vector<std::u32string> all_strings(std::size_t max_len) {
    std::vector<std::u32string> out{U""};
    for (std::size_t begin = 0; out.back().size() < max_len;) {
        const std::size_t end = out.size();
        for (std::size_t i = begin; i < end; ++i)
            for (char32_t c : {U'a', U'b', U'c'}) out.push_back(out[i] + c);
        begin = end;
    }
    return out;
}

std::string text_of(const std::u32string& s) { return std::string(s.begin(), s.end()); }

corpus::ParallelCorpus corpus_of(std::vector<std::pair<std::string, std::string>> pairs) {
    corpus::ParallelCorpus c;
    for (auto& [s, t] : pairs) c.pairs.push_back({{s}, {t}, {}});
    return c;
}

} // namespace

TEST(EditDistance, Examples) {
    EXPECT_EQ(edit_distance(U"abc", U"abc"), 0u);
    EXPECT_EQ(edit_distance(U"", U"abc"), 3u);
    EXPECT_EQ(edit_distance(U"kitten", U"sitting"), oracle::edit_distance(U"kitten", U"sitting"));
    EXPECT_EQ(edit_distance(U"kitten", U"sitting"), 3u);
    EXPECT_EQ(edit_distance_fast(U"", U""), 0u);
}

TEST(EditDistance, CountsScalarsNotBytes) {
    EXPECT_EQ(distance_utf8("caf\xC3\xA9", "cafe").raw, 1u);
    EXPECT_DOUBLE_EQ(distance_utf8("caf\xC3\xA9", "cafe").normalized, 0.25);
}

TEST(EditDistance, MatchesExhaustiveOracleUpTo5) {
    const auto strings = all_strings(5);
    for (const auto& a : strings)
        for (const auto& b : strings) ASSERT_EQ(edit_distance(a, b), oracle::edit_distance(a, b));
}

TEST(EditDistance, FastEqualsDpOnAllShortPairs) {
    const auto strings = all_strings(6);
    for (const auto& a : strings)
        for (const auto& b : strings) ASSERT_EQ(edit_distance_fast(a, b), edit_distance(a, b));
}

TEST(EditDistance, FastEqualsDpAcrossBlockBoundaries) {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_string(rng, 300, 1 + rng.below(26));
        const auto b = random_string(rng, 300, 1 + rng.below(26));
        ASSERT_EQ(edit_distance_fast(a, b), edit_distance(a, b)) << a.size() << " x " << b.size();
    }
    for (std::size_t n : {63u, 64u, 65u, 127u, 128u, 129u}) {
        const std::u32string a(n, U'x');
        std::u32string b = a;
        b[n / 2] = U'y';
        EXPECT_EQ(edit_distance_fast(a, b), 1u);
        EXPECT_EQ(edit_distance_fast(a, U""), n);
    }
}

TEST(EditDistanceProperty, SymmetryAndTriangle) {
    Rng rng(11);
    for (int i = 0; i < 3000; ++i) {
        const auto a = random_string(rng, 40, 4), b = random_string(rng, 40, 4), c = random_string(rng, 40, 4);
        const auto ab = edit_distance(a, b), bc = edit_distance(b, c), ac = edit_distance(a, c);
        ASSERT_EQ(ab, edit_distance(b, a));
        ASSERT_LE(ac, ab + bc);
        ASSERT_LE(ab, std::max(a.size(), b.size()));
    }
}

TEST(Normalized, Examples) {
    EXPECT_EQ(normalized_distance(U"abc", U"abc"), 0.0);
    EXPECT_EQ(normalized_distance(U"", U""), 0.0);
    EXPECT_DOUBLE_EQ(normalized_distance(U"", U"abc"), 2.0);
    EXPECT_NEAR(normalized_distance(U"kitten", U"sitting"), 3.0 / 6.5, 1e-15);
}

TEST(NormalizedProperty, RangeAndZeroIffEqual) {
    Rng rng(12);
    for (int i = 0; i < 2000; ++i) {
        const auto a = random_string(rng, 8, 2), b = random_string(rng, 8, 2);
        const double d = normalized_distance(a, b);
        ASSERT_GE(d, 0.0);
        ASSERT_LE(d, 2.0);
        ASSERT_EQ(d == 0.0, a == b);
    }
}

TEST(CorpusDistance, Examples) {
    EXPECT_EQ(corpus_distance(corpus_of({{"abc", "abc"}, {"xy", "xy"}}), Mode::mean).normalized, 0.0);
    EXPECT_NEAR(corpus_distance(corpus_of({{"abc", "abd"}}), Mode::mean).normalized, 1.0 / 3.0, 1e-15);
    // 1 edit over mean length 5 (0.2) and 3 edits over mean length 5 (0.6)
    const auto c = corpus_of({{"abcde", "abcdx"}, {"abcde", "axyze"}});
    EXPECT_NEAR(corpus_distance(c, Mode::mean).normalized, 0.4, 1e-15);
    EXPECT_EQ(corpus_distance(c, Mode::mean).raw_total, 4u);
}

TEST(CorpusDistance, TokensJoinedWithSpaces) {
    corpus::ParallelCorpus c;
    c.pairs.push_back({{"a", "b"}, {"ab"}, {}});  // "a b" vs "ab"
    EXPECT_EQ(corpus_distance(c, Mode::mean).raw_total, 1u);
}

TEST(CorpusDistance, LengthWeighted) {
    // raw 1 and 3 over mean lengths 2 and 4
    const auto c = corpus_of({{"ab", "ax"}, {"abcd", "axyz"}});
    EXPECT_NEAR(corpus_distance(c, Mode::length_weighted).normalized, 4.0 / 6.0, 1e-15);
}

TEST(CorpusDistance, EmptyCorpus) { EXPECT_THROW(corpus_distance({}, Mode::mean), DomainError); }

TEST(CorpusDistance, SampleIsDeterministic) {
    Rng rng(3);
    corpus::ParallelCorpus c;
    for (int i = 0; i < 50; ++i) {
        const auto a = random_string(rng, 10, 3), b = random_string(rng, 10, 3);
        c.pairs.push_back({{"x" + text_of(a)}, {"x" + text_of(b)}, {}});
    }
    const Sample s{10, 9};
    EXPECT_EQ(corpus_distance(c, Mode::mean, s).n_pairs, 10u);
    EXPECT_EQ(corpus_distance(c, Mode::mean, s).normalized, corpus_distance(c, Mode::mean, s).normalized);
}

TEST(CorpusDistanceProperty, MeanInvariantUnderReordering) {
    Rng rng(4);
    corpus::ParallelCorpus c;
    for (int i = 0; i < 40; ++i)
        c.pairs.push_back({{"w" + text_of(random_string(rng, 12, 3))}, {"w" + text_of(random_string(rng, 12, 3))}, {}});
    const double before = corpus_distance(c, Mode::mean).normalized;
    for (int t = 0; t < 5; ++t) {
        rng.shuffle(c.pairs);
        EXPECT_NEAR(corpus_distance(c, Mode::mean).normalized, before, 1e-12);
    }
}
