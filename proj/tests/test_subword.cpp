#include "nmtlab/error.hpp"
#include "nmtlab/pos.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/subword.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <json.hpp>

using namespace nmtlab;
using namespace nmtlab::subword;

namespace {

std::vector<Tokens> low_lower() { return {{"low", "low", "low", "lower", "lower"}}; }

std::string random_word(Rng& rng, const std::string& alphabet, std::size_t max_len) {
    std::string w(1 + rng.below(max_len), 'a');
    for (auto& c : w) c = alphabet[rng.below(alphabet.size())];
    return w;
}

} // namespace

TEST(LearnBpe, ZeroMerges) { EXPECT_TRUE(learn_bpe(low_lower(), 0).empty()); }

TEST(LearnBpe, LowLowerHandSimulation) {
    const MergeTable m = learn_bpe(low_lower(), 2);
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m.merges()[0], (MergeTable::Pair{"l", "o"}));
    EXPECT_EQ(m.merges()[1], (MergeTable::Pair{"lo", "w"}));
}

TEST(LearnBpe, StopsWhenNoPairRepeats) { EXPECT_EQ(learn_bpe({{"ab"}}, 5).size(), 0u); }

TEST(LearnBpe, EmptyCorpus) { EXPECT_THROW(learn_bpe({}, 5), DomainError); }

TEST(LearnBpe, Deterministic) {
    Rng rng(1);
    std::vector<Tokens> sents(50);
    for (auto& s : sents)
        for (int i = 0; i < 6; ++i) s.push_back(random_word(rng, "abcde", 6));
    EXPECT_EQ(learn_bpe(sents, 40), learn_bpe(sents, 40));
}

TEST(ApplyBpe, CharacterFallback) {
    EXPECT_EQ(apply_bpe_word(MergeTable{}, "cat"), (Tokens{"c@@", "a@@", "t"}));
}

TEST(ApplyBpe, LowerHandApplication) {
    const MergeTable m({{"l", "o"}, {"lo", "w"}});
    EXPECT_EQ(apply_bpe_word(m, "lower"), (Tokens{"low@@", "e@@", "r"}));
    const MergeTable with_end({{"l", "o"}, {"lo", "w"}, {"low", std::string(kEndOfWord)}});
    EXPECT_EQ(apply_bpe_word(with_end, "low"), (Tokens{"low"}));
}

TEST(ApplyBpe, MultibyteCharactersStayWhole) {
    EXPECT_EQ(apply_bpe_word(MergeTable{}, "\xC3\xA9t"), (Tokens{"\xC3\xA9@@", "t"}));
}

TEST(Detok, Examples) {
    EXPECT_EQ(detok_bpe({"low@@", "e@@", "r"}), (Tokens{"lower"}));
    EXPECT_EQ(detok_bpe({"low"}), (Tokens{"low"}));
    EXPECT_THROW(detok_bpe({"a@@"}), ParseError);
}

TEST(RoundTrip, LowLowerMerges) {
    const MergeTable m = learn_bpe(low_lower(), 10);
    for (const auto& w : {"low", "lower", "lowest", "owl", "w"}) EXPECT_EQ(detok_bpe(apply_bpe_word(m, w)), Tokens{w});
}

TEST(RoundTripProperty, RandomWordsAnyMergeTable) {
    Rng rng(2);
    std::vector<Tokens> sents(80);
    for (auto& s : sents)
        for (int i = 0; i < 8; ++i) s.push_back(random_word(rng, "abcdef", 8));
    const MergeTable full = learn_bpe(sents, 100);
    for (std::size_t prefix : {std::size_t{0}, std::size_t{5}, full.size()}) {
        const MergeTable m = full.prefix(prefix);
        for (int i = 0; i < 300; ++i) {
            const Tokens words{random_word(rng, "abcdef", 12), random_word(rng, "abcdef", 3)};
            ASSERT_EQ(detok_bpe(apply_bpe(m, words)), words);
        }
    }
}

TEST(MergeTable, SerializeRoundTrip) {
    const MergeTable m({{"l", "o"}, {"lo", "w"}, {"low", std::string(kEndOfWord)}});
    const std::string text = m.serialize();
    EXPECT_EQ(text.rfind("#nmtlab-bpe v1\n", 0), 0u);
    EXPECT_EQ(MergeTable::parse(text), m);
    EXPECT_THROW(MergeTable::parse("l o\n"), ParseError);
    EXPECT_THROW(MergeTable({{"a", "b"}, {"a", "b"}}), ParseError);
}

TEST(MergeTable, RankIsPosition) {
    const MergeTable m({{"l", "o"}, {"lo", "w"}});
    EXPECT_EQ(m.rank("lo", "w"), 1);
    EXPECT_EQ(m.rank("x", "y"), -1);
}

TEST(PropagatePos, Examples) {
    const auto adj = *pos::tag_id("ADJ");
    EXPECT_EQ(propagate_pos({"lower"}, {"ADJ"}, {"low@@", "e@@", "r"}), (std::vector<int>{adj, adj, adj}));
    EXPECT_EQ(propagate_pos({"the", "cat"}, {"DET", "NOUN"}, {"the", "cat"}),
              (std::vector<int>{*pos::tag_id("DET"), *pos::tag_id("NOUN")}));
}

TEST(PropagatePos, MismatchNamesIndex) {
    try {
        propagate_pos({"the", "cat"}, {"DET", "NOUN"}, {"the", "d@@", "og"});
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("word index 1"), std::string::npos) << e.what();
    }
}

TEST(PropagatePosProperty, EachWordTagRepeatedPerSubword) {
    Rng rng(3);
    std::vector<Tokens> sents(30);
    for (auto& s : sents)
        for (int i = 0; i < 5; ++i) s.push_back(random_word(rng, "abcd", 7));
    const MergeTable m = learn_bpe(sents, 30);
    for (int trial = 0; trial < 200; ++trial) {
        Tokens words, tags;
        for (int i = 0; i < 1 + static_cast<int>(rng.below(6)); ++i) {
            words.push_back(random_word(rng, "abcd", 9));
            tags.emplace_back(pos::kTags[rng.below(17)]);
        }
        const Tokens subs = apply_bpe(m, words);
        const std::vector<int> ids = propagate_pos(words, tags, subs);
        ASSERT_EQ(ids.size(), subs.size());
        std::size_t k = 0;
        for (std::size_t w = 0; w < words.size(); ++w) {
            const std::size_t n = apply_bpe_word(m, words[w]).size();
            for (std::size_t j = 0; j < n; ++j, ++k) ASSERT_EQ(pos::tag_name(ids[k]), tags[w]);
        }
    }
}

TEST(Vocab, SpecialsAndFrequencyOrder) {
    const Vocab v2 = build_vocab({{"a", "b", "a"}, {"a"}}, 2);
    EXPECT_EQ(v2.tokens(), (Tokens{"<pad>", "<unk>", "<s>", "</s>", "a"}));
    const Vocab v1 = build_vocab({{"a", "b", "a"}, {"a"}}, 1);
    EXPECT_EQ(v1.id("b"), 5);
    EXPECT_EQ(v1.id("zzz"), Vocab::kUnk);
    EXPECT_EQ(build_vocab({}, 1).size(), Vocab::kNumSpecials);
}

TEST(Vocab, TiesBrokenByToken) {
    const Vocab v = build_vocab({{"b", "a", "c", "c"}}, 1);
    EXPECT_EQ(v.tokens(), (Tokens{"<pad>", "<unk>", "<s>", "</s>", "c", "a", "b"}));
}

TEST(Vocab, JsonRoundTripWithTags) {
    const Vocab v(Tokens{"x", "y@@"});
    const std::string js = v.to_json();
    EXPECT_EQ(Vocab::from_json(js), v);
    EXPECT_EQ(Vocab::from_json(js).fingerprint(), v.fingerprint());
    const auto doc = nlohmann::json::parse(js);
    EXPECT_EQ(doc.at("tokens").at("y@@"), 5);
    EXPECT_EQ(doc.at("tags").at("X_SPECIAL"), pos::kSpecialId);
    EXPECT_EQ(doc.at("tags").size(), 18u);
}

TEST(Vocab, FingerprintDependsOnOrder) {
    EXPECT_NE(Vocab(Tokens{"a", "b"}).fingerprint(), Vocab(Tokens{"b", "a"}).fingerprint());
}

TEST(Vocab, EncodeDecode) {
    const Vocab v(Tokens{"a", "b"});
    EXPECT_EQ(v.encode({"a", "q", "b"}), (std::vector<int>{4, Vocab::kUnk, 5}));
    EXPECT_EQ(v.decode({Vocab::kBos, 4, 5, Vocab::kEos}), (Tokens{"a", "b"}));
    EXPECT_THROW(Vocab(Tokens{"a", "a"}), DomainError);
    EXPECT_THROW(Vocab(Tokens{"<s>"}), DomainError);
}
