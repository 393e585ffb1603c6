#include "nmtlab/corpus.hpp"
#include "nmtlab/nnet/decode.hpp"
#include "nmtlab/nnet/train.hpp"
#include "nmtlab/pos.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace nmtlab;
using namespace nmtlab::nnet;
using testing_support::copy_task;

namespace {

ModelConfig tiny(Arch a, int vocab, bool pos = false) {
    ModelConfig c;
    c.arch = a;
    c.d_model = 16;
    c.n_layers = 1;
    c.n_heads = 2;
    c.vocab_size = vocab;
    c.use_pos = pos;
    return c;
}

OptimizerHyper hyper_for(Arch a) {
    return a == Arch::lstm ? OptimizerHyper::lstm_default() : OptimizerHyper::transformer_default();
}

TrainOptions opts(long steps, std::uint64_t seed) {
    TrainOptions o;
    o.steps = steps;
    o.seed = seed;
    o.log_every = 5;
    o.batch_sentences = 8;
    o.batch_tokens = 64;
    return o;
}

void add_tags(TokenizedCorpus& c) {
    Rng rng(3);
    c.has_pos = true;
    for (auto& e : c.examples) {
        e.src_pos.clear();
        for (std::size_t i = 0; i < e.src.size(); ++i) e.src_pos.push_back(static_cast<int>(rng.below(17)));
    }
}

} // namespace

TEST(Tokenize, SpreadsTagsOverSubwords) {
    corpus::SentencePair pair{{"lower", "cat"}, {"low"}, corpus::Tokens{"ADJ", "NOUN"}};
    const subword::MergeTable m({{"l", "o"}, {"lo", "w"}});
    const subword::Vocab v = subword::build_vocab({{"low@@", "e@@", "r", "c@@", "a@@", "t", "low"}}, 1);
    const Example e = make_example(pair, m, v);
    EXPECT_EQ(e.src, v.encode({"low@@", "e@@", "r", "c@@", "a@@", "t"}));
    const int adj = *pos::tag_id("ADJ"), noun = *pos::tag_id("NOUN");
    EXPECT_EQ(e.src_pos, (std::vector<int>{adj, adj, adj, noun, noun, noun}));
    EXPECT_EQ(e.tgt, v.encode({"low"}));
}

TEST(Train, ZeroStepsEqualsInitialization) {
    for (Arch a : {Arch::lstm, Arch::transformer}) {
        auto task = copy_task(20);
        const ModelConfig c = tiny(a, task.vocab.size());
        const TrainResult r = train(task.corpus, task.vocab, c, hyper_for(a), opts(0, 5));
        Rng init(derive_seed(5, 0));
        EXPECT_TRUE(r.checkpoint.params.identical(init_params(c, init)));
        EXPECT_EQ(r.checkpoint.step, 0);
        EXPECT_TRUE(r.curve.empty());
    }
}

TEST(Train, SameSeedBitIdenticalCheckpoints) {
    for (Arch a : {Arch::lstm, Arch::transformer}) {
        auto task = copy_task(30);
        const ModelConfig c = tiny(a, task.vocab.size());
        const auto r1 = train(task.corpus, task.vocab, c, hyper_for(a), opts(12, 9));
        const auto r2 = train(task.corpus, task.vocab, c, hyper_for(a), opts(12, 9));
        EXPECT_EQ(serialize_checkpoint(r1.checkpoint), serialize_checkpoint(r2.checkpoint));
        const auto r3 = train(task.corpus, task.vocab, c, hyper_for(a), opts(12, 10));
        EXPECT_FALSE(r1.checkpoint.params.identical(r3.checkpoint.params));
    }
}

TEST(Train, ResumeMatchesUninterruptedRun) {
    for (Arch a : {Arch::lstm, Arch::transformer}) {
        auto task = copy_task(30);
        const ModelConfig c = tiny(a, task.vocab.size());
        const auto straight = train(task.corpus, task.vocab, c, hyper_for(a), opts(15, 4));
        Trainer first(c, hyper_for(a), task.corpus, task.vocab, opts(15, 4));
        first.run(6);
        const Checkpoint saved = parse_checkpoint(serialize_checkpoint(first.checkpoint()));
        Trainer second(saved, task.corpus, opts(15, 4));
        second.run(9);
        EXPECT_EQ(second.steps_done(), 15);
        EXPECT_EQ(serialize_checkpoint(second.checkpoint()), serialize_checkpoint(straight.checkpoint));
    }
}

TEST(Train, LossCurveIsLogged) {
    auto task = copy_task(20);
    const ModelConfig c = tiny(Arch::transformer, task.vocab.size());
    std::vector<long> seen;
    TrainOptions o = opts(12, 1);
    o.on_log = [&](const LossPoint& p) { seen.push_back(p.step); };
    const auto r = train(task.corpus, task.vocab, c, hyper_for(Arch::transformer), o);
    EXPECT_EQ(seen, (std::vector<long>{5, 10, 12}));
    ASSERT_EQ(r.curve.size(), 3u);
    for (const auto& p : r.curve) EXPECT_TRUE(std::isfinite(p.loss));
}

TEST(Train, PosVariantsTrain) {
    for (Arch a : {Arch::lstm, Arch::transformer})
        for (PosMode m : {PosMode::carve, PosMode::concat}) {
            auto task = copy_task(20);
            add_tags(task.corpus);
            ModelConfig c = tiny(a, task.vocab.size(), true);
            c.pos_mode = m;
            const auto r = train(task.corpus, task.vocab, c, hyper_for(a), opts(5, 2));
            EXPECT_EQ(r.checkpoint.step, 5);
            EXPECT_TRUE(r.checkpoint.params.contains("src_emb.pos"));
        }
}

TEST(Train, RejectsMismatchedVocabulary) {
    auto task = copy_task(10);
    const ModelConfig c = tiny(Arch::lstm, task.vocab.size());
    TokenizedCorpus other = task.corpus;
    other.vocab_fingerprint ^= 1;
    EXPECT_THROW(Trainer(c, hyper_for(Arch::lstm), other, task.vocab, opts(1, 1)), Error);
    ModelConfig wrong = c;
    wrong.vocab_size += 1;
    EXPECT_THROW(Trainer(wrong, hyper_for(Arch::lstm), task.corpus, task.vocab, opts(1, 1)), Error);
}

TEST(Train, PosModelRequiresTags) {
    auto task = copy_task(10);
    EXPECT_THROW(Trainer(tiny(Arch::lstm, task.vocab.size(), true), hyper_for(Arch::lstm), task.corpus, task.vocab,
                         opts(1, 1)),
                 Error);
}

TEST(Train, DivergenceNamesStep) {
    auto task = copy_task(10);
    const ModelConfig c = tiny(Arch::transformer, task.vocab.size());
    Trainer t(c, hyper_for(Arch::transformer), task.corpus, task.vocab, opts(5, 1));
    t.run(2);
    t.params().value("out.b")(0, 5) = std::nan("");
    try {
        t.step();
        FAIL();
    } catch (const NumericError& e) {
        EXPECT_NE(std::string(e.what()).find("step 3"), std::string::npos) << e.what();
    }
}

// 200 copy sentences over 16 symbols (vocabulary 20 with the specials).
TEST(Train, TransformerOverfitsCopyTask) {
    auto task = copy_task(200);
    ModelConfig c;
    c.arch = Arch::transformer;
    c.d_model = 32;
    c.n_layers = 2;
    c.n_heads = 4;
    c.vocab_size = task.vocab.size();
    ASSERT_EQ(c.vocab_size, 20);
    TrainOptions o;
    o.seed = 1;
    o.log_every = 0;
    Trainer t(c, OptimizerHyper::transformer_default(), task.corpus, task.vocab, o);
    double loss = 1e9;
    std::size_t verbatim = 0;
    while (t.steps_done() < 3000 && (loss >= 0.1 || verbatim < 190)) {
        t.run(250);
        loss = evaluate_loss(c, t.params(), task.corpus.examples);
        verbatim = 0;
        for (const auto& e : task.corpus.examples)
            if (greedy_decode(c, t.params(), e.src, {}) == e.tgt) ++verbatim;
    }
    EXPECT_LT(loss, 0.1) << "after " << t.steps_done() << " steps";
    EXPECT_GE(verbatim, 190u) << verbatim << " of 200 reproduced after " << t.steps_done() << " steps";
}
