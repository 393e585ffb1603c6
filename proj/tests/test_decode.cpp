#include "nmtlab/nnet/decode.hpp"
#include "nmtlab/nnet/train.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

using namespace nmtlab;
using namespace nmtlab::nnet;
using subword::Vocab;

namespace {

ModelConfig tiny(Arch a, int vocab) {
    ModelConfig c;
    c.arch = a;
    c.d_model = 16;
    c.n_layers = 2;
    c.n_heads = 2;
    c.vocab_size = vocab;
    c.max_len = 30;
    return c;
}

// Briefly trained so outputs are not all identical.
Checkpoint trained(Arch a, long steps = 60) {
    auto task = testing_support::copy_task(40, 6);
    TrainOptions o;
    o.steps = steps;
    o.seed = 3;
    o.log_every = 0;
    OptimizerHyper h = a == Arch::lstm ? OptimizerHyper::lstm_default() : OptimizerHyper::transformer_default();
    if (a == Arch::lstm) h.eta = 10;
    return train(task.corpus, task.vocab, tiny(a, task.vocab.size()), h, o).checkpoint;
}

} // namespace

TEST(Decode, OutputBudget) {
    ModelConfig c = tiny(Arch::lstm, 10);
    EXPECT_EQ(max_output_length(c, 3), 16);
    EXPECT_EQ(max_output_length(c, 50), 30);
}

TEST(Decode, BeamOneEqualsGreedy) {
    for (Arch a : {Arch::lstm, Arch::transformer}) {
        Checkpoint ck = trained(a);
        Rng rng(5);
        for (int i = 0; i < 15; ++i) {
            std::vector<int> src;
            for (int j = 0; j < 1 + static_cast<int>(rng.below(8)); ++j) src.push_back(4 + static_cast<int>(rng.below(6)));
            const auto g = greedy_decode(ck.config, ck.params, src, {});
            EXPECT_EQ(beam_decode(ck.config, ck.params, src, {}, 1, 0.0), g);
            EXPECT_EQ(decode(ck.config, ck.params, src, {}, Strategy::beam(1, 0.0)), g);
        }
    }
}

TEST(Decode, EmptySourceGivesEmptySentence) {
    for (Arch a : {Arch::lstm, Arch::transformer}) {
        Checkpoint ck = trained(a, 5);
        EXPECT_TRUE(greedy_decode(ck.config, ck.params, {}, {}).empty());
        EXPECT_TRUE(beam_decode(ck.config, ck.params, {}, {}, 4, 0.6).empty());
        EXPECT_TRUE(greedy_decode(ck.config, ck.params, {Vocab::kPad, Vocab::kPad}, {}).empty());
    }
}

TEST(Decode, DeterministicAndBounded) {
    Checkpoint ck = trained(Arch::transformer);
    const std::vector<int> src{4, 5, 6, 7, 8};
    const auto a = beam_decode(ck.config, ck.params, src, {}, 4, 0.7);
    const auto b = beam_decode(ck.config, ck.params, src, {}, 4, 0.7);
    EXPECT_EQ(a, b);
    EXPECT_LE(static_cast<int>(a.size()), max_output_length(ck.config, src.size()));
    for (int id : a) {
        EXPECT_NE(id, Vocab::kEos);
        EXPECT_NE(id, Vocab::kBos);
    }
    EXPECT_THROW(beam_decode(ck.config, ck.params, src, {}, 0, 0.0), Error);
}

TEST(Translator, UsesCheckpointAssets) {
    testing_support::TempDir dir("decode");
    auto task = testing_support::copy_task(20, 6);
    Checkpoint ck = trained(Arch::lstm, 5);
    attach_assets(ck, subword::MergeTable{}, task.vocab);
    save_checkpoint(ck, dir.file("m.ckpt"));
    Translator from_assets(load_checkpoint(dir.file("m.ckpt")));
    Translator explicit_assets(ck, subword::MergeTable{}, task.vocab);
    EXPECT_EQ(from_assets.translate({"w1", "w2"}, std::nullopt), explicit_assets.translate({"w1", "w2"}, std::nullopt));
    EXPECT_THROW(Translator(ck, subword::MergeTable{}, Vocab(subword::Tokens{"zz"})), Error);
}
