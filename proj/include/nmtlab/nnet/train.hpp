#pragma once

#include "nmtlab/corpus.hpp"
#include "nmtlab/nnet/checkpoint.hpp"
#include "nmtlab/subword.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nmtlab::nnet {

struct TokenizedCorpus {
    std::vector<Example> examples;
    std::uint64_t vocab_fingerprint = 0;
    bool has_pos = false;
};

// BPE-splits both sides, maps to ids and, when the source carries tags, spreads
// each word's tag over its subwords.
Example make_example(const corpus::SentencePair& pair, const subword::MergeTable& merges,
                     const subword::Vocab& vocab);
TokenizedCorpus tokenize_corpus(const corpus::ParallelCorpus& corpus, const subword::MergeTable& merges,
                                const subword::Vocab& vocab);

struct LossPoint {
    long step;
    double loss;
};

struct TrainOptions {
    long steps = 0;
    std::uint64_t seed = 0;
    int log_every = 50;
    int batch_sentences = 32;  // LSTM batches
    int batch_tokens = 512;    // Transformer batches, counting source + target tokens
    std::function<void(const LossPoint&)> on_log;
};

// Deterministic trainer. Initialization draws from the stream
// derive_seed(seed, 0), dropout from derive_seed(seed, 1), and epoch e visits
// examples in the order of a shuffle seeded with derive_seed(seed, 256 + e).
class Trainer {
  public:
    Trainer(const ModelConfig& config, const OptimizerHyper& hyper, TokenizedCorpus corpus,
            const subword::Vocab& vocab, TrainOptions options);

    // Continues from a checkpoint produced by an earlier Trainer.
    Trainer(Checkpoint checkpoint, TokenizedCorpus corpus, TrainOptions options);

    // One optimizer step; returns the batch loss. Throws NumericError naming the
    // step when the loss diverges.
    double step();
    void run(long steps);

    long steps_done() const { return ckpt_.step; }
    const Checkpoint& checkpoint() const;
    const std::vector<LossPoint>& curve() const { return curve_; }
    const ModelConfig& config() const { return ckpt_.config; }
    ParamStore& params() { return ckpt_.params; }

  private:
    std::vector<Example> next_batch();
    void start_epoch();
    void validate_corpus() const;

    Checkpoint ckpt_;
    TokenizedCorpus corpus_;
    TrainOptions options_;
    Rng dropout_rng_;
    std::vector<std::size_t> order_;
    std::vector<LossPoint> curve_;
    mutable Checkpoint snapshot_;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<LossPoint> curve;
};

TrainResult train(const TokenizedCorpus& corpus, const subword::Vocab& vocab, const ModelConfig& config,
                  const OptimizerHyper& hyper, const TrainOptions& options);

// Mean token NLL over a corpus without dropout.
double evaluate_loss(const ModelConfig& config, ParamStore& params, const std::vector<Example>& examples);

} // namespace nmtlab::nnet
