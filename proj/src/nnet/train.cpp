#include "nmtlab/nnet/train.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/pos.hpp"

#include <cmath>
#include <numeric>

namespace nmtlab::nnet {

Example make_example(const corpus::SentencePair& pair, const subword::MergeTable& merges,
                     const subword::Vocab& vocab) {
    Example ex;
    const auto src_sub = subword::apply_bpe(merges, pair.source);
    ex.src = vocab.encode(src_sub);
    ex.tgt = vocab.encode(subword::apply_bpe(merges, pair.target));
    if (pair.source_tags) ex.src_pos = subword::propagate_pos(pair.source, *pair.source_tags, src_sub);
    return ex;
}

TokenizedCorpus tokenize_corpus(const corpus::ParallelCorpus& corpus, const subword::MergeTable& merges,
                                const subword::Vocab& vocab) {
    TokenizedCorpus tc;
    tc.vocab_fingerprint = vocab.fingerprint();
    tc.has_pos = !corpus.empty();
    for (const auto& p : corpus.pairs) {
        tc.examples.push_back(make_example(p, merges, vocab));
        tc.has_pos = tc.has_pos && p.source_tags.has_value();
    }
    return tc;
}

Trainer::Trainer(const ModelConfig& config, const OptimizerHyper& hyper, TokenizedCorpus corpus,
                 const subword::Vocab& vocab, TrainOptions options)
    : corpus_(std::move(corpus)), options_(std::move(options)) {
    config.validate();
    hyper.validate();
    if (corpus_.vocab_fingerprint != vocab.fingerprint())
        throw Error("training corpus was tokenized with a different vocabulary");
    if (config.vocab_size != vocab.size())
        throw Error("model vocab_size " + std::to_string(config.vocab_size) + " != vocabulary size " +
                    std::to_string(vocab.size()));

    ckpt_.config = config;
    ckpt_.hyper = hyper;
    ckpt_.seed = options_.seed;
    ckpt_.vocab_fingerprint = vocab.fingerprint();
    Rng init_rng(derive_seed(options_.seed, 0));
    ckpt_.params = init_params(config, init_rng);
    ckpt_.optimizer = AdamState::zeros_like(ckpt_.params);
    dropout_rng_ = Rng(derive_seed(options_.seed, 1));
    validate_corpus();
    start_epoch();
}

Trainer::Trainer(Checkpoint checkpoint, TokenizedCorpus corpus, TrainOptions options)
    : ckpt_(std::move(checkpoint)), corpus_(std::move(corpus)), options_(std::move(options)) {
    if (corpus_.vocab_fingerprint != ckpt_.vocab_fingerprint)
        throw Error("training corpus was tokenized with a different vocabulary");
    if (ckpt_.optimizer.m.empty()) ckpt_.optimizer = AdamState::zeros_like(ckpt_.params);
    options_.seed = ckpt_.seed;
    dropout_rng_.set_state(ckpt_.rng);
    validate_corpus();
    start_epoch();
}

void Trainer::validate_corpus() const {
    if (corpus_.examples.empty()) throw Error("training corpus is empty");
    const int v = ckpt_.config.vocab_size;
    for (std::size_t i = 0; i < corpus_.examples.size(); ++i) {
        const Example& ex = corpus_.examples[i];
        for (const auto* ids : {&ex.src, &ex.tgt})
            for (int id : *ids)
                if (id < 0 || id >= v) throw Error("example " + std::to_string(i) + " has out-of-range token id");
        if (ckpt_.config.use_pos) {
            if (ex.src_pos.size() != ex.src.size())
                throw Error("POS model needs source tags (example " + std::to_string(i) + ")");
            for (int t : ex.src_pos)
                if (t < 0 || t >= ckpt_.config.pos_rows()) throw Error("example " + std::to_string(i) + " has bad tag id");
        }
    }
}

void Trainer::start_epoch() {
    order_.resize(corpus_.examples.size());
    std::iota(order_.begin(), order_.end(), 0);
    Rng shuffle_rng(derive_seed(ckpt_.seed, 256 + static_cast<std::uint64_t>(ckpt_.epoch)));
    shuffle_rng.shuffle(order_);
}

std::vector<Example> Trainer::next_batch() {
    if (ckpt_.position >= static_cast<long>(order_.size())) {
        ++ckpt_.epoch;
        ckpt_.position = 0;
        start_epoch();
    }
    std::vector<Example> batch;
    long tokens = 0;
    while (ckpt_.position < static_cast<long>(order_.size())) {
        const Example& ex = corpus_.examples[order_[static_cast<std::size_t>(ckpt_.position)]];
        if (ckpt_.config.arch == Arch::lstm) {
            if (static_cast<int>(batch.size()) >= options_.batch_sentences) break;
        } else {
            const long n = static_cast<long>(ex.src.size() + ex.tgt.size() + 2);
            if (!batch.empty() && tokens + n > options_.batch_tokens) break;
            tokens += n;
        }
        batch.push_back(ex);
        ++ckpt_.position;
    }
    return batch;
}

double Trainer::step() {
    const long t = ckpt_.step + 1;
    const std::vector<Example> batch = next_batch();
    ForwardOptions fo;
    fo.train = true;
    fo.rng = &dropout_rng_;
    double loss;
    try {
        loss = loss_and_grad(ckpt_.config, ckpt_.params, batch, fo);
    } catch (const NumericError& e) {
        throw NumericError("training diverged at step " + std::to_string(t) + ": " + e.what());
    }
    if (!std::isfinite(loss)) throw NumericError("training diverged at step " + std::to_string(t));
    adam_step(ckpt_.params, ckpt_.optimizer, ckpt_.hyper, t, learning_rate(ckpt_.hyper, t, ckpt_.config.d_model));
    ckpt_.step = t;

    const bool last = options_.steps > 0 && t == options_.steps;
    if ((options_.log_every > 0 && t % options_.log_every == 0) || last) {
        curve_.push_back({t, loss});
        if (options_.on_log) options_.on_log(curve_.back());
    }
    return loss;
}

void Trainer::run(long steps) {
    for (long i = 0; i < steps; ++i) step();
}

const Checkpoint& Trainer::checkpoint() const {
    snapshot_ = ckpt_;
    snapshot_.rng = dropout_rng_.state();
    return snapshot_;
}

TrainResult train(const TokenizedCorpus& corpus, const subword::Vocab& vocab, const ModelConfig& config,
                  const OptimizerHyper& hyper, const TrainOptions& options) {
    Trainer trainer(config, hyper, corpus, vocab, options);
    trainer.run(options.steps);
    return {trainer.checkpoint(), trainer.curve()};
}

double evaluate_loss(const ModelConfig& config, ParamStore& params, const std::vector<Example>& examples) {
    return forward(config, params, examples).loss;
}

} // namespace nmtlab::nnet
