#pragma once

#include "nmtlab/nnet/checkpoint.hpp"
#include "nmtlab/subword.hpp"

#include <optional>
#include <vector>

namespace nmtlab::nnet {

struct Strategy {
    int beam_size = 1;            // 1 with alpha 0 is greedy
    double length_penalty = 0.0;  // alpha in score = logprob / length^alpha

    static Strategy greedy() { return {}; }
    static Strategy beam(int k, double alpha) { return {k, alpha}; }
};

// Output budget for a source of n ids: min(config.max_len, 2n + 10).
int max_output_length(const ModelConfig& config, std::size_t source_length);

// Argmax decoding. Ties go to the lower id.
std::vector<int> greedy_decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                               const std::vector<int>& src_pos);

// Beam search. Hypotheses leave the beam when they emit EOS; search stops once
// beam_size hypotheses have finished or the length budget runs out. Length
// counts generated tokens including EOS.
std::vector<int> beam_decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                             const std::vector<int>& src_pos, int beam_size, double length_penalty);

std::vector<int> decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                        const std::vector<int>& src_pos, const Strategy& strategy);

// Text-level wrapper around a checkpoint and its subword assets.
class Translator {
  public:
    Translator(Checkpoint checkpoint, subword::MergeTable merges, subword::Vocab vocab);
    // Reads the merges and vocabulary stored in the checkpoint assets.
    explicit Translator(Checkpoint checkpoint);

    // Source words (and their tags for POS models) in, target words out.
    subword::Tokens translate(const subword::Tokens& words, const std::optional<subword::Tokens>& tags,
                              const Strategy& strategy = {});

    const Checkpoint& checkpoint() const { return ckpt_; }
    const subword::Vocab& vocab() const { return vocab_; }
    const subword::MergeTable& merges() const { return merges_; }

  private:
    Checkpoint ckpt_;
    subword::MergeTable merges_;
    subword::Vocab vocab_;
};

// Puts merges and vocabulary into checkpoint assets.
void attach_assets(Checkpoint& ckpt, const subword::MergeTable& merges, const subword::Vocab& vocab);

} // namespace nmtlab::nnet
