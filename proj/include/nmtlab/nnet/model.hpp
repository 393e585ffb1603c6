#pragma once

#include "nmtlab/nnet/autodiff.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace nmtlab {
class Rng;
}

namespace nmtlab::nnet {

enum class Arch { lstm, transformer };

// How source POS embeddings join token embeddings.
//   carve:  token width d_model - pos_dim, concatenated width d_model
//   concat: token width d_model, concatenated width d_model + pos_dim
enum class PosMode { carve, concat };

std::string arch_name(Arch a);
Arch parse_arch(const std::string& s);

// round-half-to-even(tagset_size ^ exponent), at least 1.
int pos_embedding_dim(int tagset_size, double exponent);

struct ModelConfig {
    Arch arch = Arch::transformer;
    int d_model = 64;
    int n_layers = 2;
    int n_heads = 4;
    double dropout = 0.1;
    bool use_pos = false;
    double pos_exponent = 0.7;
    PosMode pos_mode = PosMode::carve;
    int tagset_size = 17;  // POS table has one more row, for synthetic tokens (EOS)
    int max_len = 100;
    int vocab_size = 0;  // shared source/target vocabulary

    int pos_rows() const { return tagset_size + 1; }
    int pos_dim() const { return use_pos ? pos_embedding_dim(tagset_size, pos_exponent) : 0; }
    // Width of the source token table.
    int token_dim() const { return use_pos && pos_mode == PosMode::carve ? d_model - pos_dim() : d_model; }
    // Width of the fused source embedding.
    int source_embedding_dim() const { return token_dim() + pos_dim(); }

    void validate() const;  // throws Error

    nlohmann::json to_json() const;
    static ModelConfig from_json(const nlohmann::json& j);

    bool operator==(const ModelConfig&) const = default;
};

// One training pair in vocabulary ids, without BOS/EOS. PAD ids are masked:
// they take no part in attention, recurrence or loss. src_pos is empty for
// models without POS input, otherwise one tag id per src id.
struct Example {
    std::vector<int> src;
    std::vector<int> src_pos;
    std::vector<int> tgt;
};

// Creates every parameter with its initial value: uniform(-0.08, 0.08) for the
// LSTM; for the Transformer normal(0, fan_in^-1/2) weight matrices and tables,
// zero biases, unit layer-norm gains.
ParamStore init_params(const ModelConfig& config, Rng& rng);

struct ForwardOptions {
    bool train = false;        // enables dropout
    Rng* rng = nullptr;        // dropout stream, required when train && dropout > 0
    std::vector<Mat>* attention_sink = nullptr;  // collects attention weight matrices
    std::vector<unsigned char>* relu_signs = nullptr;  // see Tape::log_relu_signs
};

// Encoder output kept on a tape.
struct Encoded {
    Var memory;                 // src_len x d_model
    std::vector<Var> h, c;      // LSTM final states per layer
    int length = 0;
};

Encoded encode(Tape& tape, const ModelConfig& config, const std::vector<int>& src,
               const std::vector<int>& src_pos, const ForwardOptions& opts);

// Logits (rows = positions of `decoder_input`, which starts with BOS).
Var decode_logits(Tape& tape, const ModelConfig& config, const Encoded& enc,
                  const std::vector<int>& decoder_input, const ForwardOptions& opts);

struct SentenceOutput {
    Var loss_sum;   // summed token NLL (1 x 1)
    Var logits;
    int n_tokens = 0;
};

// Teacher-forced pass for one example (targets = tgt + EOS).
SentenceOutput forward_example(Tape& tape, const ModelConfig& config, const Example& ex,
                               const ForwardOptions& opts);

// Mean token NLL over a batch, as a tape node.
Var batch_loss(Tape& tape, const ModelConfig& config, const std::vector<Example>& batch,
               const ForwardOptions& opts, int* n_tokens = nullptr);

struct ForwardResult {
    std::vector<Mat> logits;  // one per example
    double loss = 0.0;        // mean token NLL
    int n_tokens = 0;
};

// Inference-mode forward (no gradients).
ForwardResult forward(const ModelConfig& config, ParamStore& params, const std::vector<Example>& batch,
                      const ForwardOptions& opts = {});

// Mean token NLL with gradients written into params' gradient buffers
// (which are zeroed first).
double loss_and_grad(const ModelConfig& config, ParamStore& params, const std::vector<Example>& batch,
                     const ForwardOptions& opts = {});

// Embedding fusion, exposed for direct testing: rows are
// concat(token_table[token_ids[i]], pos_table[pos_ids[i]]).
Var embed_with_pos(Tape& tape, Var token_table, Var pos_table, const std::vector<int>& token_ids,
                   const std::vector<int>& pos_ids);

} // namespace nmtlab::nnet
