#include "nmtlab/nnet/decode.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/text.hpp"

#include <algorithm>
#include <cmath>

namespace nmtlab::nnet {

using subword::Vocab;

namespace {

// Log-softmax of the last logits row.
std::vector<double> next_log_probs(Tape& t, const ModelConfig& c, const Encoded& enc,
                                   const std::vector<int>& prefix) {
    const Mat& logits = t.value(decode_logits(t, c, enc, prefix, {}));
    const auto row = logits.row(logits.rows() - 1);
    const double mx = row.maxCoeff();
    double z = 0.0;
    for (Eigen::Index j = 0; j < row.size(); ++j) z += std::exp(row(j) - mx);
    const double lz = mx + std::log(z);
    std::vector<double> out(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) out[static_cast<std::size_t>(j)] = row(j) - lz;
    return out;
}

bool empty_source(const std::vector<int>& src) {
    return std::all_of(src.begin(), src.end(), [](int id) { return id == Vocab::kPad; });
}

struct Hyp {
    std::vector<int> tokens;  // BOS first
    double logprob = 0.0;
};

double normalized(double logprob, std::size_t length, double alpha) {
    if (alpha == 0.0) return logprob;
    return logprob / std::pow(static_cast<double>(std::max<std::size_t>(length, 1)), alpha);
}

} // namespace

int max_output_length(const ModelConfig& config, std::size_t source_length) {
    return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(config.max_len), 2 * source_length + 10));
}

std::vector<int> greedy_decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                               const std::vector<int>& src_pos) {
    if (empty_source(src)) return {};
    Tape t(params, false);
    const Encoded enc = encode(t, config, src, src_pos, {});
    std::vector<int> prefix{Vocab::kBos};
    const int budget = max_output_length(config, src.size());
    for (int step = 0; step < budget; ++step) {
        const auto lp = next_log_probs(t, config, enc, prefix);
        const int best = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
        if (best == Vocab::kEos) break;
        prefix.push_back(best);
    }
    return {prefix.begin() + 1, prefix.end()};
}

std::vector<int> beam_decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                             const std::vector<int>& src_pos, int beam_size, double length_penalty) {
    if (beam_size < 1) throw Error("beam size must be at least 1");
    if (length_penalty < 0.0) throw Error("length penalty must be non-negative");
    if (empty_source(src)) return {};
    Tape t(params, false);
    const Encoded enc = encode(t, config, src, src_pos, {});
    const int budget = max_output_length(config, src.size());
    const auto k = static_cast<std::size_t>(beam_size);

    std::vector<Hyp> alive{{{Vocab::kBos}, 0.0}};
    std::vector<Hyp> finished;
    struct Cand {
        double logprob;
        std::size_t hyp;
        int token;
    };
    for (int step = 0; step < budget && !alive.empty() && finished.size() < k; ++step) {
        std::vector<Cand> cands;
        for (std::size_t h = 0; h < alive.size(); ++h) {
            const auto lp = next_log_probs(t, config, enc, alive[h].tokens);
            for (std::size_t j = 0; j < lp.size(); ++j)
                cands.push_back({alive[h].logprob + lp[j], h, static_cast<int>(j)});
        }
        // Raw log-prob decides which extensions survive; ties keep the earlier
        // hypothesis and lower token id.
        std::stable_sort(cands.begin(), cands.end(),
                         [](const Cand& a, const Cand& b) { return a.logprob > b.logprob; });
        std::vector<Hyp> next;
        for (const Cand& c : cands) {
            if (next.size() + finished.size() >= k) break;
            Hyp h{alive[c.hyp].tokens, c.logprob};
            h.tokens.push_back(c.token);
            if (c.token == Vocab::kEos)
                finished.push_back(std::move(h));
            else
                next.push_back(std::move(h));
        }
        alive = std::move(next);
    }

    const std::vector<Hyp>& pool = finished.empty() ? alive : finished;
    const Hyp* best = nullptr;
    double best_score = 0.0;
    for (const Hyp& h : pool) {
        const double s = normalized(h.logprob, h.tokens.size() - 1, length_penalty);
        if (!best || s > best_score) {
            best = &h;
            best_score = s;
        }
    }
    std::vector<int> out(best->tokens.begin() + 1, best->tokens.end());
    if (!out.empty() && out.back() == Vocab::kEos) out.pop_back();
    return out;
}

std::vector<int> decode(const ModelConfig& config, ParamStore& params, const std::vector<int>& src,
                        const std::vector<int>& src_pos, const Strategy& strategy) {
    if (strategy.beam_size == 1 && strategy.length_penalty == 0.0)
        return greedy_decode(config, params, src, src_pos);
    return beam_decode(config, params, src, src_pos, strategy.beam_size, strategy.length_penalty);
}

void attach_assets(Checkpoint& ckpt, const subword::MergeTable& merges, const subword::Vocab& vocab) {
    ckpt.assets["merges"] = merges.serialize();
    ckpt.assets["vocab"] = vocab.to_json();
}

Translator::Translator(Checkpoint checkpoint, subword::MergeTable merges, subword::Vocab vocab)
    : ckpt_(std::move(checkpoint)), merges_(std::move(merges)), vocab_(std::move(vocab)) {
    if (vocab_.fingerprint() != ckpt_.vocab_fingerprint)
        throw Error("vocabulary does not match the checkpoint");
}

Translator::Translator(Checkpoint checkpoint)
    : Translator(checkpoint,
                 subword::MergeTable::parse(checkpoint.assets.value("merges", std::string("#nmtlab-bpe v1\n"))),
                 checkpoint.assets.contains("vocab")
                     ? subword::Vocab::from_json(checkpoint.assets.at("vocab").get<std::string>())
                     : throw Error("checkpoint carries no vocabulary")) {}

subword::Tokens Translator::translate(const subword::Tokens& words, const std::optional<subword::Tokens>& tags,
                                      const Strategy& strategy) {
    const subword::Tokens sub = subword::apply_bpe(merges_, words);
    const std::vector<int> src = vocab_.encode(sub);
    std::vector<int> src_pos;
    if (ckpt_.config.use_pos) {
        if (!tags) throw Error("this model needs POS tags for its input");
        src_pos = subword::propagate_pos(words, *tags, sub);
    }
    const std::vector<int> out = decode(ckpt_.config, ckpt_.params, src, src_pos, strategy);
    subword::Tokens pieces = vocab_.decode(out);
    // A model may stop mid-word; keep the fragment as a word.
    if (!pieces.empty() && text::ends_with(pieces.back(), subword::kContinuation))
        pieces.back().resize(pieces.back().size() - subword::kContinuation.size());
    return subword::detok_bpe(pieces);
}

} // namespace nmtlab::nnet
