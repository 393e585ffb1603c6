#include "nmtlab/nnet/model.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/subword.hpp"

#include <cfenv>
#include <cmath>

namespace nmtlab::nnet {

using subword::Vocab;

std::string arch_name(Arch a) { return a == Arch::lstm ? "lstm" : "transformer"; }

Arch parse_arch(const std::string& s) {
    if (s == "lstm") return Arch::lstm;
    if (s == "transformer") return Arch::transformer;
    throw Error("unknown architecture '" + s + "'");
}

int pos_embedding_dim(int tagset_size, double exponent) {
    if (tagset_size < 1) throw DomainError("pos_embedding_dim: tagset size must be >= 1");
    if (!(exponent > 0.0)) throw DomainError("pos_embedding_dim: exponent must be positive");
    const int saved = std::fegetround();
    std::fesetround(FE_TONEAREST);
    const double r = std::nearbyint(std::pow(static_cast<double>(tagset_size), exponent));
    std::fesetround(saved);
    return std::max(1, static_cast<int>(r));
}

void ModelConfig::validate() const {
    if (d_model < 1) throw Error("d_model must be positive");
    if (n_layers < 1) throw Error("n_layers must be positive");
    if (vocab_size < Vocab::kNumSpecials) throw Error("vocab_size must cover the special tokens");
    if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("dropout must lie in [0, 1)");
    if (max_len < 1) throw Error("max_len must be positive");
    if (arch == Arch::transformer && (n_heads < 1 || d_model % n_heads != 0))
        throw Error("d_model must be divisible by n_heads");
    if (use_pos) {
        if (tagset_size < 1) throw Error("tagset_size must be positive");
        const int p = pos_dim();
        if (p < 1) throw Error("pos_dim must be positive");
        if (pos_mode == PosMode::carve && p >= d_model) throw Error("pos_dim must be below d_model when carving");
    }
}

nlohmann::json ModelConfig::to_json() const {
    return {{"arch", arch_name(arch)},
            {"d_model", d_model},
            {"n_layers", n_layers},
            {"n_heads", n_heads},
            {"dropout", dropout},
            {"use_pos", use_pos},
            {"pos_exponent", pos_exponent},
            {"pos_mode", pos_mode == PosMode::carve ? "carve" : "concat"},
            {"tagset_size", tagset_size},
            {"max_len", max_len},
            {"vocab_size", vocab_size}};
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
    ModelConfig c;
    c.arch = parse_arch(j.value("arch", arch_name(c.arch)));
    c.d_model = j.value("d_model", c.d_model);
    c.n_layers = j.value("n_layers", c.n_layers);
    c.n_heads = j.value("n_heads", c.n_heads);
    c.dropout = j.value("dropout", c.dropout);
    c.use_pos = j.value("use_pos", c.use_pos);
    c.pos_exponent = j.value("pos_exponent", c.pos_exponent);
    const std::string mode = j.value("pos_mode", std::string("carve"));
    if (mode != "carve" && mode != "concat") throw Error("unknown pos_mode '" + mode + "'");
    c.pos_mode = mode == "carve" ? PosMode::carve : PosMode::concat;
    c.tagset_size = j.value("tagset_size", c.tagset_size);
    c.max_len = j.value("max_len", c.max_len);
    c.vocab_size = j.value("vocab_size", c.vocab_size);
    return c;
}

namespace {

std::string layer_name(const char* side, int k) { return std::string(side) + ".l" + std::to_string(k); }

Mat uniform_mat(Rng& rng, int rows, int cols, double bound) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
    return m;
}

Mat normal_mat(Rng& rng, int rows, int cols, double std) {
    Mat m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std * rng.normal();
    return m;
}

void init_lstm(const ModelConfig& c, ParamStore& ps, Rng& rng) {
    constexpr double b = 0.08;
    const int d = c.d_model;
    const int v = c.vocab_size;
    ps.add("src_emb.tok", uniform_mat(rng, v, c.token_dim(), b));
    if (c.use_pos) ps.add("src_emb.pos", uniform_mat(rng, c.pos_rows(), c.pos_dim(), b));
    ps.add("tgt_emb.tok", uniform_mat(rng, v, d, b));
    for (const char* side : {"enc", "dec"}) {
        for (int k = 0; k < c.n_layers; ++k) {
            const int in = (k == 0 && side[0] == 'e') ? c.source_embedding_dim() : d;
            const std::string p = layer_name(side, k);
            ps.add(p + ".W", uniform_mat(rng, in, 4 * d, b));
            ps.add(p + ".U", uniform_mat(rng, d, 4 * d, b));
            ps.add(p + ".b", uniform_mat(rng, 1, 4 * d, b));
        }
    }
    ps.add("attn.Wc", uniform_mat(rng, 2 * d, d, b));
    ps.add("out.W", uniform_mat(rng, d, v, b));
    ps.add("out.b", uniform_mat(rng, 1, v, b));
}

void add_linear(ParamStore& ps, Rng& rng, const std::string& w, const std::string& bias, int in, int out) {
    ps.add(w, normal_mat(rng, in, out, 1.0 / std::sqrt(static_cast<double>(in))));
    ps.add(bias, Mat::Zero(1, out));
}

// Keys carry no bias: it would shift every score of a query row equally and
// softmax would cancel it.
void add_mha(ParamStore& ps, Rng& rng, const std::string& p, int d) {
    add_linear(ps, rng, p + ".Wq", p + ".bq", d, d);
    ps.add(p + ".Wk", normal_mat(rng, d, d, 1.0 / std::sqrt(static_cast<double>(d))));
    add_linear(ps, rng, p + ".Wv", p + ".bv", d, d);
    add_linear(ps, rng, p + ".Wo", p + ".bo", d, d);
}

void add_ln(ParamStore& ps, const std::string& p, int d) {
    ps.add(p + ".g", Mat::Ones(1, d));
    ps.add(p + ".b", Mat::Zero(1, d));
}

void add_ffn(ParamStore& ps, Rng& rng, const std::string& p, int d) {
    add_linear(ps, rng, p + ".W1", p + ".b1", d, 4 * d);
    add_linear(ps, rng, p + ".W2", p + ".b2", 4 * d, d);
}

void init_transformer(const ModelConfig& c, ParamStore& ps, Rng& rng) {
    const int d = c.d_model;
    const int v = c.vocab_size;
    const double table_std = 1.0 / std::sqrt(static_cast<double>(d));
    ps.add("src_emb.tok", normal_mat(rng, v, c.token_dim(), table_std));
    if (c.use_pos) {
        ps.add("src_emb.pos", normal_mat(rng, c.pos_rows(), c.pos_dim(), table_std));
        if (c.pos_mode == PosMode::concat)
            add_linear(ps, rng, "src_emb.fuse.W", "src_emb.fuse.b", c.source_embedding_dim(), d);
    }
    ps.add("tgt_emb.tok", normal_mat(rng, v, d, table_std));
    for (int k = 0; k < c.n_layers; ++k) {
        const std::string p = layer_name("enc", k);
        add_mha(ps, rng, p + ".self", d);
        add_ln(ps, p + ".ln1", d);
        add_ffn(ps, rng, p + ".ffn", d);
        add_ln(ps, p + ".ln2", d);
    }
    for (int k = 0; k < c.n_layers; ++k) {
        const std::string p = layer_name("dec", k);
        add_mha(ps, rng, p + ".self", d);
        add_ln(ps, p + ".ln1", d);
        add_mha(ps, rng, p + ".cross", d);
        add_ln(ps, p + ".ln2", d);
        add_ffn(ps, rng, p + ".ffn", d);
        add_ln(ps, p + ".ln3", d);
    }
    add_linear(ps, rng, "out.W", "out.b", d, v);
}

Var maybe_dropout(Tape& t, Var x, const ModelConfig& c, const ForwardOptions& o) {
    if (!o.train || c.dropout <= 0.0) return x;
    if (!o.rng) throw Error("dropout requires an rng");
    return t.dropout(x, c.dropout, *o.rng);
}

Var linear(Tape& t, Var x, const std::string& w, const std::string& b) {
    return t.add_row(t.matmul(x, t.param(w)), t.param(b));
}

Mat positional_encoding(int length, int d) {
    Mat pe(length, d);
    for (int p = 0; p < length; ++p) {
        for (int i = 0; i < d; ++i) {
            const double freq = std::pow(10000.0, -static_cast<double>(i - i % 2) / d);
            pe(p, i) = i % 2 == 0 ? std::sin(p * freq) : std::cos(p * freq);
        }
    }
    return pe;
}

// Runs one LSTM layer over the rows of x, starting from (h0, c0) when given.
struct LstmRun {
    Var states;  // T x d
    Var h_last, c_last;
};

LstmRun run_lstm(Tape& t, Var x, const std::string& p, int d, Var h0, Var c0) {
    Var xw = t.add_row(t.matmul(x, t.param(p + ".W")), t.param(p + ".b"));
    Var u = t.param(p + ".U");
    Var h = h0.valid() ? h0 : t.constant(Mat::Zero(1, d));
    Var c = c0.valid() ? c0 : t.constant(Mat::Zero(1, d));
    std::vector<Var> hs;
    const int steps = static_cast<int>(t.value(x).rows());
    hs.reserve(static_cast<std::size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        Var gates = t.add(t.slice_rows(xw, s, 1), t.matmul(h, u));
        Var hc = t.lstm_cell(gates, c);
        h = t.slice_cols(hc, 0, d);
        c = t.slice_cols(hc, d, d);
        hs.push_back(h);
    }
    return {t.concat_rows(hs), h, c};
}

struct Source {
    std::vector<int> ids;
    std::vector<int> tags;
};

// Drops PAD positions and appends EOS, tagged with the last POS row.
Source prepare_source(const ModelConfig& c, const std::vector<int>& src, const std::vector<int>& src_pos) {
    if (c.use_pos && src_pos.size() != src.size())
        throw Error("source has " + std::to_string(src.size()) + " ids but " + std::to_string(src_pos.size()) +
                    " POS ids");
    Source s;
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] == Vocab::kPad) continue;
        s.ids.push_back(src[i]);
        if (c.use_pos) s.tags.push_back(src_pos[i]);
    }
    s.ids.push_back(Vocab::kEos);
    if (c.use_pos) s.tags.push_back(c.tagset_size);
    return s;
}

Var source_embedding(Tape& t, const ModelConfig& c, const Source& s) {
    Var tok = t.param("src_emb.tok");
    if (!c.use_pos) return t.gather_rows(tok, s.ids);
    return embed_with_pos(t, tok, t.param("src_emb.pos"), s.ids, s.tags);
}

Var mha(Tape& t, const std::string& p, Var query_in, Var kv_in, int heads, bool causal, const ForwardOptions& o) {
    Var q = linear(t, query_in, p + ".Wq", p + ".bq");
    Var k = t.matmul(kv_in, t.param(p + ".Wk"));
    Var v = linear(t, kv_in, p + ".Wv", p + ".bv");
    Var a = t.attention(q, k, v, heads, causal, o.attention_sink);
    return linear(t, a, p + ".Wo", p + ".bo");
}

Var add_norm(Tape& t, const ModelConfig& c, const ForwardOptions& o, Var x, Var sub, const std::string& ln) {
    return t.layer_norm(t.add(x, maybe_dropout(t, sub, c, o)), t.param(ln + ".g"), t.param(ln + ".b"));
}

Var ffn(Tape& t, Var x, const std::string& p) {
    return linear(t, t.relu(linear(t, x, p + ".W1", p + ".b1")), p + ".W2", p + ".b2");
}

} // namespace

ParamStore init_params(const ModelConfig& config, Rng& rng) {
    config.validate();
    ParamStore ps;
    if (config.arch == Arch::lstm) init_lstm(config, ps, rng);
    else init_transformer(config, ps, rng);
    return ps;
}

Var embed_with_pos(Tape& tape, Var token_table, Var pos_table, const std::vector<int>& token_ids,
                   const std::vector<int>& pos_ids) {
    if (token_ids.size() != pos_ids.size())
        throw Error("embed_with_pos: " + std::to_string(token_ids.size()) + " tokens but " +
                    std::to_string(pos_ids.size()) + " POS ids");
    return tape.concat_cols({tape.gather_rows(token_table, token_ids), tape.gather_rows(pos_table, pos_ids)});
}

Encoded encode(Tape& t, const ModelConfig& c, const std::vector<int>& src, const std::vector<int>& src_pos,
               const ForwardOptions& o) {
    const Source s = prepare_source(c, src, src_pos);
    Encoded enc;
    enc.length = static_cast<int>(s.ids.size());
    Var x = source_embedding(t, c, s);
    const int d = c.d_model;

    if (c.arch == Arch::lstm) {
        x = maybe_dropout(t, x, c, o);
        for (int k = 0; k < c.n_layers; ++k) {
            if (k > 0) x = maybe_dropout(t, x, c, o);
            LstmRun run = run_lstm(t, x, layer_name("enc", k), d, Var{}, Var{});
            t.check_finite(run.states, "encoder layer " + std::to_string(k));
            enc.h.push_back(run.h_last);
            enc.c.push_back(run.c_last);
            x = run.states;
        }
        enc.memory = x;
        return enc;
    }

    x = t.scale(x, std::sqrt(static_cast<double>(d)));
    if (c.use_pos && c.pos_mode == PosMode::concat) x = linear(t, x, "src_emb.fuse.W", "src_emb.fuse.b");
    x = t.add(x, t.constant(positional_encoding(enc.length, d)));
    x = maybe_dropout(t, x, c, o);
    for (int k = 0; k < c.n_layers; ++k) {
        const std::string p = layer_name("enc", k);
        x = add_norm(t, c, o, x, mha(t, p + ".self", x, x, c.n_heads, false, o), p + ".ln1");
        x = add_norm(t, c, o, x, ffn(t, x, p + ".ffn"), p + ".ln2");
        t.check_finite(x, "encoder layer " + std::to_string(k));
    }
    enc.memory = x;
    return enc;
}

Var decode_logits(Tape& t, const ModelConfig& c, const Encoded& enc, const std::vector<int>& decoder_input,
                  const ForwardOptions& o) {
    const int d = c.d_model;
    Var y = t.gather_rows(t.param("tgt_emb.tok"), decoder_input);

    if (c.arch == Arch::lstm) {
        y = maybe_dropout(t, y, c, o);
        for (int k = 0; k < c.n_layers; ++k) {
            if (k > 0) y = maybe_dropout(t, y, c, o);
            LstmRun run = run_lstm(t, y, layer_name("dec", k), d, enc.h[static_cast<std::size_t>(k)],
                                   enc.c[static_cast<std::size_t>(k)]);
            t.check_finite(run.states, "decoder layer " + std::to_string(k));
            y = run.states;
        }
        // global dot-product attention over encoder states
        Var scores = t.matmul_nt(y, enc.memory);
        Var weights = t.softmax_rows(scores);
        if (o.attention_sink) o.attention_sink->push_back(t.value(weights));
        Var context = t.matmul(weights, enc.memory);
        Var attn_h = t.tanh(t.matmul(t.concat_cols({context, y}), t.param("attn.Wc")));
        attn_h = maybe_dropout(t, attn_h, c, o);
        Var logits = linear(t, attn_h, "out.W", "out.b");
        t.check_finite(logits, "output layer");
        return logits;
    }

    const int len = static_cast<int>(decoder_input.size());
    y = t.scale(y, std::sqrt(static_cast<double>(d)));
    y = t.add(y, t.constant(positional_encoding(len, d)));
    y = maybe_dropout(t, y, c, o);
    for (int k = 0; k < c.n_layers; ++k) {
        const std::string p = layer_name("dec", k);
        y = add_norm(t, c, o, y, mha(t, p + ".self", y, y, c.n_heads, true, o), p + ".ln1");
        y = add_norm(t, c, o, y, mha(t, p + ".cross", y, enc.memory, c.n_heads, false, o), p + ".ln2");
        y = add_norm(t, c, o, y, ffn(t, y, p + ".ffn"), p + ".ln3");
        t.check_finite(y, "decoder layer " + std::to_string(k));
    }
    Var logits = linear(t, y, "out.W", "out.b");
    t.check_finite(logits, "output layer");
    return logits;
}

SentenceOutput forward_example(Tape& t, const ModelConfig& c, const Example& ex, const ForwardOptions& o) {
    std::vector<int> dec_in{Vocab::kBos};
    std::vector<int> targets;
    for (int id : ex.tgt) {
        if (id == Vocab::kPad) continue;
        dec_in.push_back(id);
        targets.push_back(id);
    }
    targets.push_back(Vocab::kEos);

    Encoded enc = encode(t, c, ex.src, ex.src_pos, o);
    SentenceOutput out;
    out.logits = decode_logits(t, c, enc, dec_in, o);
    out.loss_sum = t.cross_entropy_sum(out.logits, targets);
    out.n_tokens = static_cast<int>(targets.size());
    return out;
}

Var batch_loss(Tape& t, const ModelConfig& c, const std::vector<Example>& batch, const ForwardOptions& o,
               int* n_tokens) {
    if (batch.empty()) throw Error("empty batch");
    std::vector<Var> losses;
    int tokens = 0;
    for (const auto& ex : batch) {
        SentenceOutput s = forward_example(t, c, ex, o);
        losses.push_back(s.loss_sum);
        tokens += s.n_tokens;
    }
    if (n_tokens) *n_tokens = tokens;
    Var loss = t.scale(t.sum(losses), 1.0 / tokens);
    t.check_finite(loss, "loss");
    return loss;
}

ForwardResult forward(const ModelConfig& c, ParamStore& params, const std::vector<Example>& batch,
                      const ForwardOptions& o) {
    Tape t(params, false);
    t.log_relu_signs(o.relu_signs);
    ForwardResult r;
    double total = 0.0;
    for (const auto& ex : batch) {
        SentenceOutput s = forward_example(t, c, ex, o);
        r.logits.push_back(t.value(s.logits));
        total += t.scalar(s.loss_sum);
        r.n_tokens += s.n_tokens;
    }
    r.loss = r.n_tokens ? total / r.n_tokens : 0.0;
    return r;
}

double loss_and_grad(const ModelConfig& c, ParamStore& params, const std::vector<Example>& batch,
                     const ForwardOptions& o) {
    params.zero_grad();
    Tape t(params, true);
    Var loss = batch_loss(t, c, batch, o);
    t.backward(loss);
    return t.scalar(loss);
}

} // namespace nmtlab::nnet
