// nmtlab command-line front end.
#include "nmtlab/corpus.hpp"
#include "nmtlab/error.hpp"
#include "nmtlab/harness.hpp"
#include "nmtlab/lexsim.hpp"
#include "nmtlab/metrics.hpp"
#include "nmtlab/nnet/checkpoint.hpp"
#include "nmtlab/nnet/decode.hpp"
#include "nmtlab/nnet/train.hpp"
#include "nmtlab/registry.hpp"
#include "nmtlab/stats.hpp"
#include "nmtlab/subword.hpp"
#include "nmtlab/text.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

using nlohmann::json;
namespace nn = nmtlab::nnet;

namespace {

void print(const json& j) { std::cout << j.dump(2) << '\n'; }

std::vector<double> read_numbers(const std::string& path) {
    std::vector<double> out;
    const auto lines = nmtlab::text::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string t(nmtlab::text::trim(lines[i]));
        if (t.empty()) continue;
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(t, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != t.size()) throw nmtlab::ParseError(path + ": not a number: '" + t + "'", i + 1);
        out.push_back(v);
    }
    return out;
}

std::vector<nmtlab::subword::Tokens> read_tokenized(const std::string& path) {
    std::vector<nmtlab::subword::Tokens> out;
    const auto lines = nmtlab::text::read_lines(path);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        nmtlab::text::decode_utf8_or_throw(lines[i], i + 1);
        out.push_back(nmtlab::text::split_ws(lines[i]));
    }
    return out;
}

json mww_json(const nmtlab::stats::MwwResult& r) {
    return {{"u", r.u_statistic}, {"p_value", r.p_value}, {"n", r.n}, {"m", r.m}, {"exact", r.exact}};
}

// --- subcommands -----------------------------------------------------------

struct LexsimArgs {
    std::string src, tgt, mode = "mean";
    std::optional<std::size_t> sample;
    std::uint64_t seed = 0;
};

int run_lexsim(const LexsimArgs& a) {
    nmtlab::lexsim::Mode mode;
    if (a.mode == "mean") mode = nmtlab::lexsim::Mode::mean;
    else if (a.mode == "weighted" || a.mode == "length_weighted") mode = nmtlab::lexsim::Mode::length_weighted;
    else throw nmtlab::Error("unknown mode '" + a.mode + "' (mean|weighted)");
    const auto loaded = nmtlab::corpus::load_parallel(a.src, a.tgt, "src", "tgt");
    std::optional<nmtlab::lexsim::Sample> sample;
    if (a.sample) sample = nmtlab::lexsim::Sample{*a.sample, a.seed};
    const auto d = nmtlab::lexsim::corpus_distance(loaded.corpus, mode, sample);
    print({{"normalized", d.normalized}, {"raw_total", d.raw_total}, {"n_pairs", d.n_pairs},
           {"dropped", loaded.dropped}});
    return 0;
}

struct BpeLearnArgs {
    std::vector<std::string> inputs;
    std::size_t merges = 500;
    std::string out;
};

int run_bpe_learn(const BpeLearnArgs& a) {
    std::vector<nmtlab::subword::Tokens> sentences;
    for (const auto& f : a.inputs) {
        auto part = read_tokenized(f);
        sentences.insert(sentences.end(), part.begin(), part.end());
    }
    const auto table = nmtlab::subword::learn_bpe(sentences, a.merges);
    table.save(a.out);
    std::cerr << "learned " << table.size() << " merges\n";
    return 0;
}

struct BpeApplyArgs {
    std::string codes, input, out;
};

int run_bpe_apply(const BpeApplyArgs& a) {
    const auto table = nmtlab::subword::MergeTable::load(a.codes);
    std::string text;
    for (const auto& s : read_tokenized(a.input))
        text += nmtlab::text::join(nmtlab::subword::apply_bpe(table, s), " ") + "\n";
    nmtlab::text::write_file(a.out, text);
    return 0;
}

struct VocabArgs {
    std::vector<std::string> inputs;
    std::string codes, out;
    std::size_t min_freq = 1;
};

int run_vocab(const VocabArgs& a) {
    const auto table = nmtlab::subword::MergeTable::load(a.codes);
    std::vector<nmtlab::subword::Tokens> pieces;
    for (const auto& f : a.inputs)
        for (const auto& s : read_tokenized(f)) pieces.push_back(nmtlab::subword::apply_bpe(table, s));
    const auto vocab = nmtlab::subword::build_vocab(pieces, a.min_freq);
    vocab.save(a.out);
    std::cerr << "vocabulary of " << vocab.size() << " tokens\n";
    return 0;
}

struct TrainArgs {
    std::string arch = "transformer";
    bool pos = false;
    std::string pos_mode = "carve";
    std::string src, tgt, codes, vocab, out;
    std::optional<std::string> tags, resume;
    long steps = 300;
    std::uint64_t seed = 0;
    int d_model = 64, layers = 2, heads = 4, log_every = 50;
    double dropout = 0.1;
    std::optional<double> eta;
    int batch_sentences = 32, batch_tokens = 512;
};

int run_train(const TrainArgs& a) {
    const auto merges = nmtlab::subword::MergeTable::load(a.codes);
    const auto vocab = nmtlab::subword::Vocab::load(a.vocab);
    auto corpus = nmtlab::corpus::load_parallel(a.src, a.tgt, "src", "tgt");
    if (corpus.dropped) std::cerr << "dropped " << corpus.dropped << " pairs with an empty side\n";
    if (a.tags) nmtlab::corpus::attach_tags(corpus.corpus, nmtlab::corpus::load_tagged(*a.tags));
    else if (a.pos) throw nmtlab::Error("--pos needs --tags");
    const auto tokenized = nn::tokenize_corpus(corpus.corpus, merges, vocab);

    nn::TrainOptions opts;
    opts.steps = a.steps;
    opts.seed = a.seed;
    opts.log_every = a.log_every;
    opts.batch_sentences = a.batch_sentences;
    opts.batch_tokens = a.batch_tokens;
    opts.on_log = [](const nn::LossPoint& p) { std::cerr << "step " << p.step << " loss " << p.loss << '\n'; };

    std::optional<nn::Trainer> trainer;
    long todo = a.steps;
    if (a.resume) {
        nn::Checkpoint ck = nn::load_checkpoint(*a.resume);
        todo = std::max(0L, a.steps - ck.step);
        trainer.emplace(std::move(ck), tokenized, opts);
    } else {
        nn::ModelConfig cfg;
        cfg.arch = nn::parse_arch(a.arch);
        cfg.d_model = a.d_model;
        cfg.n_layers = a.layers;
        cfg.n_heads = a.heads;
        cfg.dropout = a.dropout;
        cfg.use_pos = a.pos;
        if (a.pos_mode == "carve") cfg.pos_mode = nn::PosMode::carve;
        else if (a.pos_mode == "concat") cfg.pos_mode = nn::PosMode::concat;
        else throw nmtlab::Error("unknown --pos-mode '" + a.pos_mode + "'");
        cfg.vocab_size = vocab.size();
        auto hyper = cfg.arch == nn::Arch::lstm ? nn::OptimizerHyper::lstm_default()
                                                : nn::OptimizerHyper::transformer_default();
        if (a.eta) hyper.eta = *a.eta;
        trainer.emplace(cfg, hyper, tokenized, vocab, opts);
    }
    trainer->run(todo);
    nn::Checkpoint ck = trainer->checkpoint();
    nn::attach_assets(ck, merges, vocab);
    nn::save_checkpoint(ck, a.out);
    return 0;
}

struct TranslateArgs {
    std::string ckpt, input;
    std::optional<std::string> tags, output;
    int beam = 1;
    double alpha = 0.0;
};

int run_translate(const TranslateArgs& a) {
    nn::Translator translator(nn::load_checkpoint(a.ckpt));
    const auto sentences = read_tokenized(a.input);
    std::vector<nmtlab::corpus::TaggedSentence> tagged;
    if (a.tags) {
        tagged = nmtlab::corpus::load_tagged(*a.tags);
        if (tagged.size() != sentences.size())
            throw nmtlab::AlignmentError(sentences.size(), tagged.size());
    }
    const nn::Strategy strategy{a.beam, a.alpha};
    std::string text;
    for (std::size_t i = 0; i < sentences.size(); ++i) {
        std::optional<nmtlab::subword::Tokens> tags;
        if (a.tags) {
            if (tagged[i].words != sentences[i])
                throw nmtlab::Error("tags do not match input sentence " + std::to_string(i + 1));
            tags = tagged[i].tags;
        }
        text += nmtlab::text::join(translator.translate(sentences[i], tags, strategy), " ") + "\n";
    }
    if (a.output) nmtlab::text::write_file(*a.output, text);
    else std::cout << text;
    return 0;
}

int run_bleu(const std::string& hyp, const std::string& ref) {
    const auto r = nmtlab::metrics::corpus_bleu(read_tokenized(hyp), read_tokenized(ref));
    print({{"score", r.score},
           {"bleu", 100.0 * r.score},
           {"precisions", r.precisions},
           {"matches", r.matches},
           {"totals", r.totals},
           {"brevity_penalty", r.brevity_penalty},
           {"hyp_len", r.hyp_len},
           {"ref_len", r.ref_len}});
    return 0;
}

int run_registry_column(const std::string& name, std::optional<int> group) {
    const auto& reg = nmtlab::corpus::builtin_registry();
    for (const auto& p : reg.languages) {
        if (group && nmtlab::corpus::word_order_group(p) != *group) continue;
        std::optional<double> v;
        if (name == "levenshtein") v = p.levenshtein;
        else if (name == "bleu_lstm") v = p.bleu_lstm;
        else if (name == "bleu_transformer") v = p.bleu_transformer;
        else if (name == "n_train") v = static_cast<double>(p.n_train);
        else if (name == "n_test") v = static_cast<double>(p.n_test);
        else if (name == "group") v = nmtlab::corpus::word_order_group(p);
        else throw nmtlab::Error("unknown column '" + name + "'");
        if (v) std::cout << json(*v).dump() << '\n';
    }
    return 0;
}

struct ReportArgs {
    std::optional<std::string> config, out, csv;
    bool registry = false;
    std::vector<std::string> svgs;
};

int run_report(const ReportArgs& a) {
    nmtlab::harness::ExperimentConfig cfg = a.config ? nmtlab::harness::ExperimentConfig::load(*a.config)
                                                     : nmtlab::harness::ExperimentConfig::registry_default();
    if (a.registry) cfg.registry = true;
    if (!cfg.registry && !a.config) throw nmtlab::Error("--config is required unless --registry is given");
    const auto report = nmtlab::harness::run_experiment(cfg);

    const std::string js = nmtlab::harness::emit_report(report, nmtlab::harness::Format::json);
    if (a.out) nmtlab::text::write_file(*a.out, js);
    else std::cout << js;
    if (a.csv) nmtlab::text::write_file(*a.csv, nmtlab::harness::emit_report(report, nmtlab::harness::Format::csv));

    for (std::size_t i = 0; i < a.svgs.size(); ++i) {
        if (i >= report.statistics.size()) throw nmtlab::Error("more --svg paths than architectures");
        const std::string& arch = report.statistics[i].arch;
        const auto fig = nmtlab::harness::figure_for(report, arch);
        nmtlab::text::write_file(a.svgs[i], fig.by_distance);
        std::filesystem::path order(a.svgs[i]);
        order.replace_extension(".order.svg");
        nmtlab::text::write_file(order.string(), fig.by_group);
    }
    for (const auto& l : report.languages)
        if (l.failure) std::cerr << l.code << ": failed at " << l.failure->stage << ": " << l.failure->message << '\n';
    return report.ok() ? 0 : 2;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nmtlab: word-order and lexical-similarity experiments for toy NMT"};
    app.require_subcommand(1);
    int status = 0;

    LexsimArgs lx;
    auto* lexsim = app.add_subcommand("lexsim", "normalized Levenshtein distance of a parallel corpus");
    lexsim->add_option("--src", lx.src, "source sentences")->required()->check(CLI::ExistingFile);
    lexsim->add_option("--tgt", lx.tgt, "target sentences")->required()->check(CLI::ExistingFile);
    lexsim->add_option("--mode", lx.mode, "mean|weighted");
    lexsim->add_option("--sample", lx.sample, "measure a seeded sample of N pairs");
    lexsim->add_option("--seed", lx.seed);
    lexsim->callback([&] { status = run_lexsim(lx); });

    auto* bpe = app.add_subcommand("bpe", "byte pair encoding");
    bpe->require_subcommand(1);
    BpeLearnArgs bl;
    auto* learn = bpe->add_subcommand("learn", "learn merges from tokenized text");
    learn->add_option("--input", bl.inputs)->required()->check(CLI::ExistingFile);
    learn->add_option("--merges", bl.merges, "number of merges");
    learn->add_option("--out", bl.out)->required();
    learn->callback([&] { status = run_bpe_learn(bl); });
    BpeApplyArgs ba;
    auto* apply = bpe->add_subcommand("apply", "split tokenized text into subwords");
    apply->add_option("--codes", ba.codes)->required()->check(CLI::ExistingFile);
    apply->add_option("--input", ba.input)->required()->check(CLI::ExistingFile);
    apply->add_option("--out", ba.out)->required();
    apply->callback([&] { status = run_bpe_apply(ba); });

    VocabArgs va;
    auto* vocab = app.add_subcommand("vocab", "build a subword vocabulary");
    vocab->add_option("--input", va.inputs)->required()->check(CLI::ExistingFile);
    vocab->add_option("--codes", va.codes)->required()->check(CLI::ExistingFile);
    vocab->add_option("--min-freq", va.min_freq);
    vocab->add_option("--out", va.out)->required();
    vocab->callback([&] { status = run_vocab(va); });

    TrainArgs ta;
    auto* train = app.add_subcommand("train", "train a model");
    train->add_option("--arch", ta.arch, "lstm|transformer")->check(CLI::IsMember({"lstm", "transformer"}));
    train->add_flag("--pos", ta.pos, "add source POS embeddings");
    train->add_option("--pos-mode", ta.pos_mode, "carve|concat");
    train->add_option("--train-src", ta.src)->required()->check(CLI::ExistingFile);
    train->add_option("--train-tgt", ta.tgt)->required()->check(CLI::ExistingFile);
    train->add_option("--tags", ta.tags)->check(CLI::ExistingFile);
    train->add_option("--codes", ta.codes)->required()->check(CLI::ExistingFile);
    train->add_option("--vocab", ta.vocab)->required()->check(CLI::ExistingFile);
    train->add_option("--steps", ta.steps);
    train->add_option("--seed", ta.seed);
    train->add_option("--out", ta.out)->required();
    train->add_option("--resume", ta.resume, "continue from a checkpoint up to --steps")->check(CLI::ExistingFile);
    train->add_option("--d-model", ta.d_model);
    train->add_option("--layers", ta.layers);
    train->add_option("--heads", ta.heads);
    train->add_option("--dropout", ta.dropout);
    train->add_option("--eta", ta.eta, "learning-rate multiplier");
    train->add_option("--batch-sentences", ta.batch_sentences);
    train->add_option("--batch-tokens", ta.batch_tokens);
    train->add_option("--log-every", ta.log_every);
    train->callback([&] { status = run_train(ta); });

    TranslateArgs tr;
    auto* translate = app.add_subcommand("translate", "decode with a checkpoint");
    translate->add_option("--ckpt", tr.ckpt)->required()->check(CLI::ExistingFile);
    translate->add_option("--input", tr.input)->required()->check(CLI::ExistingFile);
    translate->add_option("--tags", tr.tags, "tagged input for POS models")->check(CLI::ExistingFile);
    translate->add_option("--beam", tr.beam)->check(CLI::PositiveNumber);
    translate->add_option("--alpha", tr.alpha)->check(CLI::NonNegativeNumber);
    translate->add_option("--output", tr.output);
    translate->callback([&] { status = run_translate(tr); });

    std::string hyp, ref;
    auto* bleu = app.add_subcommand("bleu", "corpus BLEU");
    bleu->add_option("--hyp", hyp)->required()->check(CLI::ExistingFile);
    bleu->add_option("--ref", ref)->required()->check(CLI::ExistingFile);
    bleu->callback([&] { status = run_bleu(hyp, ref); });

    auto* st = app.add_subcommand("stats", "statistical tests on one-number-per-line files");
    st->require_subcommand(1);
    std::string sx, sy, alt = "less", data;
    double mu0 = 0.0;
    auto* mww = st->add_subcommand("mww", "one-sided Mann-Whitney-Wilcoxon test");
    mww->add_option("--x", sx)->required()->check(CLI::ExistingFile);
    mww->add_option("--y", sy)->required()->check(CLI::ExistingFile);
    mww->add_option("--alt", alt, "less|greater")->check(CLI::IsMember({"less", "greater"}));
    mww->callback([&] {
        const auto r = nmtlab::stats::mww_one_sided(read_numbers(sx), read_numbers(sy),
                                                    alt == "less" ? nmtlab::stats::Alternative::x_less
                                                                  : nmtlab::stats::Alternative::x_greater);
        print(mww_json(r));
    });
    auto* pearson = st->add_subcommand("pearson", "Pearson correlation");
    pearson->add_option("--x", sx)->required()->check(CLI::ExistingFile);
    pearson->add_option("--y", sy)->required()->check(CLI::ExistingFile);
    pearson->callback([&] {
        const auto r = nmtlab::stats::pearson(read_numbers(sx), read_numbers(sy));
        print({{"r", r.r}, {"p_value", r.p_value}, {"n", r.n}});
    });
    auto* ttest = st->add_subcommand("ttest", "one-sample two-sided t-test");
    ttest->add_option("--data", data)->required()->check(CLI::ExistingFile);
    ttest->add_option("--mu0", mu0);
    ttest->callback([&] {
        const auto r = nmtlab::stats::one_sample_t(read_numbers(data), mu0);
        print({{"mean_diff", r.mean_diff}, {"t", r.t}, {"p_value", r.p_value}, {"dof", r.dof}});
    });
    auto* ols = st->add_subcommand("ols", "least-squares line");
    ols->add_option("--x", sx)->required()->check(CLI::ExistingFile);
    ols->add_option("--y", sy)->required()->check(CLI::ExistingFile);
    ols->callback([&] {
        const auto r = nmtlab::stats::ols_fit(read_numbers(sx), read_numbers(sy));
        print({{"slope", r.slope}, {"intercept", r.intercept}, {"r_squared", r.r_squared}});
    });

    auto* registry = app.add_subcommand("registry", "print the built-in language table");
    std::optional<std::string> column;
    std::optional<int> group;
    registry->add_option("--column", column,
                         "print one column, one value per line "
                         "(levenshtein|bleu_lstm|bleu_transformer|n_train|n_test|group)");
    registry->add_option("--group", group, "only languages of this word-order group")->check(CLI::Range(1, 3));
    registry->callback([&] {
        if (column) status = run_registry_column(*column, group);
        else std::cout << nmtlab::corpus::builtin_registry_json();
    });

    ReportArgs ra;
    auto* report = app.add_subcommand("report", "run the experiment and write reports");
    report->add_option("--config", ra.config, "experiment config (exp.json)")->check(CLI::ExistingFile);
    report->add_flag("--registry", ra.registry, "use the built-in table instead of training");
    report->add_option("--out", ra.out, "report JSON (stdout when absent)");
    report->add_option("--csv", ra.csv);
    report->add_option("--svg", ra.svgs, "one figure per architecture, in config order");
    report->callback([&] { status = run_report(ra); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "nmtlab: error: " << e.what() << '\n';
        return 1;
    }
    return status;
}
