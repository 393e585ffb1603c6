#include "nmtlab/harness.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/metrics.hpp"
#include "nmtlab/nnet/train.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/subword.hpp"
#include "nmtlab/text.hpp"

#include <algorithm>
#include <filesystem>
#include <set>

namespace nmtlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

ArchSetup ArchSetup::from_base(nnet::ModelConfig base, nnet::OptimizerHyper hyper) {
    ArchSetup a;
    a.baseline = base;
    a.baseline.use_pos = false;
    a.pos = base;
    a.pos.use_pos = true;
    a.hyper = hyper;
    return a;
}

namespace {

nnet::OptimizerHyper default_hyper(nnet::Arch arch) {
    return arch == nnet::Arch::lstm ? nnet::OptimizerHyper::lstm_default()
                                    : nnet::OptimizerHyper::transformer_default();
}

std::string resolve(const std::string& base_dir, const std::string& path) {
    if (base_dir.empty() || fs::path(path).is_absolute()) return path;
    return (fs::path(base_dir) / path).lexically_normal().string();
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

lexsim::Mode parse_mode(const std::string& s) {
    if (s == "mean") return lexsim::Mode::mean;
    if (s == "length_weighted") return lexsim::Mode::length_weighted;
    throw Error("unknown lexsim mode '" + s + "'");
}

template <typename R, typename F>
Stat<R> attempt(F&& f) {
    try {
        return {f(), ""};
    } catch (const Error& e) {
        return Stat<R>::skip(e.what());
    }
}

std::array<MwwEntry, 3> group_tests(const std::map<int, std::vector<double>>& groups) {
    static constexpr std::array<std::pair<int, int>, 3> kPairs{{{1, 2}, {2, 3}, {1, 3}}};
    std::array<MwwEntry, 3> out;
    for (std::size_t i = 0; i < 3; ++i) {
        auto [gx, gy] = kPairs[i];
        out[i].group_x = gx;
        out[i].group_y = gy;
        const auto ix = groups.find(gx);
        const auto iy = groups.find(gy);
        const std::size_t nx = ix == groups.end() ? 0 : ix->second.size();
        const std::size_t ny = iy == groups.end() ? 0 : iy->second.size();
        if (nx < 2 || ny < 2) {
            out[i].test = Stat<stats::MwwResult>::skip("needs at least 2 languages per group (group " +
                                                       std::to_string(gx) + ": " + std::to_string(nx) + ", group " +
                                                       std::to_string(gy) + ": " + std::to_string(ny) + ")");
            continue;
        }
        out[i].test = attempt<stats::MwwResult>(
            [&] { return stats::mww_one_sided(ix->second, iy->second, stats::Alternative::x_less); });
    }
    return out;
}

struct Pipeline {
    const ExperimentConfig& cfg;
    const corpus::Registry& registry;

    void persist(const fs::path& dir, const std::string& name, const std::string& contents) const {
        if (cfg.output_dir.empty()) return;
        fs::create_directories(dir);
        text::write_file((dir / name).string(), contents);
    }

    LanguageRecord run(const LanguageSpec& spec) const {
        LanguageRecord rec;
        rec.code = spec.code;
        for (const auto& a : cfg.archs) rec.scores[nnet::arch_name(a.baseline.arch)] = {};
        const fs::path dir = fs::path(cfg.output_dir) / spec.code;
        std::string stage = "ingest";
        try {
            corpus::WordOrder order;
            if (spec.word_order) {
                order = corpus::WordOrder::parse(*spec.word_order);
            } else if (const auto* p = registry.find(spec.code)) {
                order = p->word_order;
            } else {
                throw Error("no word order given for '" + spec.code + "' and none in the registry");
            }
            rec.word_order = order.to_string();
            rec.group = corpus::word_order_group(order);

            corpus::ParallelCorpus pc = corpus::load_parallel(spec.source, spec.target, "en", spec.code).corpus;
            std::set<std::string> types;
            for (const auto& p : pc.pairs) types.insert(p.source.begin(), p.source.end());
            rec.source_types = static_cast<long>(types.size());

            if (spec.tags) {
                stage = "tags";
                corpus::attach_tags(pc, corpus::load_tagged(*spec.tags));
            }

            stage = "lexsim";
            rec.levenshtein = spec.levenshtein
                                  ? *spec.levenshtein
                                  : lexsim::corpus_distance(pc, cfg.lexsim_mode,
                                                            cfg.lexsim_sample
                                                                ? std::optional<lexsim::Sample>(lexsim::Sample{
                                                                      *cfg.lexsim_sample, derive_seed(lang_seed(spec), 2)})
                                                                : std::nullopt)
                                        .normalized;

            stage = "split";
            const corpus::Split split = corpus::split_corpus(pc, cfg.split, derive_seed(lang_seed(spec), 1));
            rec.n_train = static_cast<long>(split.train.size());
            rec.n_test = static_cast<long>(split.test.size());
            if (split.train.empty() || split.test.empty()) throw Error("train or test split is empty");

            stage = "bpe";
            std::vector<subword::Tokens> sentences;
            for (const auto& p : split.train.pairs) {
                sentences.push_back(p.source);
                sentences.push_back(p.target);
            }
            const subword::MergeTable merges = subword::learn_bpe(sentences, cfg.bpe_merges);
            std::vector<subword::Tokens> pieces;
            for (const auto& s : sentences) pieces.push_back(subword::apply_bpe(merges, s));
            const subword::Vocab vocab = subword::build_vocab(pieces, cfg.vocab_min_freq);
            persist(dir, "bpe.codes", merges.serialize());
            persist(dir, "vocab.json", vocab.to_json());

            stage = "tokenize";
            const nnet::TokenizedCorpus train = nnet::tokenize_corpus(split.train, merges, vocab);

            std::vector<metrics::Tokens> refs;
            for (const auto& p : split.test.pairs) refs.push_back(p.target);

            for (std::size_t ai = 0; ai < cfg.archs.size(); ++ai) {
                const ArchSetup& setup = cfg.archs[ai];
                const std::string arch = nnet::arch_name(setup.baseline.arch);
                ArchScores& scores = rec.scores[arch];
                for (int variant = 0; variant < 2; ++variant) {
                    const bool pos = variant == 1;
                    const std::string tag = arch + (pos ? ".pos" : ".baseline");
                    if (pos && !spec.tags) {
                        scores.delta_note = "no POS tags for this language";
                        continue;
                    }
                    stage = "train:" + tag;
                    nnet::ModelConfig mc = pos ? setup.pos : setup.baseline;
                    mc.vocab_size = vocab.size();
                    nnet::TrainOptions opts;
                    opts.steps = cfg.steps;
                    opts.seed = derive_seed(lang_seed(spec), 16 + 2 * ai + static_cast<std::size_t>(variant));
                    opts.log_every = 0;
                    opts.batch_sentences = cfg.batch_sentences;
                    opts.batch_tokens = cfg.batch_tokens;
                    nnet::TrainResult tr = nnet::train(train, vocab, mc, setup.hyper, opts);
                    nnet::attach_assets(tr.checkpoint, merges, vocab);
                    if (!cfg.output_dir.empty()) {
                        fs::create_directories(dir);
                        nnet::save_checkpoint(tr.checkpoint, (dir / (tag + ".ckpt")).string());
                    }

                    stage = "translate:" + tag;
                    nnet::Translator translator(std::move(tr.checkpoint), merges, vocab);
                    std::vector<metrics::Tokens> hyps;
                    std::string hyp_text;
                    for (const auto& p : split.test.pairs) {
                        hyps.push_back(translator.translate(p.source, pos ? p.source_tags : std::nullopt,
                                                            cfg.decoding));
                        hyp_text += text::join(hyps.back(), " ") + "\n";
                    }
                    persist(dir, tag + ".hyp", hyp_text);

                    stage = "bleu:" + tag;
                    const double bleu = 100.0 * metrics::corpus_bleu(hyps, refs).score;
                    (pos ? scores.bleu_pos : scores.bleu_baseline) = bleu;
                }
                if (scores.bleu_baseline && scores.bleu_pos) {
                    if (*scores.bleu_baseline > 0.0) {
                        scores.delta_percent =
                            100.0 * (*scores.bleu_pos - *scores.bleu_baseline) / *scores.bleu_baseline;
                    } else {
                        scores.delta_note = "baseline BLEU is 0";
                    }
                }
            }
        } catch (const std::exception& e) {
            rec.failure = Failure{stage, e.what()};
        }
        if (!cfg.output_dir.empty()) {
            EvalReport one;
            one.mode = "experiment";
            one.seed = cfg.seed;
            one.languages.push_back(rec);
            try {
                persist(dir, "record.json", one.to_json().dump(2) + "\n");
            } catch (const std::exception&) {
                // the in-memory record still reaches the report
            }
        }
        return rec;
    }

    std::uint64_t lang_seed(const LanguageSpec& spec) const { return derive_seed(cfg.seed, fnv1a(spec.code)); }
};

} // namespace

void ExperimentConfig::validate() const {
    if (steps < 0) throw Error("steps must be non-negative");
    if (archs.empty() && !registry) throw Error("no architectures configured");
    std::set<std::string> seen_arch;
    for (const auto& a : archs) {
        // vocab_size is only known after BPE
        for (nnet::ModelConfig m : {a.baseline, a.pos}) {
            m.vocab_size = std::max(m.vocab_size, subword::Vocab::kNumSpecials + 1);
            m.validate();
        }
        a.hyper.validate();
        if (a.baseline.use_pos || !a.pos.use_pos) throw Error("baseline must have use_pos off and POS model on");
        nnet::ModelConfig probe = a.pos;
        probe.use_pos = false;
        if (!(probe == a.baseline)) throw Error("baseline and POS configs may differ only in use_pos");
        if (!seen_arch.insert(nnet::arch_name(a.baseline.arch)).second)
            throw Error("architecture listed twice: " + nnet::arch_name(a.baseline.arch));
    }
    std::set<std::string> codes;
    for (const auto& l : languages) {
        if (l.code.empty()) throw Error("language without code");
        if (l.code.find_first_of("/\\,. ") != std::string::npos) throw Error("bad language code '" + l.code + "'");
        if (!codes.insert(l.code).second) throw Error("language listed twice: " + l.code);
    }
    if (decoding.beam_size < 1) throw Error("beam size must be at least 1");
    if (batch_sentences < 1 || batch_tokens < 1) throw Error("batch sizes must be positive");
}

json ExperimentConfig::to_json() const {
    json langs = json::array();
    for (const auto& l : languages) {
        json j = {{"code", l.code}, {"source", l.source}, {"target", l.target}};
        if (l.tags) j["tags"] = *l.tags;
        if (l.word_order) j["word_order"] = *l.word_order;
        if (l.levenshtein) j["levenshtein"] = *l.levenshtein;
        langs.push_back(std::move(j));
    }
    json archs_j = json::array();
    for (const auto& a : archs) archs_j.push_back({{"model", a.baseline.to_json()}, {"optimizer", a.hyper.to_json()}});
    json j = {{"seed", seed},
              {"steps", steps},
              {"output_dir", output_dir},
              {"registry", registry},
              {"bpe_merges", bpe_merges},
              {"vocab_min_freq", vocab_min_freq},
              {"split", {{"train", split.train}, {"valid", split.valid}, {"test", split.test}}},
              {"decoding", {{"beam", decoding.beam_size}, {"alpha", decoding.length_penalty}}},
              {"batch", {{"sentences", batch_sentences}, {"tokens", batch_tokens}}},
              {"lexsim",
               {{"mode", lexsim_mode == lexsim::Mode::mean ? "mean" : "length_weighted"},
                {"sample", lexsim_sample ? json(*lexsim_sample) : json(nullptr)}}},
              {"architectures", std::move(archs_j)},
              {"languages", std::move(langs)}};
    return j;
}

ExperimentConfig ExperimentConfig::from_json(const json& j, const std::string& base_dir) {
    if (!j.is_object()) throw ParseError("experiment config must be a JSON object");
    static const std::set<std::string> kKeys{"seed",   "steps",  "output_dir", "registry", "bpe_merges",
                                             "vocab_min_freq", "split", "decoding", "batch", "lexsim",
                                             "architectures", "languages"};
    for (const auto& [k, _] : j.items())
        if (!kKeys.count(k)) throw ParseError("experiment config: unknown key '" + k + "'");

    ExperimentConfig c;
    c.seed = j.value("seed", c.seed);
    c.steps = j.value("steps", c.steps);
    c.output_dir = j.contains("output_dir") ? resolve(base_dir, j.at("output_dir").get<std::string>()) : "";
    c.registry = j.value("registry", false);
    c.bpe_merges = j.value("bpe_merges", c.bpe_merges);
    c.vocab_min_freq = j.value("vocab_min_freq", c.vocab_min_freq);
    if (j.contains("split")) {
        const auto& s = j.at("split");
        c.split = {s.at("train").get<double>(), s.at("valid").get<double>(), s.at("test").get<double>()};
    }
    if (j.contains("decoding")) {
        c.decoding.beam_size = j.at("decoding").value("beam", 1);
        c.decoding.length_penalty = j.at("decoding").value("alpha", 0.0);
    }
    if (j.contains("batch")) {
        c.batch_sentences = j.at("batch").value("sentences", c.batch_sentences);
        c.batch_tokens = j.at("batch").value("tokens", c.batch_tokens);
    }
    if (j.contains("lexsim")) {
        c.lexsim_mode = parse_mode(j.at("lexsim").value("mode", std::string("mean")));
        if (j.at("lexsim").contains("sample") && !j.at("lexsim").at("sample").is_null())
            c.lexsim_sample = j.at("lexsim").at("sample").get<std::size_t>();
    }
    if (j.contains("architectures")) {
        for (const auto& ja : j.at("architectures")) {
            json model = ja.at("model");
            const nnet::ModelConfig base = nnet::ModelConfig::from_json(model);
            json hyper = default_hyper(base.arch).to_json();
            if (ja.contains("optimizer")) hyper.merge_patch(ja.at("optimizer"));
            c.archs.push_back(ArchSetup::from_base(base, nnet::OptimizerHyper::from_json(hyper)));
        }
    } else {
        for (nnet::Arch a : {nnet::Arch::lstm, nnet::Arch::transformer}) {
            nnet::ModelConfig m;
            m.arch = a;
            c.archs.push_back(ArchSetup::from_base(m, default_hyper(a)));
        }
    }
    for (const auto& jl : j.value("languages", json::array())) {
        LanguageSpec l;
        l.code = jl.at("code").get<std::string>();
        l.source = resolve(base_dir, jl.at("source").get<std::string>());
        l.target = resolve(base_dir, jl.at("target").get<std::string>());
        if (jl.contains("tags")) l.tags = resolve(base_dir, jl.at("tags").get<std::string>());
        if (jl.contains("word_order")) l.word_order = jl.at("word_order").get<std::string>();
        if (jl.contains("levenshtein")) l.levenshtein = jl.at("levenshtein").get<double>();
        c.languages.push_back(std::move(l));
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    json j;
    try {
        j = json::parse(text::read_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path + ": " + e.what());
    }
    return from_json(j, fs::path(path).parent_path().string());
}

ExperimentConfig ExperimentConfig::registry_default() {
    ExperimentConfig c = from_json(json::object());
    c.registry = true;
    return c;
}

std::vector<LanguageRecord> registry_records(const corpus::Registry& registry) {
    std::vector<LanguageRecord> out;
    for (const auto& p : registry.languages) {
        LanguageRecord r;
        r.code = p.code;
        r.word_order = p.word_order.to_string();
        r.group = corpus::word_order_group(p);
        r.levenshtein = p.levenshtein;
        r.n_train = p.n_train;
        r.n_test = p.n_test;
        auto scores = [](const std::optional<double>& bleu) {
            ArchScores s;
            s.bleu_baseline = bleu;
            s.delta_note = "registry has no POS column";
            return s;
        };
        r.scores["lstm"] = scores(p.bleu_lstm);
        r.scores["transformer"] = scores(p.bleu_transformer);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ArchStatistics> compute_statistics(const std::vector<LanguageRecord>& records,
                                               const std::vector<std::string>& archs) {
    std::vector<ArchStatistics> out;
    for (const auto& arch : archs) {
        ArchStatistics st;
        st.arch = arch;
        std::map<int, std::vector<double>> bleu_groups, delta_groups;
        std::vector<double> lev_b, bleu, lev_d, delta, ntest_x, ntest_y, types_x, types_y;
        for (const auto& r : records) {
            const auto it = r.scores.find(arch);
            if (it == r.scores.end()) continue;
            const ArchScores& s = it->second;
            if (s.bleu_baseline) {
                bleu_groups[r.group].push_back(*s.bleu_baseline);
                lev_b.push_back(r.levenshtein);
                bleu.push_back(*s.bleu_baseline);
                if (r.n_test > 0) {
                    ntest_x.push_back(static_cast<double>(r.n_test));
                    ntest_y.push_back(*s.bleu_baseline);
                }
                if (r.source_types) {
                    types_x.push_back(static_cast<double>(*r.source_types));
                    types_y.push_back(*s.bleu_baseline);
                }
            }
            if (s.delta_percent) {
                delta_groups[r.group].push_back(*s.delta_percent);
                lev_d.push_back(r.levenshtein);
                delta.push_back(*s.delta_percent);
            }
        }
        st.baseline_order = group_tests(bleu_groups);
        st.improvement_order = group_tests(delta_groups);
        st.levenshtein_bleu = attempt<stats::CorrResult>([&] { return stats::pearson(lev_b, bleu); });
        st.levenshtein_delta = attempt<stats::CorrResult>([&] { return stats::pearson(lev_d, delta); });
        st.delta_ttest = attempt<stats::TTestResult>([&] { return stats::one_sample_t(delta, 0.0); });
        st.levenshtein_bleu_fit = attempt<stats::FitResult>([&] { return stats::ols_fit(lev_b, bleu); });
        st.levenshtein_delta_fit = attempt<stats::FitResult>([&] { return stats::ols_fit(lev_d, delta); });
        st.n_test_bleu = attempt<stats::CorrResult>([&] { return stats::pearson(ntest_x, ntest_y); });
        st.n_test_bleu_fit = attempt<stats::FitResult>([&] { return stats::ols_fit(ntest_x, ntest_y); });
        st.source_types_bleu = attempt<stats::CorrResult>([&] { return stats::pearson(types_x, types_y); });
        st.source_types_bleu_fit = attempt<stats::FitResult>([&] { return stats::ols_fit(types_x, types_y); });
        out.push_back(std::move(st));
    }
    return out;
}

EvalReport run_experiment(const ExperimentConfig& config) {
    config.validate();
    EvalReport report;
    report.seed = config.seed;
    std::vector<std::string> archs;
    if (config.registry) {
        report.mode = "registry";
        report.languages = registry_records(corpus::builtin_registry());
        archs = {"lstm", "transformer"};
    } else {
        report.mode = "experiment";
        for (const auto& a : config.archs) archs.push_back(nnet::arch_name(a.baseline.arch));
        const Pipeline pipeline{config, corpus::builtin_registry()};
        for (const auto& spec : config.languages) report.languages.push_back(pipeline.run(spec));
    }
    report.statistics = compute_statistics(report.languages, archs);
    return report;
}

Figure figure_for(const EvalReport& report, const std::string& arch) {
    std::vector<const LanguageRecord*> scored;
    bool all_delta = true;
    for (const auto& r : report.languages) {
        const auto it = r.scores.find(arch);
        if (it == r.scores.end() || !it->second.bleu_baseline) continue;
        scored.push_back(&r);
        all_delta = all_delta && it->second.delta_percent.has_value();
    }
    if (scored.empty()) throw Error("no scored languages for " + arch);

    std::vector<ScatterPoint> by_dist, by_group;
    for (const auto* r : scored) {
        const ArchScores& s = r->scores.at(arch);
        const double y = all_delta ? *s.delta_percent : *s.bleu_baseline;
        by_dist.push_back({r->levenshtein, y, r->group, r->code});
        by_group.push_back({static_cast<double>(r->group), y, r->group, r->code});
    }
    auto fit_of = [](const std::vector<ScatterPoint>& pts) {
        std::vector<double> xs, ys;
        for (const auto& p : pts) {
            xs.push_back(p.x);
            ys.push_back(p.y);
        }
        try {
            return stats::ols_fit(xs, ys);
        } catch (const Error&) {
            double mean = 0.0;
            for (double y : ys) mean += y;
            return stats::FitResult{0.0, mean / static_cast<double>(ys.size()), 0.0};
        }
    };
    const std::string y_label = all_delta ? "BLEU change with POS (%)" : "Baseline BLEU";
    const std::string title = arch + (all_delta ? ": POS improvement" : ": baseline BLEU");
    return {plot_scatter(by_dist, fit_of(by_dist), {title, "Normalized Levenshtein distance", y_label}),
            plot_scatter(by_group, fit_of(by_group), {title, "Word-order group", y_label})};
}

} // namespace nmtlab::harness
