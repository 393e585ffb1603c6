#pragma once

#include "nmtlab/corpus.hpp"
#include "nmtlab/lexsim.hpp"
#include "nmtlab/nnet/decode.hpp"
#include "nmtlab/nnet/model.hpp"
#include "nmtlab/nnet/optim.hpp"
#include "nmtlab/registry.hpp"
#include "nmtlab/stats.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace nmtlab::harness {

struct LanguageSpec {
    std::string code;
    std::string source;  // one sentence per line
    std::string target;
    std::optional<std::string> tags;  // "form<TAB>TAG" per source word
    std::optional<std::string> word_order;  // defaults to the built-in registry entry
    std::optional<double> levenshtein;      // overrides the measured distance
};

// One architecture's baseline/POS pair. The two configs differ only in use_pos.
struct ArchSetup {
    nnet::ModelConfig baseline;
    nnet::ModelConfig pos;
    nnet::OptimizerHyper hyper;

    static ArchSetup from_base(nnet::ModelConfig base, nnet::OptimizerHyper hyper);
};

struct ExperimentConfig {
    std::vector<LanguageSpec> languages;
    std::vector<ArchSetup> archs;
    long steps = 300;
    std::uint64_t seed = 0;
    std::string output_dir;  // empty: keep nothing on disk
    std::size_t bpe_merges = 500;
    std::size_t vocab_min_freq = 1;
    corpus::SplitRatios split{0.8, 0.1, 0.1};
    nnet::Strategy decoding;
    int batch_sentences = 32;
    int batch_tokens = 512;
    lexsim::Mode lexsim_mode = lexsim::Mode::mean;
    std::optional<std::size_t> lexsim_sample;
    bool registry = false;  // use the built-in table instead of training

    void validate() const;
    nlohmann::json to_json() const;
    // Relative corpus paths resolve against base_dir.
    static ExperimentConfig from_json(const nlohmann::json& j, const std::string& base_dir = "");
    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig registry_default();
};

struct ArchScores {
    std::optional<double> bleu_baseline;  // BLEU x 100
    std::optional<double> bleu_pos;
    std::optional<double> delta_percent;  // 100 (pos - baseline) / baseline
    std::string delta_note;               // why delta_percent is absent

    bool operator==(const ArchScores&) const = default;
};

struct Failure {
    std::string stage;
    std::string message;

    bool operator==(const Failure&) const = default;
};

struct LanguageRecord {
    std::string code;
    std::string word_order;
    int group = 0;
    double levenshtein = 0.0;
    long n_train = 0;
    long n_test = 0;
    std::optional<long> source_types;  // distinct source words
    std::map<std::string, ArchScores> scores;  // by arch name
    std::optional<Failure> failure;

    bool operator==(const LanguageRecord&) const = default;
};

// Either a result or the reason it was not computed.
template <typename R>
struct Stat {
    std::optional<R> result;
    std::string skipped;

    static Stat skip(std::string why) { return {std::nullopt, std::move(why)}; }
};

struct MwwEntry {
    int group_x = 0;  // x_less: is group_x below group_y?
    int group_y = 0;
    Stat<stats::MwwResult> test;
};

struct ArchStatistics {
    std::string arch;
    std::array<MwwEntry, 3> baseline_order;     // groups (1,2), (2,3), (1,3) on baseline BLEU
    std::array<MwwEntry, 3> improvement_order;  // the same on delta_percent
    Stat<stats::CorrResult> levenshtein_bleu;
    Stat<stats::CorrResult> levenshtein_delta;
    Stat<stats::TTestResult> delta_ttest;       // deltas against 0
    Stat<stats::FitResult> levenshtein_bleu_fit;
    Stat<stats::FitResult> levenshtein_delta_fit;
    Stat<stats::CorrResult> n_test_bleu;
    Stat<stats::FitResult> n_test_bleu_fit;
    Stat<stats::CorrResult> source_types_bleu;
    Stat<stats::FitResult> source_types_bleu_fit;
};

struct EvalReport {
    std::string mode;  // "registry" or "experiment"
    std::uint64_t seed = 0;
    std::vector<LanguageRecord> languages;
    std::vector<ArchStatistics> statistics;

    bool ok() const;
    nlohmann::json to_json() const;
    static EvalReport from_json(const nlohmann::json& j);
    // Every floating value rounded to 6 significant digits, as emitted.
    EvalReport canonical() const;
};

bool operator==(const EvalReport& a, const EvalReport& b);

// Rounds to 6 significant digits.
double round6(double x);

// Runs every language, then the statistics over whatever BLEU columns exist.
EvalReport run_experiment(const ExperimentConfig& config);

// Statistics only, from filled-in records.
std::vector<ArchStatistics> compute_statistics(const std::vector<LanguageRecord>& records,
                                               const std::vector<std::string>& archs);

// Built-in registry rows as records with baseline BLEU and no POS column.
std::vector<LanguageRecord> registry_records(const corpus::Registry& registry);

enum class Format { json, csv };
std::string emit_report(const EvalReport& report, Format format);
EvalReport parse_report_json(const std::string& text);
// Language rows of an emitted CSV, for checking what a reader gets back.
std::vector<LanguageRecord> parse_report_csv(const std::string& text, const std::vector<std::string>& archs);

struct ScatterPoint {
    double x;
    double y;
    int group;  // 1..3
    std::string label;
};

struct PlotLabels {
    std::string title;
    std::string x;
    std::string y;
};

// Self-contained SVG: axes with ticks, one circle per point shaded by group, the
// dashed fit line across the x-range, and a legend.
std::string plot_scatter(const std::vector<ScatterPoint>& points, const stats::FitResult& fit,
                         const PlotLabels& labels);

// The two figure variants for one architecture: x = Levenshtein distance and
// x = word-order group. y is delta_percent when every scored language has one,
// otherwise baseline BLEU.
struct Figure {
    std::string by_distance;
    std::string by_group;
};
Figure figure_for(const EvalReport& report, const std::string& arch);

} // namespace nmtlab::harness
