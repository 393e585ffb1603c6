#pragma once

#include "nmtlab/nnet/train.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/subword.hpp"

#include <unistd.h>

#include <filesystem>
#include <string>
#include <vector>

namespace testing_support {

// One row of the published language table, typed in by hand.
struct LanguageRow {
    const char* code;
    const char* word_order;
    double levenshtein;
    long n_train;
    long n_test;
    double bleu_lstm;
    double bleu_transformer;
    int group;  // word-order group as published
};

inline const std::vector<LanguageRow>& language_rows() {
    static const std::vector<LanguageRow> rows = {
        {"si", "SOV", 0.642, 540990, 6075, 11.36, 12.76, 1},
        {"bn", "SOV", 0.632, 372240, 4138, 11.60, 13.41, 1},
        {"hi", "SOV", 0.632, 83700, 946, 22.26, 23.80, 1},
        {"ml", "SOV/FLEXIBLE", 0.708, 348120, 3936, 7.35, 8.12, 1},
        {"ko", "SOV/FLEXIBLE", 0.468, 1251990, 14001, 5.66, 6.85, 1},
        {"eu", "FLEXIBLE/SOV", 0.407, 725130, 8137, 14.98, 16.60, 1},
        {"ka", "FLEXIBLE", 0.621, 177910, 2077, 10.57, 11.79, 2},
        {"zh_cn", "FLEXIBLE", 0.519, 450000, 5000, 6.84, 7.73, 2},
        {"eo", "FLEXIBLE/SVO", 0.398, 57960, 729, 11.31, 12.65, 3},
        {"lv", "SVO/FLEXIBLE", 0.416, 467550, 5248, 17.63, 19.71, 3},
        {"gl", "SVO/FLEXIBLE", 0.390, 183150, 2085, 15.84, 17.86, 3},
        {"uk", "SVO", 0.539, 789930, 8857, 11.46, 13.61, 3},
        {"fr", "SVO", 0.386, 450000, 5000, 22.53, 23.95, 3},
        {"de", "SVO", 0.383, 450000, 5000, 19.43, 20.57, 3},
        {"ca", "SVO", 0.382, 434250, 4923, 27.30, 29.23, 3},
    };
    return rows;
}

struct Column {
    std::vector<double> levenshtein, lstm, transformer, n_test;
};

inline Column language_columns() {
    Column c;
    for (const auto& r : language_rows()) {
        c.levenshtein.push_back(r.levenshtein);
        c.lstm.push_back(r.bleu_lstm);
        c.transformer.push_back(r.bleu_transformer);
        c.n_test.push_back(static_cast<double>(r.n_test));
    }
    return c;
}

inline std::vector<double> group_bleu(int group, bool transformer) {
    std::vector<double> out;
    for (const auto& r : language_rows())
        if (r.group == group) out.push_back(transformer ? r.bleu_transformer : r.bleu_lstm);
    return out;
}

// Copy task: n sentences of 4..8 symbols drawn from `symbols` regular tokens,
// target identical to source.
struct CopyTask {
    nmtlab::subword::Vocab vocab;
    nmtlab::nnet::TokenizedCorpus corpus;
};

inline CopyTask copy_task(int n = 200, int symbols = 16, std::uint64_t seed = 42) {
    nmtlab::subword::Tokens toks;
    for (int i = 0; i < symbols; ++i) toks.push_back("w" + std::to_string(i));
    CopyTask t{nmtlab::subword::Vocab(toks), {}};
    t.corpus.vocab_fingerprint = t.vocab.fingerprint();
    nmtlab::Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        nmtlab::nnet::Example e;
        const int len = 4 + static_cast<int>(rng.below(5));
        for (int j = 0; j < len; ++j)
            e.src.push_back(nmtlab::subword::Vocab::kNumSpecials + static_cast<int>(rng.below(symbols)));
        e.tgt = e.src;
        t.corpus.examples.push_back(e);
    }
    return t;
}

// Random ids in the regular range of a vocab of size `vocab`; POS ids in 0..16.
inline std::vector<nmtlab::nnet::Example> random_batch(int count, int len, int vocab, bool pos, std::uint64_t seed) {
    nmtlab::Rng rng(seed);
    std::vector<nmtlab::nnet::Example> batch;
    const int regular = vocab - nmtlab::subword::Vocab::kNumSpecials;
    for (int i = 0; i < count; ++i) {
        nmtlab::nnet::Example e;
        for (int j = 0; j < len; ++j) {
            e.src.push_back(nmtlab::subword::Vocab::kNumSpecials + static_cast<int>(rng.below(regular)));
            e.tgt.push_back(nmtlab::subword::Vocab::kNumSpecials + static_cast<int>(rng.below(regular)));
            if (pos) e.src_pos.push_back(static_cast<int>(rng.below(17)));
        }
        batch.push_back(e);
    }
    return batch;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("nmtlab_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

} // namespace testing_support
