#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace nmtlab::corpus {

using Tokens = std::vector<std::string>;

struct SentencePair {
    Tokens source;
    Tokens target;
    // Per-source-word POS tags, same length as `source` when present.
    std::optional<Tokens> source_tags;

    bool operator==(const SentencePair&) const = default;
};

struct ParallelCorpus {
    std::vector<SentencePair> pairs;
    std::string source_lang;
    std::string target_lang;

    std::size_t size() const { return pairs.size(); }
    bool empty() const { return pairs.empty(); }
};

struct LoadResult {
    ParallelCorpus corpus;
    std::size_t dropped = 0;  // pairs with an empty side after trimming
};

// Reads two line-aligned UTF-8 files. Pairs with an empty side are dropped and
// counted. Throws AlignmentError on line-count mismatch and DecodeError (with
// the 1-based line number) on invalid UTF-8.
LoadResult load_parallel(const std::string& src_path, const std::string& tgt_path,
                         const std::string& src_lang, const std::string& tgt_lang);

// Same as load_parallel, but over in-memory line lists.
LoadResult parallel_from_lines(const std::vector<std::string>& src_lines,
                               const std::vector<std::string>& tgt_lines,
                               const std::string& src_lang, const std::string& tgt_lang);

struct TaggedSentence {
    Tokens words;
    Tokens tags;

    bool operator==(const TaggedSentence&) const = default;
};

// Parses "form<TAB>TAG" lines with blank lines between sentences.
std::vector<TaggedSentence> parse_tagged(const std::string& contents);
std::vector<TaggedSentence> load_tagged(const std::string& path);

// Attaches tags to the source side. Sentence count and per-sentence words must
// match the corpus exactly.
void attach_tags(ParallelCorpus& corpus, const std::vector<TaggedSentence>& tagged);

// Splits by (train, valid, test) fractions. Sizes come from largest-remainder
// rounding; membership from a seeded shuffle; each part keeps file order.
struct Split {
    ParallelCorpus train;
    ParallelCorpus valid;
    ParallelCorpus test;
};

struct SplitRatios {
    double train;
    double valid;
    double test;
};

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios);
Split split_corpus(const ParallelCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed);

} // namespace nmtlab::corpus
