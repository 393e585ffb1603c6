#pragma once

#include "nmtlab/corpus.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

// Character-level Levenshtein distance with unit costs. Characters are Unicode
// scalar values, so callers working with UTF-8 should decode first (or use the
// *_utf8 helpers).
namespace nmtlab::lexsim {

struct DistanceResult {
    std::size_t raw = 0;
    double normalized = 0.0;  // raw / mean(|a|, |b|); 0 when both empty
};

// Two-row O(nm) dynamic program.
std::size_t edit_distance(std::u32string_view a, std::u32string_view b);

// Bit-parallel Myers/Hyyrö, one 64-bit block per 64 characters of the shorter
// string. Same result as edit_distance.
std::size_t edit_distance_fast(std::u32string_view a, std::u32string_view b);

double normalized_distance(std::u32string_view a, std::u32string_view b);
DistanceResult distance(std::u32string_view a, std::u32string_view b);
DistanceResult distance_utf8(std::string_view a, std::string_view b);

enum class Mode { mean, length_weighted };

struct Sample {
    std::size_t n;
    std::uint64_t seed;
};

struct CorpusDistance {
    double normalized = 0.0;
    std::size_t raw_total = 0;
    std::size_t n_pairs = 0;
};

// Tokens of each side are joined with single spaces before measuring.
// mean: average of per-pair normalized distances.
// length_weighted: sum of raw distances over sum of mean lengths.
CorpusDistance corpus_distance(const corpus::ParallelCorpus& corpus, Mode mode,
                               std::optional<Sample> sample = std::nullopt);

} // namespace nmtlab::lexsim
