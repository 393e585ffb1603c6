#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace nmtlab::metrics {

using Tokens = std::vector<std::string>;

struct BleuResult {
    double score = 0.0;                 // in [0, 1]
    std::array<double, 4> precisions{};  // clipped n-gram precision per order
    std::array<std::size_t, 4> matches{};
    std::array<std::size_t, 4> totals{};
    double brevity_penalty = 0.0;
    std::size_t hyp_len = 0;
    std::size_t ref_len = 0;
};

// Corpus BLEU with one reference per hypothesis, no smoothing, case-sensitive.
// Throws DomainError when the lists differ in length or are empty.
BleuResult corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                       int max_n = 4);

} // namespace nmtlab::metrics
