#include "nmtlab/metrics.hpp"

#include "nmtlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace nmtlab::metrics {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

NgramCounts count_ngrams(const Tokens& s, int n) {
    NgramCounts counts;
    const auto len = static_cast<std::size_t>(n);
    for (std::size_t i = 0; i + len <= s.size(); ++i)
        ++counts[std::vector<std::string>(s.begin() + static_cast<long>(i), s.begin() + static_cast<long>(i + len))];
    return counts;
}

} // namespace

BleuResult corpus_bleu(const std::vector<Tokens>& hypotheses, const std::vector<Tokens>& references,
                       int max_n) {
    if (hypotheses.size() != references.size())
        throw DomainError("corpus_bleu: " + std::to_string(hypotheses.size()) + " hypotheses but " +
                          std::to_string(references.size()) + " references");
    if (hypotheses.empty()) throw DomainError("corpus_bleu: empty corpus");
    if (max_n < 1 || max_n > 4) throw DomainError("corpus_bleu: max_n must be in 1..4");

    BleuResult r;
    for (std::size_t s = 0; s < hypotheses.size(); ++s) {
        const auto& hyp = hypotheses[s];
        const auto& ref = references[s];
        r.hyp_len += hyp.size();
        r.ref_len += ref.size();
        for (int n = 1; n <= max_n; ++n) {
            const auto hyp_counts = count_ngrams(hyp, n);
            const auto ref_counts = count_ngrams(ref, n);
            for (const auto& [gram, c] : hyp_counts) {
                auto it = ref_counts.find(gram);
                if (it != ref_counts.end()) r.matches[n - 1] += std::min(c, it->second);
                r.totals[n - 1] += c;
            }
        }
    }

    if (r.hyp_len == 0) return r;  // score 0, BP 0

    r.brevity_penalty = r.hyp_len > r.ref_len
                            ? 1.0
                            : std::exp(1.0 - static_cast<double>(r.ref_len) / static_cast<double>(r.hyp_len));
    double log_sum = 0.0;
    bool zero = false;
    for (int n = 0; n < max_n; ++n) {
        r.precisions[n] = r.totals[n] ? static_cast<double>(r.matches[n]) / static_cast<double>(r.totals[n]) : 0.0;
        if (r.precisions[n] <= 0.0) zero = true;
        else log_sum += std::log(r.precisions[n]);
    }
    r.score = zero ? 0.0 : r.brevity_penalty * std::exp(log_sum / max_n);
    return r;
}

} // namespace nmtlab::metrics
