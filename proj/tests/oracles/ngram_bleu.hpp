#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace oracle {

using Sentence = std::vector<std::string>;

struct Bleu {
    double score = 0.0;
    double precisions[4] = {};
    double bp = 0.0;
};

inline std::vector<Sentence> ngrams(const Sentence& s, std::size_t n) {
    std::vector<Sentence> out;
    for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace_back(s.begin() + i, s.begin() + i + n);
    return out;
}

// Counts by linear scan: each hypothesis n-gram is matched against an unused
// copy in the reference, which is the same as clipping by reference count.
inline Bleu corpus_bleu(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs) {
    double matched[4] = {}, total[4] = {};
    double c = 0, r = 0;
    for (std::size_t k = 0; k < hyps.size(); ++k) {
        c += hyps[k].size();
        r += refs[k].size();
        for (std::size_t n = 1; n <= 4; ++n) {
            std::vector<Sentence> pool = ngrams(refs[k], n);
            std::vector<bool> used(pool.size(), false);
            for (const auto& g : ngrams(hyps[k], n)) {
                total[n - 1] += 1;
                for (std::size_t j = 0; j < pool.size(); ++j) {
                    if (!used[j] && pool[j] == g) {
                        used[j] = true;
                        matched[n - 1] += 1;
                        break;
                    }
                }
            }
        }
    }
    Bleu b;
    double log_sum = 0;
    bool zero = false;
    for (int n = 0; n < 4; ++n) {
        b.precisions[n] = total[n] > 0 ? matched[n] / total[n] : 0.0;
        if (b.precisions[n] == 0.0) zero = true;
        else log_sum += std::log(b.precisions[n]);
    }
    b.bp = c == 0 ? 0.0 : (c > r ? 1.0 : std::exp(1.0 - r / c));
    b.score = zero ? 0.0 : b.bp * std::exp(log_sum / 4.0);
    return b;
}

} // namespace oracle
