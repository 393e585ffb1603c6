#pragma once

#include <cstdint>
#include <vector>

namespace oracle {

// Walks every way of giving n of the ranks 1..n+m to x and records
// U = #{(x, y) : x > y} for each. counts[u] is the number of labelings with U = u.
inline std::vector<std::uint64_t> mww_counts(unsigned n, unsigned m) {
    const unsigned total = n + m;
    std::vector<std::uint64_t> counts(n * m + 1, 0);
    for (std::uint32_t mask = 0; mask < (1u << total); ++mask) {
        if (static_cast<unsigned>(__builtin_popcount(mask)) != n) continue;
        unsigned u = 0;
        for (unsigned i = 0; i < total; ++i) {
            if (!(mask >> i & 1u)) continue;
            for (unsigned j = 0; j < i; ++j)
                if (!(mask >> j & 1u)) ++u;  // rank i (in x) above rank j (in y)
        }
        ++counts[u];
    }
    return counts;
}

// x, y values for one labeling: rank i+1 goes to x when bit i is set.
inline void split_ranks(std::uint32_t mask, unsigned total, std::vector<double>& x, std::vector<double>& y) {
    x.clear();
    y.clear();
    for (unsigned i = 0; i < total; ++i) ((mask >> i & 1u) ? x : y).push_back(static_cast<double>(i + 1));
}

} // namespace oracle
