#include "nmtlab/lexsim.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/text.hpp"

#include <algorithm>
#include <numeric>
#include <unordered_map>
#include <vector>

namespace nmtlab::lexsim {

std::size_t edit_distance(std::u32string_view a, std::u32string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1);
    std::iota(row.begin(), row.end(), 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({up + 1, row[j - 1] + 1, sub});
            diag = up;
        }
    }
    return row[b.size()];
}

namespace {

using Word = std::uint64_t;
constexpr int kWordBits = 64;

struct Block {
    Word pv = ~Word{0};
    Word mv = 0;
};

// Advances one 64-row block by one text column. `hin` is the horizontal delta
// entering the block from above, the return value the delta leaving at `out_bit`.
inline int advance_block(Block& blk, Word eq, int hin, int out_bit) {
    const Word pv = blk.pv;
    const Word mv = blk.mv;
    const Word xv = eq | mv;
    if (hin < 0) eq |= 1;
    const Word xh = (((eq & pv) + pv) ^ pv) | eq;
    Word ph = mv | ~(xh | pv);
    Word mh = pv & xh;

    const Word out_mask = Word{1} << out_bit;
    int hout = 0;
    if (ph & out_mask) hout = 1;
    else if (mh & out_mask) hout = -1;

    ph <<= 1;
    mh <<= 1;
    if (hin < 0) mh |= 1;
    else if (hin > 0) ph |= 1;

    blk.pv = mh | ~(xv | ph);
    blk.mv = ph & xv;
    return hout;
}

} // namespace

std::size_t edit_distance_fast(std::u32string_view a, std::u32string_view b) {
    // the shorter string is the bit-packed pattern
    if (a.size() > b.size()) std::swap(a, b);
    const std::size_t m = a.size();
    if (m == 0) return b.size();

    const std::size_t n_blocks = (m + kWordBits - 1) / kWordBits;
    const int last_bit = static_cast<int>((m - 1) % kWordBits);

    // match masks per distinct pattern character
    std::unordered_map<char32_t, std::vector<Word>> peq;
    for (std::size_t i = 0; i < m; ++i) {
        auto& masks = peq[a[i]];
        if (masks.empty()) masks.assign(n_blocks, 0);
        masks[i / kWordBits] |= Word{1} << (i % kWordBits);
    }
    const std::vector<Word> no_match(n_blocks, 0);

    std::vector<Block> blocks(n_blocks);
    std::size_t score = m;
    for (char32_t c : b) {
        auto it = peq.find(c);
        const std::vector<Word>& eq = it == peq.end() ? no_match : it->second;
        int h = 1;  // top boundary row grows by one per column
        for (std::size_t k = 0; k < n_blocks; ++k) {
            const int out_bit = k + 1 == n_blocks ? last_bit : kWordBits - 1;
            h = advance_block(blocks[k], eq[k], h, out_bit);
        }
        score = static_cast<std::size_t>(static_cast<long long>(score) + h);
    }
    return score;
}

double normalized_distance(std::u32string_view a, std::u32string_view b) {
    return distance(a, b).normalized;
}

DistanceResult distance(std::u32string_view a, std::u32string_view b) {
    DistanceResult r;
    if (a.empty() && b.empty()) return r;
    r.raw = edit_distance_fast(a, b);
    r.normalized = static_cast<double>(r.raw) / ((static_cast<double>(a.size()) + b.size()) / 2.0);
    return r;
}

DistanceResult distance_utf8(std::string_view a, std::string_view b) {
    return distance(text::decode_utf8_or_throw(a), text::decode_utf8_or_throw(b));
}

namespace {

// Neumaier compensated accumulator.
class Sum {
  public:
    void add(double x) {
        const double t = sum_ + x;
        if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
        else comp_ += (x - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

  private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

} // namespace

CorpusDistance corpus_distance(const corpus::ParallelCorpus& corpus, Mode mode,
                               std::optional<Sample> sample) {
    if (corpus.empty()) throw DomainError("corpus_distance: empty corpus");

    std::vector<std::size_t> idx(corpus.size());
    std::iota(idx.begin(), idx.end(), 0);
    if (sample && sample->n < idx.size()) {
        Rng rng(sample->seed);
        rng.shuffle(idx);
        idx.resize(sample->n);
        std::sort(idx.begin(), idx.end());
        if (idx.empty()) throw DomainError("corpus_distance: sample size 0");
    }

    CorpusDistance out;
    Sum ratio_sum;
    Sum length_sum;
    for (std::size_t i : idx) {
        const auto& pair = corpus.pairs[i];
        const auto src = text::decode_utf8_or_throw(text::join(pair.source));
        const auto tgt = text::decode_utf8_or_throw(text::join(pair.target));
        const DistanceResult d = distance(src, tgt);
        out.raw_total += d.raw;
        ratio_sum.add(d.normalized);
        length_sum.add((static_cast<double>(src.size()) + tgt.size()) / 2.0);
    }
    out.n_pairs = idx.size();
    if (mode == Mode::mean) {
        out.normalized = ratio_sum.value() / static_cast<double>(out.n_pairs);
    } else {
        const double len = length_sum.value();
        out.normalized = len > 0 ? static_cast<double>(out.raw_total) / len : 0.0;
    }
    return out;
}

} // namespace nmtlab::lexsim
