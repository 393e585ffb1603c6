#include "nmtlab/corpus.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/pos.hpp"
#include "nmtlab/rng.hpp"
#include "nmtlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nmtlab::corpus {

LoadResult parallel_from_lines(const std::vector<std::string>& src_lines,
                               const std::vector<std::string>& tgt_lines,
                               const std::string& src_lang, const std::string& tgt_lang) {
    if (src_lines.size() != tgt_lines.size())
        throw AlignmentError(src_lines.size(), tgt_lines.size());

    LoadResult result;
    result.corpus.source_lang = src_lang;
    result.corpus.target_lang = tgt_lang;
    for (std::size_t i = 0; i < src_lines.size(); ++i) {
        text::decode_utf8_or_throw(src_lines[i], i + 1);
        text::decode_utf8_or_throw(tgt_lines[i], i + 1);
        SentencePair pair{text::split_ws(src_lines[i]), text::split_ws(tgt_lines[i]), std::nullopt};
        if (pair.source.empty() || pair.target.empty()) {
            ++result.dropped;
            continue;
        }
        result.corpus.pairs.push_back(std::move(pair));
    }
    return result;
}

LoadResult load_parallel(const std::string& src_path, const std::string& tgt_path,
                         const std::string& src_lang, const std::string& tgt_lang) {
    return parallel_from_lines(text::read_lines(src_path), text::read_lines(tgt_path), src_lang,
                               tgt_lang);
}

std::vector<TaggedSentence> parse_tagged(const std::string& contents) {
    std::vector<TaggedSentence> out;
    TaggedSentence current;
    std::size_t line_no = 0;
    std::size_t start = 0;
    auto flush = [&] {
        if (!current.words.empty()) out.push_back(std::move(current));
        current = {};
    };
    while (start < contents.size()) {
        std::size_t end = contents.find('\n', start);
        if (end == std::string::npos) end = contents.size();
        std::string_view line(contents.data() + start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) {
            flush();
            continue;
        }
        text::decode_utf8_or_throw(line, line_no);
        const std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos) throw ParseError("missing TAB separator", line_no);
        std::string_view form = line.substr(0, tab);
        std::string_view tag = line.substr(tab + 1);
        if (form.empty()) throw ParseError("empty word form", line_no);
        if (std::any_of(form.begin(), form.end(), text::is_space))
            throw ParseError("word form contains whitespace", line_no);
        if (!pos::tag_id(tag)) throw ParseError("unknown tag '" + std::string(tag) + "'", line_no);
        current.words.emplace_back(form);
        current.tags.emplace_back(tag);
    }
    flush();
    return out;
}

std::vector<TaggedSentence> load_tagged(const std::string& path) {
    return parse_tagged(text::read_file(path));
}

void attach_tags(ParallelCorpus& corpus, const std::vector<TaggedSentence>& tagged) {
    if (tagged.size() != corpus.pairs.size())
        throw AlignmentError(corpus.pairs.size(), tagged.size());
    for (std::size_t i = 0; i < tagged.size(); ++i) {
        if (tagged[i].words != corpus.pairs[i].source)
            throw ParseError("tagged sentence " + std::to_string(i + 1) +
                             " does not match the source text");
        corpus.pairs[i].source_tags = tagged[i].tags;
    }
}

std::array<std::size_t, 3> split_sizes(std::size_t n, const SplitRatios& ratios) {
    const std::array<double, 3> r = {ratios.train, ratios.valid, ratios.test};
    for (double x : r)
        if (!(x > 0.0)) throw DomainError("split ratios must be positive");
    if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) throw DomainError("split ratios must sum to 1");

    std::array<std::size_t, 3> sizes{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (int i = 0; i < 3; ++i) {
        const double quota = r[i] * static_cast<double>(n);
        sizes[i] = static_cast<std::size_t>(std::floor(quota));
        remainder[i] = quota - std::floor(quota);
        assigned += sizes[i];
    }
    std::array<int, 3> order = {0, 1, 2};
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return remainder[a] > remainder[b]; });
    for (std::size_t k = 0; assigned < n; ++k, ++assigned) ++sizes[order[k % 3]];
    return sizes;
}

Split split_corpus(const ParallelCorpus& corpus, const SplitRatios& ratios, std::uint64_t seed) {
    const std::size_t n = corpus.pairs.size();
    if (n < 3) throw DomainError("split_corpus needs at least 3 pairs, got " + std::to_string(n));
    const auto sizes = split_sizes(n, ratios);

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    Rng rng(seed);
    rng.shuffle(idx);

    Split split;
    ParallelCorpus* parts[3] = {&split.train, &split.valid, &split.test};
    std::size_t offset = 0;
    for (int p = 0; p < 3; ++p) {
        std::vector<std::size_t> members(idx.begin() + static_cast<long>(offset),
                                         idx.begin() + static_cast<long>(offset + sizes[p]));
        std::sort(members.begin(), members.end());
        parts[p]->source_lang = corpus.source_lang;
        parts[p]->target_lang = corpus.target_lang;
        for (std::size_t m : members) parts[p]->pairs.push_back(corpus.pairs[m]);
        offset += sizes[p];
    }
    return split;
}

} // namespace nmtlab::corpus
