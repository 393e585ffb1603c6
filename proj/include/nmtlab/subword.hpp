#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nmtlab::subword {

using Tokens = std::vector<std::string>;

// Internal end-of-word symbol. It never appears in rendered output.
inline constexpr std::string_view kEndOfWord = "</w>";
// Continuation suffix on non-final subwords.
inline constexpr std::string_view kContinuation = "@@";

class MergeTable {
  public:
    using Pair = std::pair<std::string, std::string>;

    MergeTable() = default;
    explicit MergeTable(std::vector<Pair> merges);

    const std::vector<Pair>& merges() const { return merges_; }
    std::size_t size() const { return merges_.size(); }
    bool empty() const { return merges_.empty(); }

    // Priority of a pair (position in the table), or -1.
    long rank(const std::string& left, const std::string& right) const;

    // First `n` merges.
    MergeTable prefix(std::size_t n) const;

    // "#nmtlab-bpe v1" header, then "left right" per line.
    std::string serialize() const;
    static MergeTable parse(const std::string& contents);
    static MergeTable load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const MergeTable& o) const { return merges_ == o.merges_; }

  private:
    std::vector<Pair> merges_;
    std::map<Pair, long> ranks_;
};

// Greedy most-frequent-pair merging over the word frequency table of all
// sentences. Ties go to the lexicographically smallest (left, right); learning
// stops once no pair occurs at least twice.
MergeTable learn_bpe(const std::vector<Tokens>& sentences, std::size_t num_merges);

// Splits one word into subwords, "@@" marking every non-final piece.
Tokens apply_bpe_word(const MergeTable& merges, const std::string& word);
Tokens apply_bpe(const MergeTable& merges, const Tokens& words);

// Inverse of apply_bpe. Throws ParseError on a dangling "@@" at the end.
Tokens detok_bpe(const Tokens& subwords);

// Tag ids per subword: each subword inherits its word's tag. Throws ParseError
// naming the first word index where subwords and words disagree.
std::vector<int> propagate_pos(const Tokens& words, const Tokens& tags, const Tokens& subwords);

class Vocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kUnk = 1;
    static constexpr int kBos = 2;
    static constexpr int kEos = 3;
    static constexpr int kNumSpecials = 4;

    static constexpr std::string_view kPadToken = "<pad>";
    static constexpr std::string_view kUnkToken = "<unk>";
    static constexpr std::string_view kBosToken = "<s>";
    static constexpr std::string_view kEosToken = "</s>";

    Vocab();  // specials only

    // Appends tokens in the given order. Duplicates and specials are rejected.
    explicit Vocab(const Tokens& regular_tokens);

    int size() const { return static_cast<int>(tokens_.size()); }
    int id(const std::string& token) const;  // kUnk when absent
    bool contains(const std::string& token) const { return ids_.count(token) > 0; }
    const std::string& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
    const Tokens& tokens() const { return tokens_; }

    std::vector<int> encode(const Tokens& subwords) const;
    Tokens decode(const std::vector<int>& ids, bool strip_specials = true) const;

    // FNV-1a over the id-ordered token list.
    std::uint64_t fingerprint() const;

    // {"format", "tokens": {token: id}, "tags": {tag: id}}
    std::string to_json() const;
    static Vocab from_json(const std::string& json_text);
    static Vocab load(const std::string& path);
    void save(const std::string& path) const;

    bool operator==(const Vocab& o) const { return tokens_ == o.tokens_; }

  private:
    Tokens tokens_;
    std::map<std::string, int, std::less<>> ids_;
};

// Tokens with count >= min_freq after the specials, ordered by (count desc,
// token asc). Source and target corpora go in together.
Vocab build_vocab(const std::vector<Tokens>& tokenized, std::size_t min_freq);

} // namespace nmtlab::subword
