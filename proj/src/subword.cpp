#include "nmtlab/subword.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/pos.hpp"
#include "nmtlab/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <unordered_map>

namespace nmtlab::subword {

MergeTable::MergeTable(std::vector<Pair> merges) : merges_(std::move(merges)) {
    for (std::size_t i = 0; i < merges_.size(); ++i) {
        if (!ranks_.emplace(merges_[i], static_cast<long>(i)).second)
            throw ParseError("duplicate merge '" + merges_[i].first + " " + merges_[i].second + "'");
    }
}

long MergeTable::rank(const std::string& left, const std::string& right) const {
    auto it = ranks_.find(Pair{left, right});
    return it == ranks_.end() ? -1 : it->second;
}

MergeTable MergeTable::prefix(std::size_t n) const {
    n = std::min(n, merges_.size());
    return MergeTable(std::vector<Pair>(merges_.begin(), merges_.begin() + static_cast<long>(n)));
}

std::string MergeTable::serialize() const {
    std::string out = "#nmtlab-bpe v1\n";
    for (const auto& [l, r] : merges_) out += l + " " + r + "\n";
    return out;
}

MergeTable MergeTable::parse(const std::string& contents) {
    std::vector<Pair> merges;
    std::size_t start = 0;
    std::size_t line_no = 0;
    bool header = false;
    while (start < contents.size()) {
        std::size_t end = contents.find('\n', start);
        if (end == std::string::npos) end = contents.size();
        std::string line = contents.substr(start, end - start);
        start = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!header) {
            if (line != "#nmtlab-bpe v1") throw ParseError("merges file: missing '#nmtlab-bpe v1' header", line_no);
            header = true;
            continue;
        }
        if (line.empty()) continue;
        auto parts = text::split_ws(line);
        if (parts.size() != 2) throw ParseError("merges file: expected 'left right'", line_no);
        merges.emplace_back(parts[0], parts[1]);
    }
    if (!header) throw ParseError("merges file: empty");
    return MergeTable(std::move(merges));
}

MergeTable MergeTable::load(const std::string& path) { return parse(text::read_file(path)); }
void MergeTable::save(const std::string& path) const { text::write_file(path, serialize()); }

namespace {

// Word types as symbol-id sequences, each with its corpus frequency.
struct WordType {
    std::vector<int> symbols;
    long count;
};

std::uint64_t pair_key(int l, int r) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(l)) << 32) | static_cast<std::uint32_t>(r);
}

} // namespace

MergeTable learn_bpe(const std::vector<Tokens>& sentences, std::size_t num_merges) {
    if (sentences.empty()) throw DomainError("learn_bpe: empty corpus");

    std::map<std::string, long> word_counts;
    for (const auto& s : sentences)
        for (const auto& w : s) ++word_counts[w];
    if (word_counts.empty()) throw DomainError("learn_bpe: corpus has no words");

    std::vector<std::string> symbols;
    std::unordered_map<std::string, int> symbol_ids;
    auto intern = [&](const std::string& s) {
        auto [it, inserted] = symbol_ids.emplace(s, static_cast<int>(symbols.size()));
        if (inserted) symbols.push_back(s);
        return it->second;
    };

    std::vector<WordType> words;
    words.reserve(word_counts.size());
    for (const auto& [w, count] : word_counts) {
        WordType t{{}, count};
        for (const auto& ch : text::utf8_chars(w)) t.symbols.push_back(intern(ch));
        t.symbols.push_back(intern(std::string(kEndOfWord)));
        words.push_back(std::move(t));
    }

    std::vector<MergeTable::Pair> merges;
    std::unordered_map<std::uint64_t, long> counts;
    while (merges.size() < num_merges) {
        counts.clear();
        for (const auto& w : words)
            for (std::size_t i = 0; i + 1 < w.symbols.size(); ++i)
                counts[pair_key(w.symbols[i], w.symbols[i + 1])] += w.count;

        long best_count = 0;
        int best_l = -1, best_r = -1;
        for (const auto& [key, c] : counts) {
            const int l = static_cast<int>(key >> 32);
            const int r = static_cast<int>(key & 0xFFFFFFFFu);
            bool better = c > best_count;
            if (!better && c == best_count && best_l >= 0) {
                const int cmp = symbols[l].compare(symbols[best_l]);
                better = cmp < 0 || (cmp == 0 && symbols[r] < symbols[best_r]);
            }
            if (better) {
                best_count = c;
                best_l = l;
                best_r = r;
            }
        }
        if (best_count < 2) break;

        const int merged = intern(symbols[best_l] + symbols[best_r]);
        merges.emplace_back(symbols[best_l], symbols[best_r]);
        for (auto& w : words) {
            std::vector<int> out;
            out.reserve(w.symbols.size());
            for (std::size_t i = 0; i < w.symbols.size(); ++i) {
                if (i + 1 < w.symbols.size() && w.symbols[i] == best_l && w.symbols[i + 1] == best_r) {
                    out.push_back(merged);
                    ++i;
                } else {
                    out.push_back(w.symbols[i]);
                }
            }
            w.symbols = std::move(out);
        }
    }
    return MergeTable(std::move(merges));
}

Tokens apply_bpe_word(const MergeTable& merges, const std::string& word) {
    Tokens sym = text::utf8_chars(word);
    sym.emplace_back(kEndOfWord);

    while (sym.size() > 1) {
        long best = -1;
        std::size_t at = 0;
        for (std::size_t i = 0; i + 1 < sym.size(); ++i) {
            const long r = merges.rank(sym[i], sym[i + 1]);
            if (r >= 0 && (best < 0 || r < best)) {
                best = r;
                at = i;
            }
        }
        if (best < 0) break;
        const auto& [left, right] = merges.merges()[static_cast<std::size_t>(best)];
        Tokens next;
        next.reserve(sym.size());
        for (std::size_t i = 0; i < sym.size(); ++i) {
            if (i >= at && i + 1 < sym.size() && sym[i] == left && sym[i + 1] == right) {
                next.push_back(left + right);
                ++i;
            } else {
                next.push_back(std::move(sym[i]));
            }
        }
        sym = std::move(next);
    }

    // strip the end marker from the final symbol
    if (sym.back() == kEndOfWord) {
        sym.pop_back();
    } else {
        sym.back().resize(sym.back().size() - kEndOfWord.size());
    }
    for (std::size_t i = 0; i + 1 < sym.size(); ++i) sym[i] += kContinuation;
    return sym;
}

Tokens apply_bpe(const MergeTable& merges, const Tokens& words) {
    Tokens out;
    for (const auto& w : words) {
        auto pieces = apply_bpe_word(merges, w);
        out.insert(out.end(), std::make_move_iterator(pieces.begin()), std::make_move_iterator(pieces.end()));
    }
    return out;
}

Tokens detok_bpe(const Tokens& subwords) {
    Tokens words;
    std::string current;
    bool open = false;
    for (const auto& t : subwords) {
        if (text::ends_with(t, kContinuation)) {
            current.append(t, 0, t.size() - kContinuation.size());
            open = true;
        } else {
            current += t;
            words.push_back(std::move(current));
            current.clear();
            open = false;
        }
    }
    if (open) throw ParseError("dangling '@@' continuation at end of sequence");
    return words;
}

std::vector<int> propagate_pos(const Tokens& words, const Tokens& tags, const Tokens& subwords) {
    if (words.size() != tags.size())
        throw DomainError("propagate_pos: " + std::to_string(words.size()) + " words but " +
                          std::to_string(tags.size()) + " tags");
    std::vector<int> tag_ids;
    tag_ids.reserve(tags.size());
    for (const auto& t : tags) {
        auto id = pos::tag_id(t);
        if (!id) throw ParseError("unknown tag '" + t + "'");
        tag_ids.push_back(*id);
    }

    std::vector<int> out;
    out.reserve(subwords.size());
    std::size_t word = 0;
    std::string current;
    auto mismatch = [](std::size_t index) {
        return ParseError("subwords diverge from words at word index " + std::to_string(index));
    };
    for (const auto& t : subwords) {
        if (word >= words.size()) throw mismatch(word);
        out.push_back(tag_ids[word]);
        if (text::ends_with(t, kContinuation)) {
            current.append(t, 0, t.size() - kContinuation.size());
        } else {
            current += t;
            if (current != words[word]) throw mismatch(word);
            current.clear();
            ++word;
        }
    }
    if (!current.empty() || word != words.size()) throw mismatch(word);
    return out;
}

Vocab::Vocab()
    : tokens_{std::string(kPadToken), std::string(kUnkToken), std::string(kBosToken),
              std::string(kEosToken)} {
    for (int i = 0; i < kNumSpecials; ++i) ids_.emplace(tokens_[static_cast<std::size_t>(i)], i);
}

Vocab::Vocab(const Tokens& regular_tokens) : Vocab() {
    for (const auto& t : regular_tokens) {
        if (!ids_.emplace(t, size()).second) throw DomainError("vocab: duplicate token '" + t + "'");
        tokens_.push_back(t);
    }
}

int Vocab::id(const std::string& token) const {
    auto it = ids_.find(token);
    return it == ids_.end() ? kUnk : it->second;
}

std::vector<int> Vocab::encode(const Tokens& subwords) const {
    std::vector<int> ids;
    ids.reserve(subwords.size());
    for (const auto& t : subwords) ids.push_back(id(t));
    return ids;
}

Tokens Vocab::decode(const std::vector<int>& ids, bool strip_specials) const {
    Tokens out;
    for (int i : ids) {
        if (strip_specials && (i == kPad || i == kBos || i == kEos)) continue;
        out.push_back(token(i));
    }
    return out;
}

std::uint64_t Vocab::fingerprint() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](unsigned char c) {
        h ^= c;
        h *= 0x100000001b3ULL;
    };
    for (const auto& t : tokens_) {
        for (char c : t) mix(static_cast<unsigned char>(c));
        mix(0);
    }
    return h;
}

std::string Vocab::to_json() const {
    nlohmann::json doc;
    doc["format"] = "nmtlab-vocab v1";
    auto& toks = doc["tokens"];
    toks = nlohmann::json::object();
    for (int i = 0; i < size(); ++i) toks[token(i)] = i;
    auto& tags = doc["tags"];
    tags = nlohmann::json::object();
    for (int i = 0; i < pos::kNumTags; ++i) tags[std::string(pos::tag_name(i))] = i;
    return doc.dump(1) + "\n";
}

Vocab Vocab::from_json(const std::string& json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("vocab: ") + e.what());
    }
    const auto& toks = doc.at("tokens");
    Tokens by_id(toks.size());
    for (const auto& [tok, id] : toks.items()) {
        const int i = id.get<int>();
        if (i < 0 || static_cast<std::size_t>(i) >= by_id.size() || !by_id[static_cast<std::size_t>(i)].empty())
            throw ParseError("vocab: ids are not a bijection onto 0..N-1");
        by_id[static_cast<std::size_t>(i)] = tok;
    }
    Vocab specials;
    for (int i = 0; i < kNumSpecials; ++i)
        if (static_cast<std::size_t>(i) >= by_id.size() || by_id[static_cast<std::size_t>(i)] != specials.token(i))
            throw ParseError("vocab: special tokens must occupy ids 0-3");
    return Vocab(Tokens(by_id.begin() + kNumSpecials, by_id.end()));
}

Vocab Vocab::load(const std::string& path) { return from_json(text::read_file(path)); }
void Vocab::save(const std::string& path) const { text::write_file(path, to_json()); }

Vocab build_vocab(const std::vector<Tokens>& tokenized, std::size_t min_freq) {
    std::map<std::string, std::size_t> counts;
    for (const auto& s : tokenized)
        for (const auto& t : s) ++counts[t];
    const Vocab specials;
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (const auto& [t, c] : counts)
        if (c >= min_freq && !specials.contains(t)) kept.emplace_back(t, c);
    std::stable_sort(kept.begin(), kept.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    Tokens order;
    order.reserve(kept.size());
    for (auto& [t, c] : kept) order.push_back(std::move(t));
    return Vocab(order);
}

} // namespace nmtlab::subword
