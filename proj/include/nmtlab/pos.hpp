#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace nmtlab::pos {

// The 17 Universal POS tags followed by X_SPECIAL, which is assigned to
// synthetic tokens (BOS, EOS, PAD). Ids are positions in this array.
inline constexpr std::array<std::string_view, 18> kTags = {
    "ADJ",  "ADP",   "ADV",   "AUX", "CCONJ", "DET",  "INTJ", "NOUN", "NUM",
    "PART", "PRON",  "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",    "X_SPECIAL"};

inline constexpr int kNumTags = static_cast<int>(kTags.size());
inline constexpr int kSpecialId = kNumTags - 1;

inline std::optional<int> tag_id(std::string_view tag) {
    for (int i = 0; i < kNumTags; ++i)
        if (kTags[i] == tag) return i;
    return std::nullopt;
}

inline std::string_view tag_name(int id) { return kTags.at(static_cast<std::size_t>(id)); }

} // namespace nmtlab::pos
