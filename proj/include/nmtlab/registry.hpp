#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nmtlab::corpus {

enum class Order { SOV, SVO, FLEXIBLE };

std::string_view order_name(Order o);
Order parse_order(std::string_view name);

// Dominant order first. A secondary order never equals the dominant one.
struct WordOrder {
    Order dominant = Order::FLEXIBLE;
    std::optional<Order> secondary;

    WordOrder() = default;
    WordOrder(Order d, std::optional<Order> s = std::nullopt);

    // "SOV", "Flexible / SVO", "SVO/FLEXIBLE" ...
    static WordOrder parse(std::string_view text);
    std::string to_string() const;

    bool contains(Order o) const { return dominant == o || (secondary && *secondary == o); }
    bool operator==(const WordOrder&) const = default;
};

struct LanguageProfile {
    std::string code;
    std::string name;
    WordOrder word_order;
    double levenshtein = 0.0;
    std::optional<double> bleu_lstm;
    std::optional<double> bleu_transformer;
    long n_train = 0;
    long n_test = 0;
};

// 1: SOV appears anywhere in the ordering; 3: SVO appears (and SOV does not);
// 2: purely flexible.
int word_order_group(const WordOrder& order);
inline int word_order_group(const LanguageProfile& p) { return word_order_group(p.word_order); }

struct Registry {
    int version = 0;
    std::string source_language;
    std::vector<LanguageProfile> languages;

    const LanguageProfile* find(std::string_view code) const;
};

Registry parse_registry(std::string_view json_text);
// The registry compiled into the library (data/registry.json).
const Registry& builtin_registry();
std::string_view builtin_registry_json();

} // namespace nmtlab::corpus
