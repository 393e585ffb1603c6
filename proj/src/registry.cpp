#include "nmtlab/registry.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/text.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>

namespace nmtlab::detail {
extern const std::string_view kRegistryJson;
}

namespace nmtlab::corpus {

std::string_view order_name(Order o) {
    switch (o) {
    case Order::SOV: return "SOV";
    case Order::SVO: return "SVO";
    case Order::FLEXIBLE: return "FLEXIBLE";
    }
    return "?";
}

Order parse_order(std::string_view name) {
    std::string upper;
    for (char c : text::trim(name)) upper.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    if (upper == "SOV") return Order::SOV;
    if (upper == "SVO") return Order::SVO;
    if (upper == "FLEXIBLE") return Order::FLEXIBLE;
    throw ParseError("unknown word order '" + std::string(name) + "'");
}

WordOrder::WordOrder(Order d, std::optional<Order> s) : dominant(d), secondary(s) {
    if (secondary && *secondary == dominant)
        throw DomainError("secondary word order must differ from the dominant one");
}

WordOrder WordOrder::parse(std::string_view t) {
    const auto slash = t.find('/');
    if (slash == std::string_view::npos) return WordOrder(parse_order(t));
    return WordOrder(parse_order(t.substr(0, slash)), parse_order(t.substr(slash + 1)));
}

std::string WordOrder::to_string() const {
    std::string s(order_name(dominant));
    if (secondary) s += "/" + std::string(order_name(*secondary));
    return s;
}

int word_order_group(const WordOrder& order) {
    if (order.contains(Order::SOV)) return 1;
    if (order.contains(Order::SVO)) return 3;
    return 2;
}

const LanguageProfile* Registry::find(std::string_view code) const {
    auto it = std::find_if(languages.begin(), languages.end(),
                           [&](const LanguageProfile& p) { return p.code == code; });
    return it == languages.end() ? nullptr : &*it;
}

Registry parse_registry(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("registry: ") + e.what());
    }
    if (doc.value("format", "") != "nmtlab-registry") throw ParseError("registry: bad format tag");

    Registry reg;
    reg.version = doc.at("version").get<int>();
    reg.source_language = doc.value("source_language", "en");
    for (const auto& row : doc.at("languages")) {
        LanguageProfile p;
        p.code = row.at("code").get<std::string>();
        p.name = row.value("name", "");
        const auto& orders = row.at("word_order");
        if (orders.empty() || orders.size() > 2) throw ParseError("registry: bad word_order for " + p.code);
        p.word_order = orders.size() == 1
                           ? WordOrder(parse_order(orders[0].get<std::string>()))
                           : WordOrder(parse_order(orders[0].get<std::string>()),
                                       parse_order(orders[1].get<std::string>()));
        p.levenshtein = row.at("levenshtein").get<double>();
        if (p.levenshtein < 0) throw ParseError("registry: negative levenshtein for " + p.code);
        if (row.contains("bleu_lstm")) p.bleu_lstm = row["bleu_lstm"].get<double>();
        if (row.contains("bleu_transformer")) p.bleu_transformer = row["bleu_transformer"].get<double>();
        p.n_train = row.value("n_train", 0L);
        p.n_test = row.value("n_test", 0L);
        reg.languages.push_back(std::move(p));
    }
    return reg;
}

std::string_view builtin_registry_json() { return detail::kRegistryJson; }

const Registry& builtin_registry() {
    static const Registry reg = parse_registry(detail::kRegistryJson);
    return reg;
}

} // namespace nmtlab::corpus
