#include "nmtlab/harness.hpp"

#include "nmtlab/error.hpp"
#include "nmtlab/text.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

namespace nmtlab::harness {

using nlohmann::json;

double round6(double x) {
    if (x == 0.0 || !std::isfinite(x)) return x == 0.0 ? 0.0 : x;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return std::strtod(buf, nullptr);
}

namespace {

// Serialization is written once and used both rounded (emitted form) and
// exact (equality).
struct Writer {
    bool round;

    json num(double x) const {
        if (!std::isfinite(x)) return nullptr;
        return round ? round6(x) : x;
    }
    json opt(const std::optional<double>& x) const { return x ? num(*x) : json(nullptr); }

    json result(const stats::MwwResult& r) const {
        return {{"u", num(r.u_statistic)}, {"p_value", num(r.p_value)}, {"n", r.n}, {"m", r.m}, {"exact", r.exact}};
    }
    json result(const stats::CorrResult& r) const {
        return {{"r", num(r.r)}, {"p_value", num(r.p_value)}, {"n", r.n}};
    }
    json result(const stats::TTestResult& r) const {
        return {{"mean_diff", num(r.mean_diff)}, {"t", num(r.t)}, {"p_value", num(r.p_value)}, {"dof", r.dof}};
    }
    json result(const stats::FitResult& r) const {
        return {{"slope", num(r.slope)}, {"intercept", num(r.intercept)}, {"r_squared", num(r.r_squared)}};
    }

    template <typename R>
    json stat(const Stat<R>& s) const {
        if (s.result) return result(*s.result);
        return {{"skipped", s.skipped}};
    }

    json mww(const std::array<MwwEntry, 3>& entries) const {
        json out = json::array();
        for (const auto& e : entries) {
            json j = stat(e.test);
            j["groups"] = {e.group_x, e.group_y};
            j["alternative"] = "less";
            out.push_back(std::move(j));
        }
        return out;
    }

    json record(const LanguageRecord& r) const {
        json scores = json::object();
        for (const auto& [arch, s] : r.scores) {
            json j = {{"bleu_baseline", opt(s.bleu_baseline)},
                      {"bleu_pos", opt(s.bleu_pos)},
                      {"delta_percent", opt(s.delta_percent)}};
            if (!s.delta_note.empty()) j["delta_note"] = s.delta_note;
            scores[arch] = std::move(j);
        }
        json j = {{"code", r.code},         {"word_order", r.word_order}, {"group", r.group},
                  {"levenshtein", num(r.levenshtein)}, {"n_train", r.n_train}, {"n_test", r.n_test},
                  {"scores", std::move(scores)}};
        if (r.source_types) j["source_types"] = *r.source_types;
        if (r.failure) j["failure"] = {{"stage", r.failure->stage}, {"message", r.failure->message}};
        return j;
    }

    json statistics(const ArchStatistics& s) const {
        return {{"arch", s.arch},
                {"baseline_order", mww(s.baseline_order)},
                {"improvement_order", mww(s.improvement_order)},
                {"levenshtein_bleu", stat(s.levenshtein_bleu)},
                {"levenshtein_delta", stat(s.levenshtein_delta)},
                {"delta_ttest", stat(s.delta_ttest)},
                {"levenshtein_bleu_fit", stat(s.levenshtein_bleu_fit)},
                {"levenshtein_delta_fit", stat(s.levenshtein_delta_fit)},
                {"n_test_bleu", stat(s.n_test_bleu)},
                {"n_test_bleu_fit", stat(s.n_test_bleu_fit)},
                {"source_types_bleu", stat(s.source_types_bleu)},
                {"source_types_bleu_fit", stat(s.source_types_bleu_fit)}};
    }

    json report(const EvalReport& r) const {
        json langs = json::array();
        for (const auto& l : r.languages) langs.push_back(record(l));
        json st = json::array();
        for (const auto& s : r.statistics) st.push_back(statistics(s));
        return {{"format", "nmtlab-report v1"}, {"mode", r.mode}, {"seed", r.seed}, {"languages", std::move(langs)},
                {"statistics", std::move(st)}};
    }
};

double get_num(const json& j) {
    if (j.is_null()) return std::nan("");
    return j.get<double>();
}

std::optional<double> get_opt(const json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

template <typename R>
Stat<R> read_stat(const json& j, R (*read)(const json&)) {
    if (j.contains("skipped")) return Stat<R>::skip(j.at("skipped").get<std::string>());
    return {read(j), ""};
}

stats::MwwResult read_mww(const json& j) {
    stats::MwwResult r;
    r.u_statistic = get_num(j.at("u"));
    r.p_value = get_num(j.at("p_value"));
    r.n = j.at("n").get<std::size_t>();
    r.m = j.at("m").get<std::size_t>();
    r.exact = j.at("exact").get<bool>();
    return r;
}

stats::CorrResult read_corr(const json& j) {
    return {get_num(j.at("r")), get_num(j.at("p_value")), j.at("n").get<std::size_t>()};
}

stats::TTestResult read_ttest(const json& j) {
    return {get_num(j.at("mean_diff")), get_num(j.at("t")), get_num(j.at("p_value")), j.at("dof").get<std::size_t>()};
}

stats::FitResult read_fit(const json& j) {
    return {get_num(j.at("slope")), get_num(j.at("intercept")), get_num(j.at("r_squared"))};
}

std::array<MwwEntry, 3> read_mww_entries(const json& j) {
    std::array<MwwEntry, 3> out;
    if (j.size() != 3) throw ParseError("report: expected three group tests");
    for (std::size_t i = 0; i < 3; ++i) {
        out[i].group_x = j[i].at("groups").at(0).get<int>();
        out[i].group_y = j[i].at("groups").at(1).get<int>();
        out[i].test = read_stat<stats::MwwResult>(j[i], read_mww);
    }
    return out;
}

std::string format_number(double x) {
    if (!std::isfinite(x)) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

// 6 significant digits, but never fewer than two decimals ("27.30").
std::string format_bleu(double x) {
    std::string s = format_number(x);
    if (s.empty() || s.find_first_of("eEn") != std::string::npos) return s;
    const auto dot = s.find('.');
    const std::size_t decimals = dot == std::string::npos ? 0 : s.size() - dot - 1;
    if (decimals >= 2) return s;
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.2f", x);
    return buf;
}

std::string opt_bleu(const std::optional<double>& x) { return x ? format_bleu(*x) : ""; }

std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

std::vector<std::string> arch_names(const EvalReport& r) {
    std::vector<std::string> archs;
    for (const auto& s : r.statistics) archs.push_back(s.arch);
    if (archs.empty())
        for (const auto& l : r.languages)
            for (const auto& [a, _] : l.scores)
                if (std::find(archs.begin(), archs.end(), a) == archs.end()) archs.push_back(a);
    return archs;
}

void footer_row(std::ostringstream& out, const std::string& arch, const std::string& test, double value, double p,
                const std::string& note) {
    out << arch << ',' << test << ',' << format_number(value) << ',' << format_number(p) << ',' << csv_safe(note)
        << '\n';
}

template <typename R, typename F>
void footer_stat(std::ostringstream& out, const std::string& arch, const std::string& test, const Stat<R>& s, F fill) {
    if (!s.result) {
        out << arch << ',' << test << ",,," << csv_safe("skipped: " + s.skipped) << '\n';
        return;
    }
    fill(*s.result);
}

void footer(std::ostringstream& out, const ArchStatistics& s) {
    const std::string& a = s.arch;
    auto mww_rows = [&](const std::string& name, const std::array<MwwEntry, 3>& entries) {
        for (const auto& e : entries) {
            const std::string test = name + " g" + std::to_string(e.group_x) + "<g" + std::to_string(e.group_y);
            footer_stat(out, a, test, e.test, [&](const stats::MwwResult& r) {
                footer_row(out, a, test, r.u_statistic, r.p_value,
                           "U; n=" + std::to_string(r.n) + " m=" + std::to_string(r.m) +
                               (r.exact ? " exact" : " normal approximation"));
            });
        }
    };
    auto corr = [&](const std::string& test, const Stat<stats::CorrResult>& st) {
        footer_stat(out, a, test, st, [&](const stats::CorrResult& r) {
            footer_row(out, a, test, r.r, r.p_value, "r; n=" + std::to_string(r.n));
        });
    };
    auto fit = [&](const std::string& test, const Stat<stats::FitResult>& st) {
        footer_stat(out, a, test, st, [&](const stats::FitResult& r) {
            footer_row(out, a, test, r.slope, std::nan(""),
                       "slope; intercept=" + format_number(r.intercept) + " r_squared=" + format_number(r.r_squared));
        });
    };
    mww_rows("baseline_order", s.baseline_order);
    mww_rows("improvement_order", s.improvement_order);
    corr("levenshtein_bleu", s.levenshtein_bleu);
    corr("levenshtein_delta", s.levenshtein_delta);
    footer_stat(out, a, "delta_ttest", s.delta_ttest, [&](const stats::TTestResult& r) {
        footer_row(out, a, "delta_ttest", r.t, r.p_value,
                   "t; mean_diff=" + format_number(r.mean_diff) + " dof=" + std::to_string(r.dof));
    });
    fit("levenshtein_bleu_fit", s.levenshtein_bleu_fit);
    fit("levenshtein_delta_fit", s.levenshtein_delta_fit);
    corr("n_test_bleu", s.n_test_bleu);
    fit("n_test_bleu_fit", s.n_test_bleu_fit);
    corr("source_types_bleu", s.source_types_bleu);
    fit("source_types_bleu_fit", s.source_types_bleu_fit);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::optional<double> parse_opt(const std::string& s) {
    if (s.empty()) return std::nullopt;
    return std::stod(s);
}

} // namespace

bool EvalReport::ok() const {
    for (const auto& l : languages)
        if (l.failure) return false;
    return true;
}

json EvalReport::to_json() const { return Writer{true}.report(*this); }

bool operator==(const EvalReport& a, const EvalReport& b) { return Writer{false}.report(a) == Writer{false}.report(b); }

EvalReport EvalReport::canonical() const { return from_json(to_json()); }

EvalReport EvalReport::from_json(const json& j) {
    if (j.value("format", std::string()) != "nmtlab-report v1") throw ParseError("not an nmtlab report");
    EvalReport r;
    r.mode = j.at("mode").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& jl : j.at("languages")) {
        LanguageRecord l;
        l.code = jl.at("code").get<std::string>();
        l.word_order = jl.at("word_order").get<std::string>();
        l.group = jl.at("group").get<int>();
        l.levenshtein = get_num(jl.at("levenshtein"));
        l.n_train = jl.at("n_train").get<long>();
        l.n_test = jl.at("n_test").get<long>();
        if (jl.contains("source_types")) l.source_types = jl.at("source_types").get<long>();
        for (const auto& [arch, js] : jl.at("scores").items()) {
            ArchScores s;
            s.bleu_baseline = get_opt(js, "bleu_baseline");
            s.bleu_pos = get_opt(js, "bleu_pos");
            s.delta_percent = get_opt(js, "delta_percent");
            s.delta_note = js.value("delta_note", std::string());
            l.scores[arch] = s;
        }
        if (jl.contains("failure"))
            l.failure = Failure{jl.at("failure").at("stage").get<std::string>(),
                                jl.at("failure").at("message").get<std::string>()};
        r.languages.push_back(std::move(l));
    }
    for (const auto& js : j.at("statistics")) {
        ArchStatistics s;
        s.arch = js.at("arch").get<std::string>();
        s.baseline_order = read_mww_entries(js.at("baseline_order"));
        s.improvement_order = read_mww_entries(js.at("improvement_order"));
        s.levenshtein_bleu = read_stat<stats::CorrResult>(js.at("levenshtein_bleu"), read_corr);
        s.levenshtein_delta = read_stat<stats::CorrResult>(js.at("levenshtein_delta"), read_corr);
        s.delta_ttest = read_stat<stats::TTestResult>(js.at("delta_ttest"), read_ttest);
        s.levenshtein_bleu_fit = read_stat<stats::FitResult>(js.at("levenshtein_bleu_fit"), read_fit);
        s.levenshtein_delta_fit = read_stat<stats::FitResult>(js.at("levenshtein_delta_fit"), read_fit);
        s.n_test_bleu = read_stat<stats::CorrResult>(js.at("n_test_bleu"), read_corr);
        s.n_test_bleu_fit = read_stat<stats::FitResult>(js.at("n_test_bleu_fit"), read_fit);
        s.source_types_bleu = read_stat<stats::CorrResult>(js.at("source_types_bleu"), read_corr);
        s.source_types_bleu_fit = read_stat<stats::FitResult>(js.at("source_types_bleu_fit"), read_fit);
        r.statistics.push_back(std::move(s));
    }
    return r;
}

EvalReport parse_report_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    return EvalReport::from_json(j);
}

std::string emit_report(const EvalReport& report, Format format) {
    if (format == Format::json) return report.to_json().dump(2) + "\n";

    const auto archs = arch_names(report);
    std::ostringstream out;
    out << "code,group,levenshtein";
    for (const auto& a : archs) out << ',' << a << "_bleu_baseline," << a << "_bleu_pos," << a << "_delta_percent";
    out << ",n_train,n_test,word_order,status\n";
    if (report.languages.empty()) return out.str();

    for (const auto& l : report.languages) {
        out << l.code << ',' << l.group << ',' << format_number(l.levenshtein);
        for (const auto& a : archs) {
            const auto it = l.scores.find(a);
            const ArchScores s = it == l.scores.end() ? ArchScores{} : it->second;
            out << ',' << opt_bleu(s.bleu_baseline) << ',' << opt_bleu(s.bleu_pos) << ','
                << (s.delta_percent ? format_number(*s.delta_percent) : "");
        }
        out << ',' << l.n_train << ',' << l.n_test << ',' << csv_safe(l.word_order) << ','
            << (l.failure ? csv_safe("failed at " + l.failure->stage + ": " + l.failure->message) : "ok") << '\n';
    }
    out << "\narch,test,value,p_value,note\n";
    for (const auto& s : report.statistics) footer(out, s);
    return out.str();
}

std::vector<LanguageRecord> parse_report_csv(const std::string& text, const std::vector<std::string>& archs) {
    std::vector<LanguageRecord> out;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("report csv: missing header");
    const std::size_t width = 3 + 3 * archs.size() + 4;
    if (split_csv(line).size() != width) throw ParseError("report csv: header does not match architectures", 1);
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) break;
        const auto f = split_csv(line);
        if (f.size() != width) throw ParseError("report csv: wrong field count", lineno);
        LanguageRecord l;
        l.code = f[0];
        l.group = std::stoi(f[1]);
        l.levenshtein = std::stod(f[2]);
        for (std::size_t a = 0; a < archs.size(); ++a) {
            ArchScores s;
            s.bleu_baseline = parse_opt(f[3 + 3 * a]);
            s.bleu_pos = parse_opt(f[4 + 3 * a]);
            s.delta_percent = parse_opt(f[5 + 3 * a]);
            l.scores[archs[a]] = s;
        }
        const std::size_t tail = 3 + 3 * archs.size();
        l.n_train = std::stol(f[tail]);
        l.n_test = std::stol(f[tail + 1]);
        l.word_order = f[tail + 2];
        out.push_back(std::move(l));
    }
    return out;
}

} // namespace nmtlab::harness
