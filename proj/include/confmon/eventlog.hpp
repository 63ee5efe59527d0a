#ifndef CONFMON_EVENTLOG_HPP
#define CONFMON_EVENTLOG_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "confmon/error.hpp"
#include "confmon/petri.hpp"

namespace confmon::log {

enum class Label { normal, anomalous };

inline std::string_view to_string(Label l) { return l == Label::normal ? "normal" : "anomalous"; }

inline std::optional<Label> parse_label(std::string_view s) {
    if (s == "normal") return Label::normal;
    if (s == "anomalous") return Label::anomalous;
    return std::nullopt;
}

struct Trace {
    std::string case_id;
    std::vector<std::string> events;
    std::optional<Label> label;

    std::size_t size() const noexcept { return events.size(); }
    bool empty() const noexcept { return events.empty(); }

    friend bool operator==(const Trace&, const Trace&) = default;
};

/// Ordered multiset of traces. Case ids are unique; event sequences may repeat.
class EventLog {
public:
    EventLog() = default;

    void add(Trace t) {
        if (t.case_id.empty()) throw Error("trace has an empty case id");
        if (!ids_.insert(t.case_id).second) throw Error("duplicate case id '" + t.case_id + "'");
        traces_.push_back(std::move(t));
    }

    bool contains(const std::string& case_id) const { return ids_.count(case_id) != 0; }

    std::size_t size() const noexcept { return traces_.size(); }
    bool empty() const noexcept { return traces_.empty(); }
    const Trace& operator[](std::size_t i) const { return traces_.at(i); }
    const std::vector<Trace>& traces() const noexcept { return traces_; }
    auto begin() const noexcept { return traces_.begin(); }
    auto end() const noexcept { return traces_.end(); }

    friend bool operator==(const EventLog& a, const EventLog& b) { return a.traces_ == b.traces_; }

private:
    std::vector<Trace> traces_;
    std::unordered_set<std::string> ids_;
};

// ---------------------------------------------------------------------------
// Serialization

namespace detail {

inline bool valid_token(std::string_view s) {
    return petri::is_valid_activity(s) && s.find(',') == std::string_view::npos &&
           s.find('|') == std::string_view::npos;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

inline std::vector<std::string> lines_of(std::string_view text) {
    std::vector<std::string> out;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        out.push_back(line);
    }
    return out;
}

inline bool is_blank_or_comment(std::string_view line) {
    auto t = trim(line);
    return t.empty() || t.front() == '#';
}

inline EventLog parse_trace_lines(const std::vector<std::string>& lines) {
    EventLog log;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        std::string_view line = lines[i];
        if (is_blank_or_comment(line)) continue;
        auto colon = line.find(':');
        if (colon == std::string_view::npos) throw ParseError("expected '<case_id>: <activities>'", line_no);
        Trace t;
        t.case_id = std::string(trim(line.substr(0, colon)));
        if (!valid_token(t.case_id) || t.case_id.find(':') != std::string::npos)
            throw ParseError("invalid case id '" + t.case_id + "'", line_no);
        std::string_view body = line.substr(colon + 1);
        if (auto bar = body.find('|'); bar != std::string_view::npos) {
            auto lbl = trim(body.substr(bar + 1));
            auto parsed = parse_label(lbl);
            if (!parsed) throw ParseError("unknown label '" + std::string(lbl) + "'", line_no);
            t.label = parsed;
            body = body.substr(0, bar);
        }
        for (auto& tok : petri::detail::split_ws(body)) {
            if (!valid_token(tok)) throw ParseError("invalid activity '" + tok + "'", line_no);
            t.events.push_back(std::move(tok));
        }
        try {
            log.add(std::move(t));
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
    }
    return log;
}

inline EventLog parse_csv_lines(const std::vector<std::string>& lines, std::size_t header_index) {
    auto header = split(lines[header_index], ',');
    const bool with_label = header.size() == 3;
    if (header.size() < 2 || header.size() > 3 || header[0] != "case" || header[1] != "activity" ||
        (with_label && header[2] != "label"))
        throw ParseError("CSV header must be 'case,activity[,label]'", header_index + 1);

    std::vector<Trace> traces;
    std::map<std::string, std::size_t> index;
    for (std::size_t i = header_index + 1; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        if (is_blank_or_comment(lines[i])) continue;
        auto cells = split(lines[i], ',');
        if (cells.size() != header.size())
            throw ParseError("expected " + std::to_string(header.size()) + " columns, got " +
                                 std::to_string(cells.size()),
                             line_no);
        if (!valid_token(cells[0]) || cells[0].find(':') != std::string::npos)
            throw ParseError("invalid case id '" + cells[0] + "'", line_no);
        if (!valid_token(cells[1])) throw ParseError("invalid activity '" + cells[1] + "'", line_no);
        std::optional<Label> label;
        if (with_label) {
            label = parse_label(cells[2]);
            if (!label) throw ParseError("unknown label '" + cells[2] + "'", line_no);
        }
        auto [it, inserted] = index.emplace(cells[0], traces.size());
        if (inserted) traces.push_back({cells[0], {}, label});
        auto& t = traces[it->second];
        if (t.label != label) throw ParseError("inconsistent label for case '" + cells[0] + "'", line_no);
        t.events.push_back(cells[1]);
    }
    EventLog log;
    for (auto& t : traces) log.add(std::move(t));
    return log;
}

} // namespace detail

/// Parses either the trace-per-line format (`c1: a b c | normal`) or the CSV
/// format (header `case,activity[,label]`). The format is detected from the
/// first non-blank, non-comment line.
inline EventLog parse_log(std::string_view text) {
    auto lines = detail::lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (detail::is_blank_or_comment(lines[i])) continue;
        if (detail::trim(lines[i]).starts_with("case,")) return detail::parse_csv_lines(lines, i);
        break;
    }
    return detail::parse_trace_lines(lines);
}

inline std::string write_log(const EventLog& log) {
    std::string out;
    for (const auto& t : log) {
        out += t.case_id;
        out += ':';
        for (const auto& e : t.events) {
            out += ' ';
            out += e;
        }
        if (t.label) {
            out += " | ";
            out += to_string(*t.label);
        }
        out += '\n';
    }
    return out;
}

/// CSV form. Empty traces have no rows and are therefore not representable.
inline std::string write_log_csv(const EventLog& log) {
    const bool with_label =
        std::any_of(log.begin(), log.end(), [](const Trace& t) { return t.label.has_value(); });
    if (with_label && !std::all_of(log.begin(), log.end(), [](const Trace& t) { return t.label.has_value(); }))
        throw Error("CSV output needs labels on all traces or on none");
    std::string out = with_label ? "case,activity,label\n" : "case,activity\n";
    for (const auto& t : log) {
        if (t.empty()) throw Error("case '" + t.case_id + "' is empty and cannot be written as CSV");
        for (const auto& e : t.events) {
            out += t.case_id + "," + e;
            if (with_label) out += "," + std::string(to_string(*t.label));
            out += '\n';
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Raw software-log ingestion

/// Keeps, for each raw line, the first whitespace-delimited token that is a
/// vocabulary activity; lines without one are dropped. Tokens match whole.
inline Trace ingest_raw(std::span<const std::string> lines, const std::set<std::string, std::less<>>& vocabulary,
                        std::string case_id = "raw") {
    Trace t{std::move(case_id), {}, std::nullopt};
    for (const auto& line : lines) {
        for (auto& tok : petri::detail::split_ws(line)) {
            if (vocabulary.count(tok)) {
                t.events.push_back(std::move(tok));
                break;
            }
        }
    }
    return t;
}

// ---------------------------------------------------------------------------
// Statistics

struct LogStats {
    std::size_t n_traces = 0;
    std::size_t n_variants = 0;
    double mean_len = 0.0;
    double std_len = 0.0;  ///< population standard deviation
};

/// Distinct event sequences and their multiplicities; case ids are ignored.
inline std::map<std::vector<std::string>, std::size_t> variants(const EventLog& log) {
    std::map<std::vector<std::string>, std::size_t> v;
    for (const auto& t : log) ++v[t.events];
    return v;
}

inline LogStats stats(const EventLog& log) {
    LogStats s;
    s.n_traces = log.size();
    if (log.empty()) return s;
    s.n_variants = variants(log).size();
    double sum = 0.0;
    for (const auto& t : log) sum += static_cast<double>(t.size());
    s.mean_len = sum / static_cast<double>(log.size());
    double sq = 0.0;
    for (const auto& t : log) {
        double d = static_cast<double>(t.size()) - s.mean_len;
        sq += d * d;
    }
    s.std_len = std::sqrt(sq / static_cast<double>(log.size()));
    return s;
}

// ---------------------------------------------------------------------------
// Train / validation / test split

struct SplitRatios {
    double train = 0.6;
    double validation = 0.2;
    double test = 0.2;
};

struct LogSplit {
    EventLog train;
    EventLog validation;
    EventLog test;
};

inline SplitRatios parse_ratios(std::string_view s) {
    auto parts = detail::split(s, ',');
    if (parts.size() != 3) throw Error("split ratios must be three comma-separated numbers");
    std::array<double, 3> r{};
    for (std::size_t i = 0; i < 3; ++i) {
        try {
            std::size_t used = 0;
            r[i] = std::stod(parts[i], &used);
            if (used != parts[i].size()) throw std::invalid_argument(parts[i]);
        } catch (const std::exception&) {
            throw Error("invalid split ratio '" + parts[i] + "'");
        }
    }
    return {r[0], r[1], r[2]};
}

/// Uniform random partition by trace. Validation and test receive
/// floor(r * n) traces each; the remainder goes to training. Each part keeps
/// the original log order.
inline LogSplit split_log(const EventLog& log, const SplitRatios& ratios, std::uint64_t seed) {
    if (!(ratios.train > 0 && ratios.validation > 0 && ratios.test > 0))
        throw Error("split ratios must be positive");
    if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9)
        throw Error("split ratios must sum to 1");
    const std::size_t n = log.size();
    auto part = [n](double r) { return static_cast<std::size_t>(std::floor(r * static_cast<double>(n) + 1e-9)); };
    const std::size_t n_val = part(ratios.validation);
    const std::size_t n_test = part(ratios.test);
    const std::size_t n_train = n - n_val - n_test;
    if (n_train == 0 || n_val == 0 || n_test == 0)
        throw Error("split of " + std::to_string(n) + " traces leaves a partition empty (sizes " +
                    std::to_string(n_train) + "/" + std::to_string(n_val) + "/" + std::to_string(n_test) + ")");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> bucket(n, 0);
    for (std::size_t i = 0; i < n; ++i) bucket[order[i]] = i < n_train ? 0 : (i < n_train + n_val ? 1 : 2);
    LogSplit out;
    for (std::size_t i = 0; i < n; ++i) {
        auto& dst = bucket[i] == 0 ? out.train : (bucket[i] == 1 ? out.validation : out.test);
        dst.add(log[i]);
    }
    return out;
}

} // namespace confmon::log

#endif // CONFMON_EVENTLOG_HPP
