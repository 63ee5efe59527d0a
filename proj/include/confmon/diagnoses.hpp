#ifndef CONFMON_DIAGNOSES_HPP
#define CONFMON_DIAGNOSES_HPP

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>
#include <vector>

#include "confmon/alignment.hpp"
#include "confmon/error.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/parallel.hpp"

namespace confmon::diag {

inline constexpr std::string_view kFitnessColumn = "fitness";

struct DiagRow {
    std::string case_id;
    std::vector<std::uint32_t> counts;  ///< one per label, then UNKNOWN
    double fitness = 1.0;

    friend bool operator==(const DiagRow&, const DiagRow&) = default;
};

/// Per-trace misalignment counters plus fitness, one row per trace in log
/// order. Columns: sorted visible labels, UNKNOWN, fitness.
struct DiagnosesMatrix {
    std::vector<std::string> labels;
    std::vector<DiagRow> rows;
    std::string model_id;
    align::CostScheme costs;

    std::size_t width() const noexcept { return labels.size() + 2; }

    std::vector<std::string> columns() const {
        auto c = labels;
        c.emplace_back(align::kUnknownColumn);
        c.emplace_back(kFitnessColumn);
        return c;
    }

    /// Feature vector of one row: counts as reals followed by fitness.
    std::vector<double> features(std::size_t row) const {
        const auto& r = rows.at(row);
        std::vector<double> f(r.counts.begin(), r.counts.end());
        f.push_back(r.fitness);
        return f;
    }

    friend bool operator==(const DiagnosesMatrix&, const DiagnosesMatrix&) = default;
};

/// Aligns every trace and assembles the rows in log order. Traces are
/// aligned in parallel on `threads` workers.
inline DiagnosesMatrix build_diagnoses(const align::Aligner& aligner, const log::EventLog& log,
                                       std::size_t threads = thread_count()) {
    DiagnosesMatrix d;
    d.labels = aligner.net().visible_labels();
    d.model_id = aligner.net().name();
    d.costs = aligner.costs();
    d.rows.resize(log.size());
    parallel_for(log.size(), threads, [&](std::size_t i) {
        const auto& t = log[i];
        try {
            auto a = aligner.align(t.events);
            auto m = align::misalignments(a, d.labels);
            DiagRow row{t.case_id, std::move(m.counts), aligner.fitness(t.events, a)};
            row.counts.push_back(m.unknown);
            d.rows[i] = std::move(row);
        } catch (const Error& e) {
            throw Error("case '" + t.case_id + "': " + e.what());
        }
    });
    return d;
}

inline DiagnosesMatrix build_diagnoses(const petri::PetriNet& net, const log::EventLog& log,
                                       const align::CostScheme& costs = {}) {
    return build_diagnoses(align::Aligner(net, costs), log);
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

/// `# model=<id> costs=<log>,<model>,<silent>,<sync>` provenance line, then the
/// header `case,<labels...>,UNKNOWN,fitness` and one row per trace.
inline std::string write_diagnoses(const DiagnosesMatrix& d) {
    std::string out = "# model=" + (d.model_id.empty() ? std::string("-") : d.model_id) +
                      " costs=" + format_fixed6(d.costs.log) + "," + format_fixed6(d.costs.model) + "," +
                      format_fixed6(d.costs.silent) + "," + format_fixed6(d.costs.sync) + "\n";
    out += "case";
    for (const auto& c : d.columns()) out += "," + c;
    out += "\n";
    for (const auto& r : d.rows) {
        out += r.case_id;
        for (auto c : r.counts) out += "," + std::to_string(c);
        out += "," + format_fixed6(r.fitness) + "\n";
    }
    return out;
}

inline DiagnosesMatrix read_diagnoses(std::string_view text) {
    DiagnosesMatrix d;
    auto lines = log::detail::lines_of(text);
    std::size_t i = 0;
    bool have_header = false;
    std::size_t width = 0;
    for (; i < lines.size(); ++i) {
        auto t = log::detail::trim(lines[i]);
        if (t.empty()) continue;
        if (t.front() == '#') {
            for (const auto& tok : petri::detail::split_ws(t.substr(1))) {
                if (tok.starts_with("model=")) {
                    d.model_id = tok.substr(6);
                    if (d.model_id == "-") d.model_id.clear();
                } else if (tok.starts_with("costs=")) {
                    auto c = log::detail::split(std::string_view(tok).substr(6), ',');
                    if (c.size() != 4) throw ParseError("malformed cost provenance", i + 1);
                    try {
                        d.costs = {std::stod(c[0]), std::stod(c[1]), std::stod(c[2]), std::stod(c[3])};
                    } catch (const std::exception&) {
                        throw ParseError("malformed cost provenance", i + 1);
                    }
                }
            }
            continue;
        }
        auto header = log::detail::split(t, ',');
        if (header.size() < 3 || header.front() != "case" || header.back() != kFitnessColumn ||
            header[header.size() - 2] != align::kUnknownColumn)
            throw ParseError("header must be 'case,<activities...>,UNKNOWN,fitness'", i + 1);
        d.labels.assign(header.begin() + 1, header.end() - 2);
        if (!std::is_sorted(d.labels.begin(), d.labels.end()) ||
            std::adjacent_find(d.labels.begin(), d.labels.end()) != d.labels.end())
            throw ParseError("activity columns must be sorted and unique", i + 1);
        width = header.size();
        have_header = true;
        ++i;
        break;
    }
    if (!have_header) throw ParseError("missing diagnoses header");

    for (; i < lines.size(); ++i) {
        const std::size_t line_no = i + 1;
        auto t = log::detail::trim(lines[i]);
        if (t.empty() || t.front() == '#') continue;
        auto cells = log::detail::split(t, ',');
        if (cells.size() != width)
            throw ParseError("row has " + std::to_string(cells.size()) + " columns, header has " +
                                 std::to_string(width),
                             line_no);
        DiagRow row;
        row.case_id = cells[0];
        for (std::size_t c = 1; c + 1 < cells.size(); ++c) {
            const auto& s = cells[c];
            if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char ch) { return std::isdigit(ch); }))
                throw ParseError("count '" + s + "' is not a non-negative integer", line_no);
            try {
                row.counts.push_back(static_cast<std::uint32_t>(std::stoul(s)));
            } catch (const std::exception&) {
                throw ParseError("count '" + s + "' out of range", line_no);
            }
        }
        try {
            std::size_t used = 0;
            row.fitness = std::stod(cells.back(), &used);
            if (used != cells.back().size()) throw std::invalid_argument(cells.back());
        } catch (const std::exception&) {
            throw ParseError("fitness '" + cells.back() + "' is not a number", line_no);
        }
        if (!(row.fitness >= 0.0 && row.fitness <= 1.0))
            throw ParseError("fitness " + cells.back() + " outside [0, 1]", line_no);
        d.rows.push_back(std::move(row));
    }
    return d;
}

/// As read_diagnoses, additionally requiring the activity columns to match.
inline DiagnosesMatrix read_diagnoses(std::string_view text, const std::vector<std::string>& expected_labels) {
    auto d = read_diagnoses(text);
    if (d.labels != expected_labels) throw ParseError("diagnoses header does not match the expected activity columns");
    return d;
}

} // namespace confmon::diag

#endif // CONFMON_DIAGNOSES_HPP
