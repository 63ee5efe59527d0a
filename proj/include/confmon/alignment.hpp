#ifndef CONFMON_ALIGNMENT_HPP
#define CONFMON_ALIGNMENT_HPP

// Optimal alignments between traces and labeled accepting Petri nets.
//
// The search runs over the synchronous product of the trace and the net's
// reachability graph. A product state is (marking, number of trace events
// consumed). Moves:
//   synchronous  (a, t)  l(t) == a          cost c_sync
//   model        (>>, t) t visible          cost c_model
//   silent       (>>, t) t silent           cost c_silent
//   log          (a, >>)                    cost c_log
//
// Among all optimal alignments the returned one is the shortest, and among
// equally short ones the lexicographically smallest sequence under the move
// order synchronous < silent < model < log, then transition id.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "confmon/error.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/petri.hpp"

namespace confmon::align {

using petri::PetriNet;
using petri::TransitionId;

class AlignmentError : public Error {
public:
    using Error::Error;
};

enum class MoveKind : std::uint8_t { synchronous = 0, silent = 1, model = 2, log = 3 };

inline std::string_view to_string(MoveKind k) {
    switch (k) {
        case MoveKind::synchronous: return "sync";
        case MoveKind::silent: return "silent";
        case MoveKind::model: return "model";
        case MoveKind::log: return "log";
    }
    return "?";
}

struct Move {
    MoveKind kind;
    std::string activity;                   ///< log-side activity, or the label of a model move
    std::optional<TransitionId> transition;  ///< model side; nullopt for log moves

    bool has_log_part() const noexcept { return kind == MoveKind::synchronous || kind == MoveKind::log; }
    bool has_model_part() const noexcept { return kind != MoveKind::log; }

    friend bool operator==(const Move&, const Move&) = default;
};

struct CostScheme {
    double log = 1.0;
    double model = 1.0;
    double silent = 0.0;
    double sync = 0.0;

    void validate() const {
        if (!(log > 0) || !(model > 0)) throw Error("log and model move costs must be positive");
        if (sync != 0) throw Error("synchronous move cost must be zero");
        if (!(silent >= 0)) throw Error("silent move cost must be non-negative");
    }

    double of(MoveKind k) const noexcept {
        switch (k) {
            case MoveKind::synchronous: return sync;
            case MoveKind::silent: return silent;
            case MoveKind::model: return model;
            case MoveKind::log: return log;
        }
        return 0;
    }

    friend bool operator==(const CostScheme&, const CostScheme&) = default;
};

struct Alignment {
    std::vector<Move> moves;
    double cost = 0.0;
    std::size_t expanded_states = 0;

    std::size_t length() const noexcept { return moves.size(); }
};

enum class Heuristic {
    marking_bound,  ///< unknown-activity count plus unmatched visible firings still required
    zero,           ///< plain uniform-cost search
};

struct AlignOptions {
    std::size_t state_cap = 1'000'000;  ///< maximum expanded product states per trace
    std::size_t graph_cap = 100'000;    ///< maximum markings in the reachability graph
    Heuristic heuristic = Heuristic::marking_bound;
};

/// Per-net alignment engine. Construction explores the reachability graph and
/// precomputes backward distances to Mf; `align` is const and may be called
/// concurrently from several threads.
class Aligner {
public:
    explicit Aligner(PetriNet net, CostScheme costs = {}, AlignOptions opt = {})
        : net_(std::move(net)), costs_(costs), opt_(opt) {
        costs_.validate();
        graph_ = petri::explore(net_, opt_.graph_cap);
        if (!graph_.complete)
            throw AlignmentError("cannot align against net '" + net_.name() + "': " + graph_.incomplete_reason);
        if (!graph_.final_state) throw AlignmentError("final marking is unreachable from the initial marking");
        for (const auto& l : net_.visible_labels()) labels_.insert(l);
        min_visible_ = backward_distances(1.0, 0.0);
        model_cost_ = backward_distances(costs_.model, costs_.silent);
    }

    const PetriNet& net() const noexcept { return net_; }
    const CostScheme& costs() const noexcept { return costs_; }
    const std::set<std::string, std::less<>>& labels() const noexcept { return labels_; }
    std::size_t graph_size() const noexcept { return graph_.size(); }

    /// Cheapest model-only firing sequence from M0 to Mf.
    double model_only_cost() const noexcept { return model_cost_[0]; }

    /// Cost of the alignment made of log moves only followed by the cheapest
    /// model-only run.
    double worst_case_cost(std::span<const std::string> trace) const {
        return costs_.log * static_cast<double>(trace.size()) + model_only_cost();
    }

    double fitness(std::span<const std::string> trace, const Alignment& a) const {
        double worst = worst_case_cost(trace);
        if (!(worst > 0)) throw AlignmentError("worst-case alignment cost is zero; fitness is undefined");
        return 1.0 - a.cost / worst;
    }

    Alignment align(std::span<const std::string> trace) const;

private:
    static constexpr double kInf = std::numeric_limits<double>::infinity();
    static constexpr double kEps = 1e-9;

    std::vector<double> backward_distances(double visible_cost, double silent_cost) const {
        std::vector<std::vector<std::pair<std::uint32_t, double>>> rev(graph_.size());
        for (std::uint32_t s = 0; s < graph_.size(); ++s)
            for (const auto& e : graph_.successors[s])
                rev[e.target].push_back({s, net_.transition(e.transition).silent() ? silent_cost : visible_cost});
        std::vector<double> dist(graph_.size(), kInf);
        using Item = std::pair<double, std::uint32_t>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        dist[*graph_.final_state] = 0;
        pq.push({0.0, *graph_.final_state});
        while (!pq.empty()) {
            auto [d, s] = pq.top();
            pq.pop();
            if (d > dist[s]) continue;
            for (auto [p, w] : rev[s])
                if (d + w < dist[p]) {
                    dist[p] = d + w;
                    pq.push({dist[p], p});
                }
        }
        return dist;
    }

    PetriNet net_;
    CostScheme costs_;
    AlignOptions opt_;
    petri::ReachabilityGraph graph_;
    std::set<std::string, std::less<>> labels_;
    std::vector<double> min_visible_;  ///< fewest visible firings from each marking to Mf
    std::vector<double> model_cost_;   ///< cheapest model-only completion from each marking
};

inline Alignment Aligner::align(std::span<const std::string> trace) const {
    const std::size_t n = trace.size();
    const std::uint64_t width = n + 1;

    // Suffix counts for the heuristic: events outside the model alphabet can
    // only be log moves; every further visible firing beyond the remaining
    // matchable events must be a model move.
    std::vector<std::uint32_t> unknown_suffix(n + 1, 0), known_suffix(n + 1, 0);
    for (std::size_t i = n; i-- > 0;) {
        const bool known = labels_.count(trace[i]) != 0;
        unknown_suffix[i] = unknown_suffix[i + 1] + (known ? 0 : 1);
        known_suffix[i] = known_suffix[i + 1] + (known ? 1 : 0);
    }
    auto heuristic = [&](std::uint32_t node, std::size_t pos) -> double {
        if (opt_.heuristic == Heuristic::zero) return 0.0;
        const double vmin = min_visible_[node];
        if (vmin == kInf) return kInf;
        const double excess = std::max(0.0, vmin - static_cast<double>(known_suffix[pos]));
        return costs_.log * unknown_suffix[pos] + costs_.model * excess;
    };

    struct State {
        std::uint32_t node;
        std::uint32_t pos;
        double g;
        bool closed;
    };
    std::vector<State> states;
    std::unordered_map<std::uint64_t, std::uint32_t> index;
    auto key = [width](std::uint32_t node, std::size_t pos) { return std::uint64_t{node} * width + pos; };

    // Enumerates moves out of (node, pos) as (kind, transition, node', pos').
    auto for_each_move = [&](std::uint32_t node, std::uint32_t pos, auto&& fn) {
        for (const auto& e : graph_.successors[node]) {
            const auto& tr = net_.transition(e.transition);
            if (tr.silent()) {
                fn(MoveKind::silent, std::optional<TransitionId>{e.transition}, e.target, pos);
                continue;
            }
            if (pos < n && *tr.label == trace[pos])
                fn(MoveKind::synchronous, std::optional<TransitionId>{e.transition}, e.target, pos + 1);
            fn(MoveKind::model, std::optional<TransitionId>{e.transition}, e.target, pos);
        }
        if (pos < n) fn(MoveKind::log, std::optional<TransitionId>{}, node, pos + 1);
    };

    struct Entry {
        double f;
        double h;
        std::uint64_t seq;
        std::uint32_t state;
        bool operator>(const Entry& o) const { return std::tie(f, h, seq) > std::tie(o.f, o.h, o.seq); }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t seq = 0;

    auto relax = [&](std::uint32_t node, std::uint32_t pos, double g) {
        const double h = heuristic(node, pos);
        if (h == kInf) return;
        auto [it, inserted] = index.emplace(key(node, pos), static_cast<std::uint32_t>(states.size()));
        if (inserted) {
            states.push_back({node, pos, g, false});
        } else {
            auto& s = states[it->second];
            if (s.closed || g >= s.g - kEps) return;
            s.g = g;
        }
        open.push({g + h, h, seq++, it->second});
    };

    const std::uint32_t goal_node = *graph_.final_state;
    relax(0, 0, 0.0);
    std::optional<double> best;
    std::optional<std::uint32_t> goal;
    std::size_t expanded = 0;
    while (!open.empty()) {
        Entry top = open.top();
        if (best && top.f > *best + kEps) break;
        open.pop();
        auto& s = states[top.state];
        if (s.closed || top.f - top.h > s.g + kEps) continue;
        s.closed = true;
        if (++expanded > opt_.state_cap)
            throw AlignmentError("alignment state-space exhausted after " + std::to_string(opt_.state_cap) +
                                 " expanded states");
        if (s.node == goal_node && s.pos == n) {
            if (!best) {
                best = s.g;
                goal = top.state;
            }
            continue;
        }
        const double g = s.g;
        const std::uint32_t node = s.node, pos = s.pos;
        for_each_move(node, pos, [&](MoveKind k, std::optional<TransitionId>, std::uint32_t nn, std::uint32_t np) {
            relax(nn, np, g + costs_.of(k));
        });
    }
    if (!goal) throw AlignmentError("no alignment exists: final marking unreachable");

    // Every state on an optimal path is now closed with its exact g. Keep the
    // tight edges between closed states and measure, backwards from the goal,
    // the fewest moves needed to finish optimally.
    std::vector<std::vector<std::uint32_t>> tight_preds(states.size());
    for (std::uint32_t i = 0; i < states.size(); ++i) {
        if (!states[i].closed) continue;
        const auto& s = states[i];
        for_each_move(s.node, s.pos, [&](MoveKind k, std::optional<TransitionId>, std::uint32_t nn, std::uint32_t np) {
            auto it = index.find(key(nn, np));
            if (it == index.end()) return;
            const auto& t = states[it->second];
            if (t.closed && std::abs(s.g + costs_.of(k) - t.g) <= kEps) tight_preds[it->second].push_back(i);
        });
    }
    constexpr std::uint32_t kUnset = std::numeric_limits<std::uint32_t>::max();
    std::vector<std::uint32_t> hops(states.size(), kUnset);
    std::deque<std::uint32_t> queue{*goal};
    hops[*goal] = 0;
    while (!queue.empty()) {
        auto cur = queue.front();
        queue.pop_front();
        for (auto p : tight_preds[cur])
            if (hops[p] == kUnset) {
                hops[p] = hops[cur] + 1;
                queue.push_back(p);
            }
    }

    Alignment result;
    result.cost = *best;
    result.expanded_states = expanded;
    std::uint32_t cur = index.at(key(0, 0));
    while (cur != *goal) {
        const auto& s = states[cur];
        std::optional<std::tuple<MoveKind, std::string_view, std::uint32_t, std::optional<TransitionId>>> pick;
        for_each_move(s.node, s.pos, [&](MoveKind k, std::optional<TransitionId> t, std::uint32_t nn, std::uint32_t np) {
            auto it = index.find(key(nn, np));
            if (it == index.end()) return;
            const auto& nxt = states[it->second];
            if (!nxt.closed || hops[it->second] + 1 != hops[cur]) return;
            if (std::abs(s.g + costs_.of(k) - nxt.g) > kEps) return;
            std::string_view tid = t ? std::string_view(net_.transition(*t).id) : std::string_view{};
            if (!pick || std::tie(k, tid) < std::tie(std::get<0>(*pick), std::get<1>(*pick)))
                pick.emplace(k, tid, it->second, t);
        });
        if (!pick) throw AlignmentError("internal error: optimal path reconstruction failed");
        auto [kind, tid, next, t] = *pick;
        Move mv{kind, {}, t};
        if (kind == MoveKind::synchronous || kind == MoveKind::log)
            mv.activity = trace[s.pos];
        else if (kind == MoveKind::model)
            mv.activity = *net_.transition(*t).label;
        result.moves.push_back(std::move(mv));
        cur = next;
    }
    return result;
}

// ---------------------------------------------------------------------------
// Convenience wrappers

inline Alignment optimal_alignment(const PetriNet& net, const log::Trace& trace, const CostScheme& costs = {}) {
    return Aligner(net, costs).align(trace.events);
}

inline double worst_case_cost(const PetriNet& net, const log::Trace& trace, const CostScheme& costs = {}) {
    return Aligner(net, costs).worst_case_cost(trace.events);
}

inline double trace_fitness(const PetriNet& net, const log::Trace& trace, const CostScheme& costs = {}) {
    Aligner aligner(net, costs);
    return aligner.fitness(trace.events, aligner.align(trace.events));
}

inline double log_fitness(const Aligner& aligner, const log::EventLog& log) {
    if (log.empty()) throw Error("log fitness of an empty log is undefined");
    double sum = 0;
    for (const auto& t : log) sum += aligner.fitness(t.events, aligner.align(t.events));
    return sum / static_cast<double>(log.size());
}

inline double log_fitness(const PetriNet& net, const log::EventLog& log, const CostScheme& costs = {}) {
    return log_fitness(Aligner(net, costs), log);
}

/// Projection of the log row (SKIPs dropped).
inline std::vector<std::string> log_projection(const Alignment& a) {
    std::vector<std::string> out;
    for (const auto& m : a.moves)
        if (m.has_log_part()) out.push_back(m.activity);
    return out;
}

/// Projection of the model row (SKIPs dropped), silent transitions included.
inline std::vector<TransitionId> model_projection(const Alignment& a) {
    std::vector<TransitionId> out;
    for (const auto& m : a.moves)
        if (m.has_model_part()) out.push_back(*m.transition);
    return out;
}

/// Two-row rendering: log row above, model row below, `>>` for skips.
inline std::string format(const PetriNet& net, const Alignment& a) {
    std::vector<std::string> top, bottom;
    for (const auto& m : a.moves) {
        top.push_back(m.has_log_part() ? m.activity : std::string(petri::kSkipToken));
        bottom.push_back(m.has_model_part() ? net.transition(*m.transition).id : std::string(petri::kSkipToken));
    }
    std::string r1 = "|", r2 = "|";
    for (std::size_t i = 0; i < top.size(); ++i) {
        auto w = std::max(top[i].size(), bottom[i].size());
        r1 += " " + top[i] + std::string(w - top[i].size(), ' ') + " |";
        r2 += " " + bottom[i] + std::string(w - bottom[i].size(), ' ') + " |";
    }
    return r1 + "\n" + r2 + "\n";
}

// ---------------------------------------------------------------------------
// Misalignment counters

inline constexpr std::string_view kUnknownColumn = "UNKNOWN";

struct Misalignments {
    std::vector<std::uint32_t> counts;  ///< one per column
    std::uint32_t unknown = 0;          ///< log moves on activities outside the columns
    std::uint32_t log_moves = 0;
    std::uint32_t model_moves = 0;

    std::uint64_t total() const noexcept {
        std::uint64_t s = unknown;
        for (auto c : counts) s += c;
        return s;
    }
};

/// Counts non-synchronous visible moves per activity column. Silent and
/// synchronous moves count nothing; log moves on activities that are not a
/// column go to the UNKNOWN counter.
inline Misalignments misalignments(const Alignment& a, std::span<const std::string> columns) {
    Misalignments r;
    r.counts.assign(columns.size(), 0);
    auto column_of = [&](const std::string& act) -> std::optional<std::size_t> {
        auto it = std::lower_bound(columns.begin(), columns.end(), act);
        if (it != columns.end() && *it == act) return static_cast<std::size_t>(it - columns.begin());
        auto lin = std::find(columns.begin(), columns.end(), act);
        if (lin != columns.end()) return static_cast<std::size_t>(lin - columns.begin());
        return std::nullopt;
    };
    for (const auto& m : a.moves) {
        if (m.kind == MoveKind::log) {
            ++r.log_moves;
            if (auto c = column_of(m.activity))
                ++r.counts[*c];
            else
                ++r.unknown;
        } else if (m.kind == MoveKind::model) {
            ++r.model_moves;
            if (auto c = column_of(m.activity))
                ++r.counts[*c];
            else
                throw Error("model move on '" + m.activity + "' has no diagnosis column");
        }
    }
    return r;
}

// ---------------------------------------------------------------------------
// Coverage

/// 1 - (total misalignments) / (total optimal alignment length) over a log.
inline double coverage(const Aligner& aligner, const log::EventLog& log) {
    if (log.empty()) throw Error("coverage of an empty log is undefined");
    const auto columns = aligner.net().visible_labels();
    std::uint64_t mis = 0, len = 0;
    for (const auto& t : log) {
        auto a = aligner.align(t.events);
        mis += misalignments(a, columns).total();
        len += a.length();
    }
    if (len == 0) throw Error("coverage is undefined: all optimal alignments are empty");
    return 1.0 - static_cast<double>(mis) / static_cast<double>(len);
}

inline double coverage(const PetriNet& net, const log::EventLog& log, const CostScheme& costs = {}) {
    return coverage(Aligner(net, costs), log);
}

} // namespace confmon::align

#endif // CONFMON_ALIGNMENT_HPP
