#ifndef CONFMON_PETRI_HPP
#define CONFMON_PETRI_HPP

// Labeled accepting Petri nets: data model, model-file parser, firing rule,
// workflow-net check, bounded reachability graph and soundness report.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "confmon/error.hpp"

namespace confmon::petri {

using PlaceId = std::uint32_t;
using TransitionId = std::uint32_t;

/// Tokens per place are capped so unbounded nets fail fast.
inline constexpr std::uint32_t kMaxTokens = 65535;

inline constexpr std::string_view kSilentToken = "tau";
inline constexpr std::string_view kSkipToken = ">>";

/// Raised when a marking would exceed kMaxTokens on some place.
class BoundError : public Error {
public:
    using Error::Error;
};

/// Raised when firing a transition that is not enabled.
class FiringError : public Error {
public:
    using Error::Error;
};

inline bool is_valid_activity(std::string_view name) {
    if (name.empty() || name == kSilentToken || name == kSkipToken) return false;
    return std::none_of(name.begin(), name.end(), [](unsigned char c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    });
}

class NetBuilder;

/// Multiset of tokens over the places of one net, indexed by PlaceId.
class Marking {
public:
    Marking() = default;
    explicit Marking(std::size_t n_places) : counts_(n_places, 0) {}

    std::size_t size() const noexcept { return counts_.size(); }
    std::uint16_t operator[](PlaceId p) const { return counts_.at(p); }

    void set(PlaceId p, std::uint32_t count) {
        if (count > kMaxTokens)
            throw BoundError("token count " + std::to_string(count) + " exceeds bound " +
                             std::to_string(kMaxTokens));
        counts_.at(p) = static_cast<std::uint16_t>(count);
    }
    void add(PlaceId p, std::uint32_t n = 1) { set(p, std::uint32_t{counts_.at(p)} + n); }

    std::uint64_t total() const noexcept {
        std::uint64_t s = 0;
        for (auto c : counts_) s += c;
        return s;
    }
    bool empty() const noexcept { return total() == 0; }

    const std::vector<std::uint16_t>& counts() const noexcept { return counts_; }

    friend bool operator==(const Marking&, const Marking&) = default;
    friend auto operator<=>(const Marking&, const Marking&) = default;

private:
    friend class NetBuilder;
    std::vector<std::uint16_t> counts_;
};

struct MarkingHash {
    std::size_t operator()(const Marking& m) const noexcept {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto c : m.counts()) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

struct Transition {
    std::string id;
    std::optional<std::string> label;  ///< nullopt for silent transitions

    bool silent() const noexcept { return !label.has_value(); }
};

/// Labeled accepting Petri net (places, transitions, arcs, M0, Mf, labels).
/// Immutable once built; construct through NetBuilder or parse_model.
class PetriNet {
public:
    const std::string& name() const noexcept { return name_; }

    std::size_t place_count() const noexcept { return places_.size(); }
    std::size_t transition_count() const noexcept { return transitions_.size(); }

    const std::string& place(PlaceId p) const { return places_.at(p); }
    const Transition& transition(TransitionId t) const { return transitions_.at(t); }
    const std::vector<std::string>& places() const noexcept { return places_; }
    const std::vector<Transition>& transitions() const noexcept { return transitions_; }

    const std::vector<PlaceId>& inputs(TransitionId t) const { return pre_.at(t); }
    const std::vector<PlaceId>& outputs(TransitionId t) const { return post_.at(t); }

    const Marking& initial_marking() const noexcept { return initial_; }
    const Marking& final_marking() const noexcept { return final_; }

    std::optional<PlaceId> find_place(std::string_view id) const {
        for (PlaceId p = 0; p < places_.size(); ++p)
            if (places_[p] == id) return p;
        return std::nullopt;
    }
    std::optional<TransitionId> find_transition(std::string_view id) const {
        for (TransitionId t = 0; t < transitions_.size(); ++t)
            if (transitions_[t].id == id) return t;
        return std::nullopt;
    }

    /// Sorted, de-duplicated visible labels (the model alphabet).
    std::vector<std::string> visible_labels() const {
        std::set<std::string> s;
        for (const auto& t : transitions_)
            if (t.label) s.insert(*t.label);
        return {s.begin(), s.end()};
    }

    std::size_t silent_count() const noexcept {
        return static_cast<std::size_t>(std::count_if(
            transitions_.begin(), transitions_.end(), [](const Transition& t) { return t.silent(); }));
    }

    std::size_t arc_count() const noexcept {
        std::size_t n = 0;
        for (TransitionId t = 0; t < transitions_.size(); ++t) n += pre_[t].size() + post_[t].size();
        return n;
    }

    Marking empty_marking() const { return Marking(places_.size()); }

    /// Marking from (place id, count) pairs; unknown places are an error.
    Marking marking(std::initializer_list<std::pair<std::string_view, std::uint32_t>> entries) const {
        Marking m = empty_marking();
        for (const auto& [id, count] : entries) {
            auto p = find_place(id);
            if (!p) throw Error("unknown place '" + std::string(id) + "'");
            m.add(*p, count);
        }
        return m;
    }

    /// Renders as `{p1:1, p2:1}` with places in declaration order.
    std::string format(const Marking& m) const {
        std::string out = "{";
        bool first = true;
        for (PlaceId p = 0; p < m.size(); ++p) {
            if (m[p] == 0) continue;
            if (!first) out += ", ";
            out += places_[p] + ":" + std::to_string(m[p]);
            first = false;
        }
        return out + "}";
    }

private:
    friend class NetBuilder;

    std::string name_;
    std::vector<std::string> places_;
    std::vector<Transition> transitions_;
    std::vector<std::vector<PlaceId>> pre_;
    std::vector<std::vector<PlaceId>> post_;
    Marking initial_;
    Marking final_;
};

/// Incremental construction of a PetriNet. `build()` enforces every
/// structural invariant; `build_relaxed()` skips the per-transition
/// "has input and output arcs" rule so derived nets can be analysed.
class NetBuilder {
public:
    NetBuilder() = default;
    explicit NetBuilder(std::string name) { net_.name_ = std::move(name); }
    explicit NetBuilder(const PetriNet& net) : net_(net) {
        has_initial_ = !net.initial_.empty();
        has_final_ = !net.final_.empty();
    }

    NetBuilder& name(std::string n) {
        net_.name_ = std::move(n);
        return *this;
    }

    NetBuilder& place(const std::string& id) {
        check_new_id(id);
        net_.places_.push_back(id);
        net_.initial_.counts_.push_back(0);
        net_.final_.counts_.push_back(0);
        return *this;
    }

    NetBuilder& transition(const std::string& id, std::optional<std::string> label) {
        check_new_id(id);
        if (label && !is_valid_activity(*label))
            throw Error("invalid activity name '" + *label + "' on transition '" + id + "'");
        net_.transitions_.push_back({id, std::move(label)});
        net_.pre_.emplace_back();
        net_.post_.emplace_back();
        return *this;
    }
    NetBuilder& silent(const std::string& id) { return transition(id, std::nullopt); }

    NetBuilder& arc(std::string_view from, std::string_view to) {
        auto pf = net_.find_place(from);
        auto tf = net_.find_transition(from);
        auto pt = net_.find_place(to);
        auto tt = net_.find_transition(to);
        if (!pf && !tf) throw Error("arc references undeclared node '" + std::string(from) + "'");
        if (!pt && !tt) throw Error("arc references undeclared node '" + std::string(to) + "'");
        std::vector<PlaceId>* list = nullptr;
        PlaceId p = 0;
        if (pf && tt) {
            list = &net_.pre_[*tt];
            p = *pf;
        } else if (tf && pt) {
            list = &net_.post_[*tf];
            p = *pt;
        } else {
            throw Error("arc " + std::string(from) + " -> " + std::string(to) +
                        " must connect a place and a transition");
        }
        if (std::find(list->begin(), list->end(), p) != list->end())
            throw Error("duplicate arc " + std::string(from) + " -> " + std::string(to));
        list->push_back(p);
        return *this;
    }

    NetBuilder& remove_arc(std::string_view from, std::string_view to) {
        auto erase = [](std::vector<PlaceId>& v, PlaceId p) {
            auto it = std::find(v.begin(), v.end(), p);
            if (it == v.end()) return false;
            v.erase(it);
            return true;
        };
        bool removed = false;
        if (auto p = net_.find_place(from); p)
            if (auto t = net_.find_transition(to); t) removed = erase(net_.pre_[*t], *p);
        if (auto t = net_.find_transition(from); t)
            if (auto p = net_.find_place(to); p) removed = erase(net_.post_[*t], *p);
        if (!removed) throw Error("no arc " + std::string(from) + " -> " + std::string(to));
        return *this;
    }

    NetBuilder& initial(std::string_view place, std::uint32_t count) {
        net_.initial_.add(require_place(place), count);
        has_initial_ = true;
        return *this;
    }
    NetBuilder& final_marking(std::string_view place, std::uint32_t count) {
        net_.final_.add(require_place(place), count);
        has_final_ = true;
        return *this;
    }
    NetBuilder& reset_initial() {
        net_.initial_ = net_.empty_marking();
        has_initial_ = false;
        return *this;
    }

    PetriNet build() const {
        validate(true);
        return net_;
    }
    PetriNet build_relaxed() const {
        validate(false);
        return net_;
    }

private:
    void check_new_id(const std::string& id) const {
        if (id.empty()) throw Error("empty node id");
        if (net_.find_place(id) || net_.find_transition(id))
            throw Error("duplicate id '" + id + "'");
    }

    PlaceId require_place(std::string_view id) const {
        auto p = net_.find_place(id);
        if (!p) throw Error("undeclared place '" + std::string(id) + "'");
        return *p;
    }

    void validate(bool strict) const {
        if (!has_initial_ || net_.initial_.empty()) throw Error("missing initial marking");
        if (!has_final_ || net_.final_.empty()) throw Error("missing final marking");
        if (!strict) return;
        for (TransitionId t = 0; t < net_.transitions_.size(); ++t) {
            if (net_.pre_[t].empty())
                throw Error("transition '" + net_.transitions_[t].id + "' has no incoming arc");
            if (net_.post_[t].empty())
                throw Error("transition '" + net_.transitions_[t].id + "' has no outgoing arc");
        }
    }

    PetriNet net_;
    bool has_initial_ = false;
    bool has_final_ = false;
};

// ---------------------------------------------------------------------------
// Model file format

namespace detail {

inline std::vector<std::string> split_ws(std::string_view line) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        std::size_t j = i;
        while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
        if (j > i) out.emplace_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

inline std::uint32_t parse_count(const std::string& s, std::size_t line) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw ParseError("expected a non-negative integer, got '" + s + "'", line);
    unsigned long long v = 0;
    try {
        v = std::stoull(s);
    } catch (const std::exception&) {
        throw ParseError("count out of range: '" + s + "'", line);
    }
    if (v > kMaxTokens) throw ParseError("count out of range: '" + s + "'", line);
    return static_cast<std::uint32_t>(v);
}

} // namespace detail

/// Parses the line-oriented model format:
///   place <id> | trans <id> label <activity> | trans <id> silent
///   arc <id> <id> | init <place> <count> | final <place> <count>
/// `#` starts a comment. Arcs and markings may reference nodes declared later.
/// `relaxed` admits transitions without input or output arcs, for soundness
/// analysis of defective nets.
inline PetriNet parse_model(std::string_view text, std::string name = {}, bool relaxed = false) {
    NetBuilder builder(std::move(name));
    struct Deferred {
        std::size_t line;
        std::vector<std::string> tok;
    };
    std::vector<Deferred> deferred;

    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        auto tok = detail::split_ws(line);
        if (tok.empty()) continue;
        const auto& kw = tok[0];
        try {
            if (kw == "place") {
                if (tok.size() != 2) throw ParseError("expected 'place <id>'", line_no);
                builder.place(tok[1]);
            } else if (kw == "trans") {
                if (tok.size() == 3 && tok[2] == "silent") {
                    builder.silent(tok[1]);
                } else if (tok.size() == 4 && tok[2] == "label") {
                    builder.transition(tok[1], tok[3]);
                } else {
                    throw ParseError("expected 'trans <id> label <activity>' or 'trans <id> silent'",
                                     line_no);
                }
            } else if (kw == "arc" || kw == "init" || kw == "final") {
                if (tok.size() != 3) throw ParseError("expected '" + kw + " <id> <id|count>'", line_no);
                deferred.push_back({line_no, tok});
            } else {
                throw ParseError("unknown directive '" + kw + "'", line_no);
            }
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), line_no);
        }
    }

    for (const auto& d : deferred) {
        try {
            if (d.tok[0] == "arc")
                builder.arc(d.tok[1], d.tok[2]);
            else if (d.tok[0] == "init")
                builder.initial(d.tok[1], detail::parse_count(d.tok[2], d.line));
            else
                builder.final_marking(d.tok[1], detail::parse_count(d.tok[2], d.line));
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            throw ParseError(e.what(), d.line);
        }
    }
    try {
        return relaxed ? builder.build_relaxed() : builder.build();
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
}

/// Serializes a net in the model file format accepted by parse_model.
inline std::string write_model(const PetriNet& net) {
    std::ostringstream out;
    if (!net.name().empty()) out << "# " << net.name() << "\n";
    for (const auto& p : net.places()) out << "place " << p << "\n";
    for (const auto& t : net.transitions()) {
        if (t.label)
            out << "trans " << t.id << " label " << *t.label << "\n";
        else
            out << "trans " << t.id << " silent\n";
    }
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        for (auto p : net.inputs(t)) out << "arc " << net.place(p) << " " << net.transition(t).id << "\n";
        for (auto p : net.outputs(t)) out << "arc " << net.transition(t).id << " " << net.place(p) << "\n";
    }
    for (PlaceId p = 0; p < net.place_count(); ++p)
        if (net.initial_marking()[p]) out << "init " << net.place(p) << " " << net.initial_marking()[p] << "\n";
    for (PlaceId p = 0; p < net.place_count(); ++p)
        if (net.final_marking()[p]) out << "final " << net.place(p) << " " << net.final_marking()[p] << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Firing semantics

/// A transition is enabled when it has at least one input place and every
/// input place holds a token. Input-less transitions only arise in nets built
/// with build_relaxed() and are treated as never enabled.
inline bool is_enabled(const PetriNet& net, const Marking& m, TransitionId t) {
    const auto& in = net.inputs(t);
    if (in.empty()) return false;
    return std::all_of(in.begin(), in.end(), [&](PlaceId p) { return m[p] > 0; });
}

/// Enabled transitions in declaration order.
inline std::vector<TransitionId> enabled(const PetriNet& net, const Marking& m) {
    std::vector<TransitionId> out;
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        if (is_enabled(net, m, t)) out.push_back(t);
    return out;
}

inline Marking fire(const PetriNet& net, const Marking& m, TransitionId t) {
    if (!is_enabled(net, m, t))
        throw FiringError("transition '" + net.transition(t).id + "' is not enabled in " + net.format(m));
    Marking next = m;
    for (auto p : net.inputs(t)) next.set(p, next[p] - 1u);
    for (auto p : net.outputs(t)) next.add(p);
    return next;
}

/// Unique source place with no incoming arcs, unique sink with no outgoing
/// arcs, M0 = [source] and Mf marks the sink.
inline bool is_workflow_net(const PetriNet& net) {
    std::vector<bool> has_in(net.place_count(), false), has_out(net.place_count(), false);
    for (TransitionId t = 0; t < net.transition_count(); ++t) {
        for (auto p : net.inputs(t)) has_out[p] = true;
        for (auto p : net.outputs(t)) has_in[p] = true;
    }
    std::optional<PlaceId> source, sink;
    for (PlaceId p = 0; p < net.place_count(); ++p) {
        if (!has_in[p]) {
            if (source) return false;
            source = p;
        }
        if (!has_out[p]) {
            if (sink) return false;
            sink = p;
        }
    }
    if (!source || !sink || *source == *sink) return false;
    Marking expected = net.empty_marking();
    expected.set(*source, 1);
    return net.initial_marking() == expected && net.final_marking()[*sink] >= 1;
}

// ---------------------------------------------------------------------------
// Reachability

struct ReachabilityGraph {
    struct Edge {
        TransitionId transition;
        std::uint32_t target;
    };

    std::vector<Marking> markings;              ///< index 0 is M0
    std::vector<std::vector<Edge>> successors;  ///< edges in transition order
    std::optional<std::uint32_t> final_state;   ///< index of Mf, if reached
    bool complete = true;                       ///< false when cap or bound was hit
    std::string incomplete_reason;

    std::size_t size() const noexcept { return markings.size(); }
};

/// Breadth-first exploration from M0, stopping at `state_cap` markings.
inline ReachabilityGraph explore(const PetriNet& net, std::size_t state_cap) {
    ReachabilityGraph g;
    std::unordered_map<Marking, std::uint32_t, MarkingHash> index;
    auto intern = [&](const Marking& m) -> std::optional<std::uint32_t> {
        if (auto it = index.find(m); it != index.end()) return it->second;
        if (g.markings.size() >= state_cap) return std::nullopt;
        auto id = static_cast<std::uint32_t>(g.markings.size());
        index.emplace(m, id);
        g.markings.push_back(m);
        g.successors.emplace_back();
        if (m == net.final_marking()) g.final_state = id;
        return id;
    };
    if (!intern(net.initial_marking())) {
        g.complete = false;
        g.incomplete_reason = "state cap is zero";
        return g;
    }
    for (std::uint32_t cur = 0; cur < g.markings.size(); ++cur) {
        for (auto t : enabled(net, g.markings[cur])) {
            Marking next;
            try {
                next = fire(net, g.markings[cur], t);
            } catch (const BoundError&) {
                g.complete = false;
                g.incomplete_reason = "token bound exceeded (net is unbounded)";
                return g;
            }
            auto id = intern(next);
            if (!id) {
                g.complete = false;
                g.incomplete_reason = "state cap of " + std::to_string(state_cap) + " markings reached";
                return g;
            }
            g.successors[cur].push_back({t, *id});
        }
    }
    return g;
}

struct SoundnessReport {
    bool inconclusive = false;
    std::string inconclusive_reason;
    std::size_t reachable_markings = 0;
    bool final_reachable = false;         ///< Mf reachable from M0
    bool final_always_reachable = false;  ///< Mf reachable from every reachable marking
    std::vector<std::string> dead_transitions;
    std::vector<std::string> dead_places;  ///< never marked in any reachable marking

    bool sound() const noexcept {
        return !inconclusive && final_always_reachable && dead_transitions.empty();
    }
};

inline constexpr std::size_t kDefaultSoundnessCap = 100000;

inline SoundnessReport check_soundness(const PetriNet& net, std::size_t state_cap = kDefaultSoundnessCap) {
    if (state_cap == 0) throw Error("state cap must be positive");
    SoundnessReport r;
    auto g = explore(net, state_cap);
    r.reachable_markings = g.size();
    if (!g.complete) {
        r.inconclusive = true;
        r.inconclusive_reason = g.incomplete_reason;
        return r;
    }

    std::vector<bool> fired(net.transition_count(), false);
    std::vector<bool> marked(net.place_count(), false);
    std::vector<std::vector<std::uint32_t>> preds(g.size());
    for (std::uint32_t s = 0; s < g.size(); ++s) {
        for (PlaceId p = 0; p < net.place_count(); ++p)
            if (g.markings[s][p]) marked[p] = true;
        for (const auto& e : g.successors[s]) {
            fired[e.transition] = true;
            preds[e.target].push_back(s);
        }
    }
    for (TransitionId t = 0; t < net.transition_count(); ++t)
        if (!fired[t]) r.dead_transitions.push_back(net.transition(t).id);
    for (PlaceId p = 0; p < net.place_count(); ++p)
        if (!marked[p]) r.dead_places.push_back(net.place(p));

    if (g.final_state) {
        std::vector<bool> reaches(g.size(), false);
        std::deque<std::uint32_t> queue{*g.final_state};
        reaches[*g.final_state] = true;
        while (!queue.empty()) {
            auto s = queue.front();
            queue.pop_front();
            for (auto p : preds[s])
                if (!reaches[p]) {
                    reaches[p] = true;
                    queue.push_back(p);
                }
        }
        r.final_reachable = true;
        r.final_always_reachable = std::all_of(reaches.begin(), reaches.end(), [](bool b) { return b; });
    }
    return r;
}

} // namespace confmon::petri

#endif // CONFMON_PETRI_HPP
