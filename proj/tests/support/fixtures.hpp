#ifndef CONFMON_TEST_FIXTURES_HPP
#define CONFMON_TEST_FIXTURES_HPP

// Shared test helpers: fixture loading, an exhaustive alignment-cost oracle
// that shares no code with the A* search, and a generator of small
// block-structured workflow nets.

#include <fstream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "confmon/alignment.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/petri.hpp"

namespace testing_support {

using confmon::petri::PetriNet;

inline std::string data_path(const std::string& file) { return std::string(CONFMON_DATA_DIR) + "/" + file; }

inline std::string read_data(const std::string& file) {
    std::ifstream f(data_path(file), std::ios::binary);
    if (!f) throw std::runtime_error("missing fixture " + file);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline PetriNet load_net(const std::string& file) {
    return confmon::petri::parse_model(read_data(file), file.substr(0, file.find('.')));
}

inline PetriNet fn1() { return load_net("fn1.net"); }
inline PetriNet som() { return load_net("som.net"); }

inline std::vector<std::string> words(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream is(s);
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

inline confmon::log::Trace trace(const std::string& s, const std::string& id = "t") { return {id, words(s), {}}; }

// ---------------------------------------------------------------------------
// Exhaustive oracle: enumerate all reachable markings with a private firing
// rule, build every product state (marking, trace position) and run
// Bellman-Ford relaxation to a fixpoint.

struct OracleResult {
    double cost = std::numeric_limits<double>::infinity();
    std::size_t states = 0;
};

inline OracleResult oracle_cost(const PetriNet& net, const std::vector<std::string>& trace,
                                const confmon::align::CostScheme& c = {}) {
    using M = std::vector<int>;
    auto to_m = [&](const confmon::petri::Marking& m) {
        M v(m.size());
        for (std::size_t p = 0; p < m.size(); ++p) v[p] = m[static_cast<confmon::petri::PlaceId>(p)];
        return v;
    };
    std::map<M, std::size_t> idx;
    std::vector<M> ms;
    struct E {
        std::size_t to;
        std::size_t t;
    };
    std::vector<std::vector<E>> succ;
    auto add = [&](const M& m) {
        auto [it, fresh] = idx.emplace(m, ms.size());
        if (fresh) {
            ms.push_back(m);
            succ.emplace_back();
        }
        return it->second;
    };
    add(to_m(net.initial_marking()));
    for (std::size_t i = 0; i < ms.size(); ++i) {
        for (std::size_t t = 0; t < net.transition_count(); ++t) {
            const auto& in = net.inputs(static_cast<confmon::petri::TransitionId>(t));
            if (in.empty()) continue;
            bool ok = true;
            for (auto p : in) ok = ok && ms[i][p] > 0;
            if (!ok) continue;
            M next = ms[i];
            for (auto p : in) --next[p];
            for (auto p : net.outputs(static_cast<confmon::petri::TransitionId>(t))) ++next[p];
            const auto j = add(next);
            succ[i].push_back({j, t});
        }
        if (ms.size() > 5000) throw std::runtime_error("oracle: net too large");
    }
    const auto goal_m = to_m(net.final_marking());
    const std::size_t n = trace.size();
    const std::size_t S = ms.size() * (n + 1);
    auto id = [&](std::size_t m, std::size_t i) { return m * (n + 1) + i; };
    std::vector<double> d(S, std::numeric_limits<double>::infinity());
    d[id(0, 0)] = 0;
    for (bool changed = true; changed;) {
        changed = false;
        auto relax = [&](std::size_t from, std::size_t to, double w) {
            if (d[from] + w < d[to] - 1e-12) {
                d[to] = d[from] + w;
                changed = true;
            }
        };
        for (std::size_t m = 0; m < ms.size(); ++m) {
            for (std::size_t i = 0; i <= n; ++i) {
                const auto s = id(m, i);
                if (d[s] == std::numeric_limits<double>::infinity()) continue;
                if (i < n) relax(s, id(m, i + 1), c.log);
                for (const auto& e : succ[m]) {
                    const auto& tr = net.transition(static_cast<confmon::petri::TransitionId>(e.t));
                    if (!tr.label) {
                        relax(s, id(e.to, i), c.silent);
                        continue;
                    }
                    relax(s, id(e.to, i), c.model);
                    if (i < n && *tr.label == trace[i]) relax(s, id(e.to, i + 1), c.sync);
                }
            }
        }
    }
    OracleResult r;
    r.states = S;
    if (auto it = idx.find(goal_m); it != idx.end()) r.cost = d[id(it->second, n)];
    return r;
}

// ---------------------------------------------------------------------------
// Random block-structured workflow nets (sequence, exclusive choice,
// parallel split/join, loop). Sound by construction.

class NetGenerator {
public:
    NetGenerator(std::uint64_t seed, std::vector<std::string> alphabet)
        : rng_(seed), alphabet_(std::move(alphabet)) {}

    /// Draws nets until one has at most `max_markings` reachable markings.
    PetriNet next(std::size_t max_markings = 12, int depth = 3) {
        for (;;) {
            b_ = confmon::petri::NetBuilder("rand" + std::to_string(count_++));
            places_ = transitions_ = 0;
            b_.place("source").place("sink");
            block("source", "sink", depth);
            b_.initial("source", 1).final_marking("sink", 1);
            auto net = b_.build();
            auto g = confmon::petri::explore(net, max_markings + 1);
            if (g.complete && g.size() <= max_markings && g.size() >= 3) return net;
        }
    }

private:
    std::string place() {
        auto id = "p" + std::to_string(places_++);
        b_.place(id);
        return id;
    }
    std::string trans(bool silent) {
        auto id = "t" + std::to_string(transitions_++);
        if (silent)
            b_.silent(id);
        else
            b_.transition(id, alphabet_[pick(alphabet_.size())]);
        return id;
    }
    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

    void block(const std::string& in, const std::string& out, int depth) {
        const std::size_t kind = depth <= 0 ? pick(6) % 2 : pick(6);
        switch (kind) {
            case 0:
            case 1: {  // activity, occasionally silent
                const auto t = trans(pick(5) == 0);
                b_.arc(in, t).arc(t, out);
                break;
            }
            case 2: {  // sequence
                const auto mid = place();
                block(in, mid, depth - 1);
                block(mid, out, depth - 1);
                break;
            }
            case 3: {  // exclusive choice
                const auto a = place(), b = place();
                const auto ta = trans(true), tb = trans(true);
                b_.arc(in, ta).arc(ta, a).arc(in, tb).arc(tb, b);
                block(a, out, depth - 1);
                block(b, out, depth - 1);
                break;
            }
            case 4: {  // parallel
                const auto split = trans(true), join = trans(true);
                const auto a1 = place(), a2 = place(), b1 = place(), b2 = place();
                b_.arc(in, split).arc(split, a1).arc(split, b1).arc(a2, join).arc(b2, join).arc(join, out);
                block(a1, a2, depth - 1);
                block(b1, b2, depth - 1);
                break;
            }
            default: {  // loop: body, then exit or redo
                const auto p1 = place(), p2 = place();
                const auto enter = trans(true), exit = trans(true);
                b_.arc(in, enter).arc(enter, p1).arc(p2, exit).arc(exit, out);
                block(p1, p2, depth - 1);
                const auto redo = trans(pick(2) == 0);
                b_.arc(p2, redo).arc(redo, p1);
                break;
            }
        }
    }

    std::mt19937_64 rng_;
    std::vector<std::string> alphabet_;
    confmon::petri::NetBuilder b_;
    std::size_t places_ = 0, transitions_ = 0, count_ = 0;
};

/// Uniform random trace of length 0..max_len over `alphabet`.
inline std::vector<std::string> random_trace(std::mt19937_64& rng, const std::vector<std::string>& alphabet,
                                             std::size_t max_len = 8) {
    std::uniform_int_distribution<std::size_t> len(0, max_len), sym(0, alphabet.size() - 1);
    std::vector<std::string> t(len(rng));
    for (auto& a : t) a = alphabet[sym(rng)];
    return t;
}

} // namespace testing_support

#endif // CONFMON_TEST_FIXTURES_HPP
