#ifndef CONFMON_PLAYOUT_HPP
#define CONFMON_PLAYOUT_HPP

#include <cstdint>
#include <random>
#include <string>

#include "confmon/error.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/petri.hpp"

namespace confmon::petri {

/// Per-event instrumentation noise applied after simulation.
struct NoiseParams {
    double p_drop = 0.0;  ///< probability an emitted event is lost
    double p_dup = 0.0;   ///< probability a kept event is logged twice in a row
};

struct PlayoutOptions {
    std::size_t max_steps = 200;
    NoiseParams noise{};
    std::string case_prefix = "c";
    std::size_t max_consecutive_discards = 1000;
};

class PlayoutError : public Error {
public:
    using Error::Error;
};

/// Simulates `n_traces` complete runs M0 -> Mf, firing a uniformly chosen
/// enabled transition at each step. Runs that do not reach Mf within
/// `max_steps` firings are discarded and retried. Silent transitions emit
/// nothing. Case ids are `<prefix>1 .. <prefix>n`.
inline log::EventLog playout(const PetriNet& net, std::size_t n_traces, std::uint64_t seed,
                             const PlayoutOptions& opt = {}) {
    if (opt.max_steps == 0) throw Error("max_steps must be at least 1");
    const auto& noise = opt.noise;
    if (noise.p_drop < 0 || noise.p_drop > 1 || noise.p_dup < 0 || noise.p_dup > 1)
        throw Error("noise probabilities must lie in [0, 1]");

    std::mt19937_64 rng(seed);
    std::bernoulli_distribution drop(noise.p_drop);
    std::bernoulli_distribution dup(noise.p_dup);

    log::EventLog out;
    std::size_t discards = 0;
    while (out.size() < n_traces) {
        Marking m = net.initial_marking();
        std::vector<std::string> run;
        bool reached = m == net.final_marking();
        for (std::size_t step = 0; step < opt.max_steps && !reached; ++step) {
            auto choices = enabled(net, m);
            if (choices.empty())
                throw PlayoutError("no enabled transition before the final marking at " + net.format(m) +
                                   " (is the net sound?)");
            std::uniform_int_distribution<std::size_t> pick(0, choices.size() - 1);
            auto t = choices[pick(rng)];
            m = fire(net, m, t);
            if (const auto& label = net.transition(t).label) run.push_back(*label);
            reached = m == net.final_marking();
        }
        if (!reached) {
            if (++discards > opt.max_consecutive_discards)
                throw PlayoutError("playout cannot reach final marking within " + std::to_string(opt.max_steps) +
                                   " steps");
            continue;
        }
        discards = 0;

        log::Trace trace{opt.case_prefix + std::to_string(out.size() + 1), {}, std::nullopt};
        for (auto& e : run) {
            if (drop(rng)) continue;
            const bool twice = dup(rng);
            trace.events.push_back(e);
            if (twice) trace.events.push_back(e);
        }
        out.add(std::move(trace));
    }
    return out;
}

} // namespace confmon::petri

#endif // CONFMON_PLAYOUT_HPP
