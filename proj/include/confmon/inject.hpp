#ifndef CONFMON_INJECT_HPP
#define CONFMON_INJECT_HPP

// Poisson-governed control-flow anomaly injection.
//
//   MA   delete K uniformly chosen events (without replacement, K capped at |trace|)
//   WOA  K independent swaps of uniformly chosen unordered position pairs
//   UA   insert K activities drawn uniformly from an unknown pool, each at a
//        uniform position of the current trace
//
// K ~ Poisson(lambda), re-drawn while K == 0, so every injected trace differs
// from its source (zero-truncated Poisson).

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "confmon/error.hpp"
#include "confmon/eventlog.hpp"

namespace confmon::inject {

enum class AnomalyType { ma, woa, ua, all };

inline std::string_view to_string(AnomalyType t) {
    switch (t) {
        case AnomalyType::ma: return "MA";
        case AnomalyType::woa: return "WOA";
        case AnomalyType::ua: return "UA";
        case AnomalyType::all: return "ALL";
    }
    return "?";
}

inline AnomalyType parse_anomaly_type(std::string_view s) {
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    if (lower == "ma") return AnomalyType::ma;
    if (lower == "woa") return AnomalyType::woa;
    if (lower == "ua") return AnomalyType::ua;
    if (lower == "all") return AnomalyType::all;
    throw Error("unknown anomaly type '" + std::string(s) + "' (expected ma, woa, ua or all)");
}

/// unk_1 .. unk_10
inline std::vector<std::string> default_unknown_pool() {
    std::vector<std::string> pool;
    for (int i = 1; i <= 10; ++i) pool.push_back("unk_" + std::to_string(i));
    return pool;
}

struct InjectionSpec {
    AnomalyType type = AnomalyType::all;
    double lambda = 3.0;
    std::vector<std::string> unknown_pool = default_unknown_pool();
    std::uint64_t seed = 0;

    /// Checks the pool against the model alphabet when one is given.
    void validate(const std::vector<std::string>& model_labels = {}) const {
        if (!(lambda > 0)) throw Error("lambda must be positive");
        if ((type == AnomalyType::ua || type == AnomalyType::all) && unknown_pool.empty())
            throw Error("UA injection needs a non-empty unknown-activity pool");
        for (const auto& a : unknown_pool) {
            if (!log::detail::valid_token(a)) throw Error("invalid pool activity '" + a + "'");
            if (std::find(model_labels.begin(), model_labels.end(), a) != model_labels.end())
                throw Error("pool activity '" + a + "' is a model activity");
        }
    }
};

struct Injected {
    log::Trace trace;
    std::uint32_t k_drawn = 0;    ///< K after zero truncation
    std::uint32_t k_applied = 0;  ///< modifications actually applied (MA caps at |trace|)
};

inline constexpr int kMaxAttempts = 100;

/// Zero-truncated Poisson draw.
template <class Rng>
std::uint32_t draw_count(double lambda, Rng& rng) {
    std::poisson_distribution<std::uint32_t> poisson(lambda);
    for (;;)
        if (auto k = poisson(rng); k >= 1) return k;
}

/// Applies one anomaly type (MA, WOA or UA) to a trace. The result keeps the
/// case id (callers rename) and is labeled anomalous.
template <class Rng>
Injected inject_trace(const log::Trace& trace, AnomalyType type, double lambda,
                      const std::vector<std::string>& pool, Rng& rng) {
    if (type == AnomalyType::all) throw Error("ALL is a log-level type; inject MA, WOA and UA separately");
    if (!(lambda > 0)) throw Error("lambda must be positive");
    Injected out{trace, draw_count(lambda, rng), 0};
    out.trace.label = log::Label::anomalous;
    auto& ev = out.trace.events;
    const std::uint32_t k = out.k_drawn;

    switch (type) {
        case AnomalyType::ma: {
            if (ev.empty()) throw Error("case '" + trace.case_id + "': cannot delete from an empty trace");
            const auto n = static_cast<std::uint32_t>(ev.size());
            out.k_applied = std::min(k, n);
            std::vector<std::size_t> pos(n);
            std::iota(pos.begin(), pos.end(), std::size_t{0});
            // Partial Fisher-Yates: the first k_applied entries are a uniform sample.
            for (std::uint32_t i = 0; i < out.k_applied; ++i) {
                std::uniform_int_distribution<std::size_t> pick(i, n - 1);
                std::swap(pos[i], pos[pick(rng)]);
            }
            std::vector<bool> drop(n, false);
            for (std::uint32_t i = 0; i < out.k_applied; ++i) drop[pos[i]] = true;
            std::vector<std::string> kept;
            kept.reserve(n - out.k_applied);
            for (std::uint32_t i = 0; i < n; ++i)
                if (!drop[i]) kept.push_back(std::move(ev[i]));
            ev = std::move(kept);
            break;
        }
        case AnomalyType::woa: {
            if (ev.size() < 2)
                throw Error("case '" + trace.case_id + "': no swap possible on a trace of length " +
                            std::to_string(ev.size()) + " after " + std::to_string(kMaxAttempts) + " attempts");
            std::uniform_int_distribution<std::size_t> pick(0, ev.size() - 1);
            for (int attempt = 0;; ++attempt) {
                if (attempt == kMaxAttempts)
                    throw Error("case '" + trace.case_id + "': swaps leave the trace unchanged after " +
                                std::to_string(kMaxAttempts) + " attempts");
                auto candidate = trace.events;
                for (std::uint32_t s = 0; s < k; ++s) {
                    std::size_t i = 0, j = 0;
                    while (i == j) {
                        i = pick(rng);
                        j = pick(rng);
                    }
                    std::swap(candidate[i], candidate[j]);
                }
                if (candidate != trace.events) {
                    ev = std::move(candidate);
                    break;
                }
            }
            out.k_applied = k;
            break;
        }
        case AnomalyType::ua: {
            if (pool.empty()) throw Error("UA injection needs a non-empty unknown-activity pool");
            std::uniform_int_distribution<std::size_t> which(0, pool.size() - 1);
            for (std::uint32_t s = 0; s < k; ++s) {
                std::uniform_int_distribution<std::size_t> where(0, ev.size());
                const auto at = where(rng);
                ev.insert(ev.begin() + static_cast<std::ptrdiff_t>(at), pool[which(rng)]);
            }
            out.k_applied = k;
            break;
        }
        case AnomalyType::all: break;
    }
    return out;
}

/// Deterministic per-trace generator so results do not depend on scheduling.
inline std::mt19937_64 trace_rng(std::uint64_t seed, AnomalyType type, std::size_t index, std::uint32_t attempt = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(type), static_cast<std::uint32_t>(index),
                      static_cast<std::uint32_t>(static_cast<std::uint64_t>(index) >> 32), attempt};
    return std::mt19937_64(seq);
}

/// Optional filter on injected traces; rejected traces are injected again
/// from a fresh generator (at most kMaxAttempts times).
using AcceptFn = std::function<bool(const log::Trace&)>;

struct InjectionReport {
    log::EventLog log;
    std::vector<std::uint32_t> k_applied;  ///< per output trace
    std::size_t rejected = 0;              ///< injections discarded by the filter
};

/// Injects one type into every trace of `normal`. Output case ids are
/// `<case>_<type>` in lower case.
inline InjectionReport inject_log(const log::EventLog& normal, const InjectionSpec& spec,
                                  const AcceptFn& accept = {}) {
    if (spec.type == AnomalyType::all) throw Error("use build_eval_sets for ALL");
    spec.validate();
    std::string suffix(to_string(spec.type));
    std::transform(suffix.begin(), suffix.end(), suffix.begin(), [](unsigned char c) { return std::tolower(c); });
    InjectionReport r;
    for (std::size_t i = 0; i < normal.size(); ++i) {
        for (std::uint32_t attempt = 0;; ++attempt) {
            if (attempt == kMaxAttempts)
                throw Error("case '" + normal[i].case_id + "': every injected variant was rejected after " +
                            std::to_string(kMaxAttempts) + " attempts");
            auto rng = trace_rng(spec.seed, spec.type, i, attempt);
            auto inj = inject_trace(normal[i], spec.type, spec.lambda, spec.unknown_pool, rng);
            inj.trace.case_id = normal[i].case_id + "_" + suffix;
            if (accept && !accept(inj.trace)) {
                ++r.rejected;
                continue;
            }
            r.k_applied.push_back(inj.k_applied);
            r.log.add(std::move(inj.trace));
            break;
        }
    }
    return r;
}

struct EvalSets {
    log::EventLog ma, woa, ua, all;
    std::size_t rejected = 0;

    const log::EventLog& get(AnomalyType t) const {
        switch (t) {
            case AnomalyType::ma: return ma;
            case AnomalyType::woa: return woa;
            case AnomalyType::ua: return ua;
            case AnomalyType::all: return all;
        }
        return all;
    }
};

/// Three independent passes (MA, WOA, UA) over `normal`; ALL is their
/// concatenation in that order.
inline EvalSets build_eval_sets(const log::EventLog& normal, double lambda, const std::vector<std::string>& pool,
                                std::uint64_t seed, const AcceptFn& accept = {}) {
    if (normal.empty()) throw Error("cannot build evaluation sets from an empty log");
    EvalSets s;
    for (auto type : {AnomalyType::ma, AnomalyType::woa, AnomalyType::ua}) {
        InjectionSpec spec{type, lambda, pool, seed};
        auto r = inject_log(normal, spec, accept);
        s.rejected += r.rejected;
        for (const auto& t : r.log) s.all.add(t);
        (type == AnomalyType::ma ? s.ma : type == AnomalyType::woa ? s.woa : s.ua) = std::move(r.log);
    }
    return s;
}

} // namespace confmon::inject

#endif // CONFMON_INJECT_HPP
