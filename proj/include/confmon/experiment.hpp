#ifndef CONFMON_EXPERIMENT_HPP
#define CONFMON_EXPERIMENT_HPP

// Multi-seed evaluation harness: simulate a normal log, split it, build
// diagnoses, train every detector, score test normals against injected
// anomalies and aggregate the metrics over seeds.

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "confmon/alignment.hpp"
#include "confmon/detect.hpp"
#include "confmon/diagnoses.hpp"
#include "confmon/error.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/inject.hpp"
#include "confmon/metrics.hpp"
#include "confmon/petri.hpp"
#include "confmon/playout.hpp"

namespace confmon::experiment {

struct ExperimentConfig {
    std::string model = "som.net";
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double lambda = 3.0;
    petri::NoiseParams noise{0.03, 0.03};
    log::SplitRatios split{};
    std::vector<detect::DetectorKind> detectors{detect::DetectorKind::ft, detect::DetectorKind::dbscan,
                                                detect::DetectorKind::ae};
    double quantile = 95.0;
    std::string output = "results";
    std::size_t n_normal = 50;
    std::size_t n_anomalous = 50;         ///< size of the playout that anomalies are injected into
    std::uint64_t anomaly_seed_offset = 1000;
    bool reject_conforming = true;        ///< re-inject anomalies that still fit the model
    std::size_t epochs = 500;
    std::size_t max_steps = 200;
    std::vector<std::string> pool = inject::default_unknown_pool();

    void validate() const {
        if (seeds.empty()) throw Error("config: at least one seed is required");
        if (detectors.empty()) throw Error("config: at least one detector is required");
        if (!(lambda > 0)) throw Error("config: lambda must be positive");
        for (double p : {noise.p_drop, noise.p_dup})
            if (!(p >= 0 && p < 1)) throw Error("config: noise probabilities must lie in [0, 1)");
        if (!(quantile >= 0 && quantile <= 100)) throw Error("config: quantile must lie in [0, 100]");
        if (n_normal == 0 || n_anomalous == 0) throw Error("config: log sizes must be positive");
    }
};

namespace detail {

template <class T>
std::vector<T> parse_list(std::string_view v, const std::string& key, auto&& conv) {
    std::vector<T> out;
    for (const auto& cell : log::detail::split(v, ',')) {
        auto c = std::string(log::detail::trim(cell));
        if (c.empty()) throw Error("config: empty entry in '" + key + "'");
        out.push_back(conv(c));
    }
    return out;
}

inline double to_double(const std::string& s, const std::string& key) {
    try {
        std::size_t used = 0;
        double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v;
    } catch (const std::exception&) {
    }
    throw Error("config: '" + key + "' expects a number, got '" + s + "'");
}

inline std::uint64_t to_uint(const std::string& s, const std::string& key) {
    if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
        throw Error("config: '" + key + "' expects a non-negative integer, got '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::exception&) {
        throw Error("config: '" + key + "' value '" + s + "' out of range");
    }
}

inline bool to_bool(const std::string& s, const std::string& key) {
    if (s == "1" || s == "true" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "no") return false;
    throw Error("config: '" + key + "' expects a boolean, got '" + s + "'");
}

} // namespace detail

/// Line-oriented `key=value` config; `#` starts a comment. Unknown keys are
/// errors so that typos do not silently fall back to defaults.
inline ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig c;
    auto lines = log::detail::lines_of(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto line = std::string(lines[i]);
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto t = std::string(log::detail::trim(line));
        if (t.empty()) continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) throw ParseError("expected key=value", i + 1);
        const auto key = std::string(log::detail::trim(std::string_view(t).substr(0, eq)));
        const auto val = std::string(log::detail::trim(std::string_view(t).substr(eq + 1)));
        try {
            if (key == "model") c.model = val;
            else if (key == "output") c.output = val;
            else if (key == "seeds")
                c.seeds = detail::parse_list<std::uint64_t>(val, key, [&](const std::string& s) { return detail::to_uint(s, key); });
            else if (key == "lambda") c.lambda = detail::to_double(val, key);
            else if (key == "p_drop") c.noise.p_drop = detail::to_double(val, key);
            else if (key == "p_dup") c.noise.p_dup = detail::to_double(val, key);
            else if (key == "split") c.split = log::parse_ratios(val);
            else if (key == "detectors")
                c.detectors = detail::parse_list<detect::DetectorKind>(val, key, [](const std::string& s) { return detect::parse_kind(s); });
            else if (key == "quantile") c.quantile = detail::to_double(val, key);
            else if (key == "n_normal") c.n_normal = detail::to_uint(val, key);
            else if (key == "n_anomalous") c.n_anomalous = detail::to_uint(val, key);
            else if (key == "anomaly_seed_offset") c.anomaly_seed_offset = detail::to_uint(val, key);
            else if (key == "reject_conforming") c.reject_conforming = detail::to_bool(val, key);
            else if (key == "epochs") c.epochs = detail::to_uint(val, key);
            else if (key == "max_steps") c.max_steps = detail::to_uint(val, key);
            else if (key == "pool")
                c.pool = detail::parse_list<std::string>(val, key, [](const std::string& s) { return s; });
            else throw Error("unknown key '" + key + "'");
        } catch (const ParseError&) {
            throw;
        } catch (const Error& e) {
            std::string msg = e.what();
            if (msg.starts_with("config: ")) msg.erase(0, 8);
            throw ParseError(msg, i + 1);
        }
    }
    c.validate();
    return c;
}

inline constexpr std::array kTypes{inject::AnomalyType::ma, inject::AnomalyType::woa, inject::AnomalyType::ua,
                                   inject::AnomalyType::all};
inline constexpr std::array<std::string_view, 5> kMetricNames{"accuracy", "precision", "recall", "f1", "auc"};

struct MetricRow {
    inject::AnomalyType type{};
    detect::DetectorKind detector{};
    metrics::Confusion confusion;
    metrics::Prf prf;
    double auc = 0;

    std::array<double, 5> values() const { return {prf.accuracy, prf.precision, prf.recall, prf.f1, auc}; }
};

struct SeedRun {
    std::uint64_t seed = 0;
    std::vector<MetricRow> rows;
    std::string error;              ///< non-empty if the seed failed
    std::size_t rejected = 0;       ///< conforming injections that were redrawn
    std::vector<double> ae_loss;    ///< loss history of the AE, when trained

    bool ok() const noexcept { return error.empty(); }
};

struct Aggregate {
    inject::AnomalyType type{};
    detect::DetectorKind detector{};
    std::array<double, 5> mean{}, stddev{};  ///< population std over surviving seeds
    std::size_t n = 0;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<SeedRun> runs;
    std::vector<Aggregate> aggregate;

    const Aggregate& get(inject::AnomalyType t, detect::DetectorKind k) const {
        for (const auto& a : aggregate)
            if (a.type == t && a.detector == k) return a;
        throw Error("no aggregate for " + std::string(inject::to_string(t)) + "/" + std::string(detect::to_string(k)));
    }
};

/// One seed of the protocol. Throws on any stage failure.
inline SeedRun run_seed(const align::Aligner& aligner, const ExperimentConfig& cfg, std::uint64_t seed) {
    const auto& net = aligner.net();
    SeedRun run;
    run.seed = seed;

    petri::PlayoutOptions po;
    po.max_steps = cfg.max_steps;
    po.noise = cfg.noise;
    const auto normal = petri::playout(net, cfg.n_normal, seed, po);
    const auto parts = log::split_log(normal, cfg.split, seed);

    const auto d_train = diag::build_diagnoses(aligner, parts.train);
    const auto d_val = diag::build_diagnoses(aligner, parts.validation);
    const auto d_test = diag::build_diagnoses(aligner, parts.test);

    petri::PlayoutOptions clean;
    clean.max_steps = cfg.max_steps;
    clean.case_prefix = "s";
    const auto source = petri::playout(net, cfg.n_anomalous, seed + cfg.anomaly_seed_offset, clean);
    inject::AcceptFn accept;
    if (cfg.reject_conforming)
        accept = [&](const log::Trace& t) { return aligner.align(t.events).cost > 0; };
    const auto sets = inject::build_eval_sets(source, cfg.lambda, cfg.pool, seed, accept);
    run.rejected = sets.rejected;

    std::array<diag::DiagnosesMatrix, 4> d_anom;
    for (std::size_t i = 0; i < kTypes.size(); ++i) d_anom[i] = diag::build_diagnoses(aligner, sets.get(kTypes[i]));

    detect::TrainParams tp;
    tp.quantile = cfg.quantile;
    tp.epochs = cfg.epochs;
    for (auto kind : cfg.detectors) {
        const auto det = detect::train(kind, d_train, d_val, tp, seed);
        if (const auto* ae = std::get_if<detect::AeModel>(&det.model)) run.ae_loss = ae->loss_history;
        const auto neg = detect::score_all(det, d_test);
        for (std::size_t i = 0; i < kTypes.size(); ++i) {
            std::vector<double> scores = neg;
            const auto pos = detect::score_all(det, d_anom[i]);
            scores.insert(scores.end(), pos.begin(), pos.end());
            const std::size_t n = scores.size();
            auto labels = std::make_unique<bool[]>(n);
            auto preds = std::make_unique<bool[]>(n);
            for (std::size_t j = 0; j < n; ++j) {
                labels[j] = j >= neg.size();
                preds[j] = detect::is_anomalous(det, scores[j]);
            }
            MetricRow row;
            row.type = kTypes[i];
            row.detector = kind;
            row.confusion = metrics::confusion({labels.get(), n}, {preds.get(), n});
            row.prf = metrics::prf(row.confusion);
            row.auc = metrics::roc_auc({labels.get(), n}, scores).auc;
            run.rows.push_back(row);
        }
    }
    return run;
}

inline std::vector<Aggregate> aggregate(const ExperimentConfig& cfg, const std::vector<SeedRun>& runs) {
    std::vector<Aggregate> out;
    for (auto t : kTypes) {
        for (auto k : cfg.detectors) {
            Aggregate a{t, k, {}, {}, 0};
            std::vector<std::array<double, 5>> vals;
            for (const auto& r : runs) {
                if (!r.ok()) continue;
                for (const auto& m : r.rows)
                    if (m.type == t && m.detector == k) vals.push_back(m.values());
            }
            a.n = vals.size();
            if (a.n == 0) continue;
            for (std::size_t j = 0; j < 5; ++j) {
                double s = 0;
                for (const auto& v : vals) s += v[j];
                a.mean[j] = s / static_cast<double>(a.n);
                double ss = 0;
                for (const auto& v : vals) ss += (v[j] - a.mean[j]) * (v[j] - a.mean[j]);
                a.stddev[j] = std::sqrt(ss / static_cast<double>(a.n));
            }
            out.push_back(a);
        }
    }
    return out;
}

/// Runs every seed; a failing seed is recorded and skipped. Throws if no seed
/// survives.
inline ExperimentResult run_experiment(const petri::PetriNet& net, const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    res.config = cfg;
    const align::Aligner aligner(net);
    for (auto seed : cfg.seeds) {
        try {
            res.runs.push_back(run_seed(aligner, cfg, seed));
        } catch (const Error& e) {
            SeedRun failed;
            failed.seed = seed;
            failed.error = e.what();
            res.runs.push_back(std::move(failed));
        }
    }
    res.aggregate = aggregate(cfg, res.runs);
    if (res.aggregate.empty()) {
        std::string why;
        for (const auto& r : res.runs) why += "\n  seed " + std::to_string(r.seed) + ": " + r.error;
        throw Error("every seed failed:" + why);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string fixed(double v, int digits = 6) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

inline std::string seed_csv(const SeedRun& r) {
    std::string out = "type,detector,accuracy,precision,recall,f1,auc,tp,tn,fp,fn\n";
    for (const auto& m : r.rows) {
        out += std::string(inject::to_string(m.type)) + "," + std::string(detect::to_string(m.detector));
        for (double v : m.values()) out += "," + fixed(v);
        out += "," + std::to_string(m.confusion.tp) + "," + std::to_string(m.confusion.tn) + "," +
               std::to_string(m.confusion.fp) + "," + std::to_string(m.confusion.fn) + "\n";
    }
    return out;
}

inline std::string summary_csv(const ExperimentResult& res) {
    std::string out = "type,detector,metric,mean,std,n_seeds\n";
    for (const auto& a : res.aggregate)
        for (std::size_t j = 0; j < kMetricNames.size(); ++j)
            out += std::string(inject::to_string(a.type)) + "," + std::string(detect::to_string(a.detector)) + "," +
                   std::string(kMetricNames[j]) + "," + fixed(a.mean[j]) + "," + fixed(a.stddev[j]) + "," +
                   std::to_string(a.n) + "\n";
    return out;
}

/// Percentages as `mean ± std`, one block per anomaly type.
inline std::string table(const ExperimentResult& res) {
    std::ostringstream os;
    std::size_t ok = 0;
    for (const auto& r : res.runs) ok += r.ok();
    os << "seeds: " << ok << " of " << res.runs.size() << " succeeded\n";
    char buf[128];
    for (auto t : kTypes) {
        os << "\n" << inject::to_string(t) << "\n";
        std::snprintf(buf, sizeof buf, "%-8s", "");
        os << buf;
        for (auto name : kMetricNames) {
            std::snprintf(buf, sizeof buf, "  %-18s", std::string(name).c_str());
            os << buf;
        }
        os << "\n";
        for (const auto& a : res.aggregate) {
            if (a.type != t) continue;
            std::snprintf(buf, sizeof buf, "%-8s", std::string(detect::to_string(a.detector)).c_str());
            os << buf;
            for (std::size_t j = 0; j < 5; ++j) {
                std::snprintf(buf, sizeof buf, "  %7.3f ± %-7.3f ", 100 * a.mean[j], 100 * a.stddev[j]);
                os << buf;
            }
            os << "\n";
        }
    }
    return os.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    f << content;
    if (!f) throw Error("write failed: " + p.string());
}

/// seed_<s>.csv per surviving seed, summary.csv, table.txt and, when any seed
/// failed, failures.txt.
inline void write_reports(const ExperimentResult& res, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::string failures;
    for (const auto& r : res.runs) {
        if (r.ok())
            write_file(dir / ("seed_" + std::to_string(r.seed) + ".csv"), seed_csv(r));
        else
            failures += "seed " + std::to_string(r.seed) + ": " + r.error + "\n";
    }
    write_file(dir / "summary.csv", summary_csv(res));
    write_file(dir / "table.txt", table(res));
    if (!failures.empty()) write_file(dir / "failures.txt", failures);
}

} // namespace confmon::experiment

#endif // CONFMON_EXPERIMENT_HPP
