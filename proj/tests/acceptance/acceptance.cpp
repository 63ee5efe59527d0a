// Acceptance runner: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <string>

#include "confmon/experiment.hpp"
#include "support/fixtures.hpp"

using namespace confmon;
namespace ts = testing_support;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string num(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

Outcome fixtures() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto net = ts::fn1();
    align::Aligner al(net);
    const auto fig = ts::words("t1 t2 t4 t5 t3 t4 t5 t6");
    const auto a = al.align(fig);
    o.require(a.cost == 0.0 && al.fitness(fig, a) == 1.0, "fitting trace");
    const std::vector<std::string> empty;
    o.require(al.fitness(empty, al.align(empty)) == 0.0, "empty trace fitness");
    const auto sw = ts::words("t1 t5 t2 t4 t6");
    const auto b = al.align(sw);
    const auto labels = net.visible_labels();
    const auto m = align::misalignments(b, labels);
    o.require(b.cost == 2.0, "swap cost " + num(b.cost));
    o.require(std::abs(al.fitness(sw, b) - 0.8) < 1e-12, "swap fitness");
    o.require(m.counts[4] == 2, "t5 counter");
    const double dt = seconds_since(t0);
    o.require(dt < 1.0, "runtime " + num(dt) + " s");
    if (o.pass) o.detail = "runtime " + num(dt, 3) + " s";
    return o;
}

Outcome oracle() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<petri::PetriNet> nets{ts::fn1()};
    ts::NetGenerator gen(2024, {"a", "b", "c", "d"});
    for (int i = 0; i < 3; ++i) nets.push_back(gen.next());
    std::mt19937_64 rng(17);
    std::size_t total = 0, agree = 0;
    for (const auto& net : nets) {
        align::Aligner al(net);
        auto alphabet = net.visible_labels();
        alphabet.push_back("x1");
        alphabet.push_back("x2");
        for (int i = 0; i < 200; ++i) {
            const auto t = ts::random_trace(rng, alphabet, 8);
            ++total;
            agree += std::abs(al.align(t).cost - ts::oracle_cost(net, t).cost) < 1e-9;
        }
    }
    const double dt = seconds_since(t0);
    o.require(agree == total, std::to_string(total - agree) + " mismatches");
    o.require(dt < 60.0, "runtime " + num(dt) + " s");
    if (o.pass) o.detail = std::to_string(agree) + "/" + std::to_string(total) + " agree over " +
                           std::to_string(nets.size()) + " nets, " + num(dt, 2) + " s";
    return o;
}

Outcome coverage() {
    Outcome o;
    const auto net = ts::som();
    align::Aligner al(net);
    const auto clean = petri::playout(net, 1000, 1);
    o.require(align::coverage(al, clean) == 1.0, "noise-free coverage");
    o.require(align::log_fitness(al, clean) == 1.0, "noise-free fitness");
    std::vector<double> cov;
    for (double p : {0.05, 0.15, 0.30}) {
        petri::PlayoutOptions opt;
        opt.noise.p_drop = p;
        cov.push_back(align::coverage(al, petri::playout(net, 1000, 1, opt)));
    }
    o.require(cov[0] > cov[1] && cov[1] > cov[2], "not strictly decreasing");
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("coverage ") + num(cov[0]) + " > " + num(cov[1]) +
                " > " + num(cov[2]);
    return o;
}

Outcome injection() {
    Outcome o;
    const auto src = petri::playout(ts::som(), 1000, 1);
    std::string means;
    for (auto type : {inject::AnomalyType::ma, inject::AnomalyType::woa, inject::AnomalyType::ua}) {
        const auto r = inject::inject_log(src, {type, 3.0, inject::default_unknown_pool(), 7});
        double sum = 0;
        for (auto k : r.k_applied) sum += k;
        const double mean = sum / static_cast<double>(r.k_applied.size());
        means += std::string(means.empty() ? "" : ", ") + std::string(inject::to_string(type)) + " " + num(mean, 3);
        // MA is capped at the trace length; the mean bound is for WOA and UA.
        if (type != inject::AnomalyType::ma) o.require(mean >= 2.95 && mean <= 3.35, "mean K " + num(mean));
        for (std::size_t i = 0; i < src.size(); ++i) {
            const auto& before = src[i].events;
            const auto& after = r.log[i].events;
            const auto k = r.k_applied[i];
            if (type == inject::AnomalyType::ma && after.size() + k != before.size()) o.require(false, "MA delta");
            if (type == inject::AnomalyType::ua && after.size() != before.size() + k) o.require(false, "UA delta");
            if (type == inject::AnomalyType::woa) {
                auto x = before, y = after;
                std::sort(x.begin(), x.end());
                std::sort(y.begin(), y.end());
                if (x != y) o.require(false, "WOA multiset");
            }
        }
    }
    o.detail += (o.detail.empty() ? "" : "; ") + std::string("mean K: ") + means;
    return o;
}

Outcome ae_numerics() {
    Outcome o;
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 5; ++seed)
        for (const auto& shape : {std::vector<std::size_t>{4, 2, 4}, std::vector<std::size_t>{14, 7, 4, 7, 14}})
            worst = std::max(worst, detect::ae_gradient_check(shape, seed));
    o.require(worst < 1e-4, "gradient error " + std::to_string(worst));
    const auto d = diag::read_diagnoses(ts::read_data("som_train.diag.csv"));
    const auto x = detect::Normalizer::fit(detect::feature_rows(d)).apply(detect::feature_rows(d));
    detect::Mlp net(detect::autoencoder_layers(d.width()), 0);
    const auto h = detect::train_mlp(net, x, 500);
    std::size_t rises = 0;
    for (std::size_t e = 1; e < h.size(); ++e) rises += h[e] > h[e - 1];
    o.require(rises == 0, std::to_string(rises) + " loss increases");
    char buf[160];
    std::snprintf(buf, sizeof buf, "max gradient error %.2e; loss %.4f -> %.4f", worst, h.front(), h.back());
    o.detail += (o.detail.empty() ? "" : "; ") + std::string(buf);
    return o;
}

Outcome metrics_suite() {
    Outcome o;
    const auto m = metrics::prf({47, 47, 3, 3});
    o.require(m.accuracy == 0.94 && m.precision == 0.94 && m.recall == 0.94 && m.f1 == 0.94, "prf example");
    auto auc = [](std::vector<bool> y, std::vector<double> s) {
        auto buf = std::make_unique<bool[]>(y.size());
        std::copy(y.begin(), y.end(), buf.get());
        return metrics::roc_auc({buf.get(), y.size()}, s).auc;
    };
    o.require(auc({true, true, false, false}, {0.9, 0.8, 0.2, 0.1}) == 1.0, "separated AUC");
    o.require(auc({true, false, true, false}, {0.4, 0.4, 0.4, 0.4}) == 0.5, "constant AUC");
    o.require(auc({true, false, true, false}, {0.9, 0.8, 0.7, 0.1}) == 0.75, "4-point AUC");
    std::mt19937_64 rng(3);
    double worst = 0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 2 + rng() % 80;
        std::vector<bool> y(n);
        std::vector<double> s(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng() % 2;
            s[i] = static_cast<double>(rng() % 9);
        }
        y[0] = true;
        y[1] = false;
        double wins = 0, pairs = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (y[i] && !y[j]) {
                    pairs += 1;
                    wins += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
                }
        worst = std::max(worst, std::abs(auc(y, s) - wins / pairs));
    }
    o.require(worst <= 1e-12, "sweep vs pair-count AUC differ by " + std::to_string(worst));
    return o;
}

std::string reports(const experiment::ExperimentResult& r) {
    std::string out;
    for (const auto& run : r.runs) out += experiment::seed_csv(run);
    return out + experiment::summary_csv(r);
}

Outcome table3(const experiment::ExperimentResult& noisy, double noisy_seconds) {
    using experiment::ExperimentConfig;
    using inject::AnomalyType;
    using detect::DetectorKind;
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    auto f1 = [&](const experiment::ExperimentResult& r, AnomalyType t, DetectorKind k) { return r.get(t, k).mean[3]; };
    std::string d;
    for (auto t : {AnomalyType::ma, AnomalyType::ua}) {
        const double ft = f1(noisy, t, DetectorKind::ft), db = f1(noisy, t, DetectorKind::dbscan),
                     ae = f1(noisy, t, DetectorKind::ae);
        const auto name = std::string(inject::to_string(t));
        d += name + " F1 ft " + num(ft, 3) + " dbscan " + num(db, 3) + " ae " + num(ae, 3) + "; ";
        o.require(ae > ft, "(a) AE <= FT on " + name);
        o.require(db > ft, "(a) DBSCAN <= FT on " + name);
    }
    const double auc = noisy.get(AnomalyType::all, DetectorKind::ae).mean[4];
    d += "ALL AUC ae " + num(auc, 3) + "; ";
    o.require(auc >= 0.85, "(b) AE AUC on ALL below 0.85");

    ExperimentConfig clean_cfg;
    clean_cfg.noise = {0, 0};
    clean_cfg.detectors = {DetectorKind::ft};
    const auto clean = experiment::run_experiment(ts::som(), clean_cfg);
    bool perfect = true;
    for (auto t : experiment::kTypes) perfect = perfect && f1(clean, t, DetectorKind::ft) == 1.0;
    o.require(perfect, "(c) noise-free FT F1 below 1");
    const double dt = noisy_seconds + seconds_since(t0);
    o.require(dt < 300.0, "runtime " + num(dt) + " s");
    d += "runtime " + num(dt, 2) + " s";
    o.detail = o.detail.empty() ? d : o.detail + " | " + d;
    return o;
}

Outcome soundness() {
    Outcome o;
    const auto ok = petri::check_soundness(ts::fn1());
    o.require(ok.sound() && ok.dead_transitions.empty() && ok.final_always_reachable, "FN1 not sound");
    const auto broken = petri::NetBuilder(ts::fn1()).remove_arc("p5", "t6").build_relaxed();
    const auto bad = petri::check_soundness(broken);
    o.require(!bad.sound(), "broken net reported sound");
    o.require(bad.dead_transitions == std::vector<std::string>{"t6"}, "t6 not reported dead");
    return o;
}

} // namespace

int main() {
    int failures = 0;
    auto report = [&](int id, const std::string& name, const std::function<Outcome()>& f) {
        Outcome o;
        try {
            o = f();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.pass;
        std::printf("%s %d %s%s%s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.empty() ? "" : ": ",
                    o.detail.c_str());
        std::fflush(stdout);
    };

    report(1, "fixture correctness", fixtures);
    report(2, "oracle equivalence", oracle);
    report(3, "coverage identity and monotonicity", coverage);
    report(4, "injection statistics", injection);
    report(5, "autoencoder numerics", ae_numerics);
    report(6, "metrics", metrics_suite);

    const experiment::ExperimentConfig cfg;
    std::optional<experiment::ExperimentResult> first;
    double first_seconds = 0;
    std::string first_error;
    try {
        const auto t0 = std::chrono::steady_clock::now();
        first = experiment::run_experiment(ts::som(), cfg);
        first_seconds = seconds_since(t0);
    } catch (const std::exception& e) {
        first_error = e.what();
    }
    report(7, "qualitative detector ordering", [&] {
        if (!first) throw Error(first_error);
        return table3(*first, first_seconds);
    });
    report(8, "determinism", [&] {
        if (!first) throw Error(first_error);
        Outcome o;
        const auto second = experiment::run_experiment(ts::som(), cfg);
        o.require(reports(*first) == reports(second), "reports differ between runs");
        return o;
    });
    report(9, "soundness check", soundness);
    return failures == 0 ? 0 : 1;
}
