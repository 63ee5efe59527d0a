// confmon: conformance-checking based control-flow anomaly detection.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "confmon/alignment.hpp"
#include "confmon/detect.hpp"
#include "confmon/diagnoses.hpp"
#include "confmon/eventlog.hpp"
#include "confmon/experiment.hpp"
#include "confmon/inject.hpp"
#include "confmon/metrics.hpp"
#include "confmon/petri.hpp"
#include "confmon/playout.hpp"

namespace fs = std::filesystem;
using namespace confmon;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

// "-" or empty writes to standard output.
void write_output(const std::string& path, const std::string& content) {
    if (path.empty() || path == "-") {
        std::cout << content;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path + "'");
    f << content;
}

petri::PetriNet load_model(const std::string& path, bool relaxed = false) {
    try {
        return petri::parse_model(read_file(path), fs::path(path).stem().string(), relaxed);
    } catch (const ParseError& e) {
        throw Error(path + ": " + e.what());
    }
}

log::EventLog load_log(const std::string& path) {
    try {
        return log::parse_log(read_file(path));
    } catch (const ParseError& e) {
        throw Error(path + ": " + e.what());
    }
}

align::CostScheme parse_costs(const std::string& s) {
    if (s.empty()) return {};
    auto cells = log::detail::split(s, ',');
    if (cells.size() != 4) throw Error("--costs expects log,model,silent,sync");
    align::CostScheme c;
    try {
        c = {std::stod(cells[0]), std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3])};
    } catch (const std::exception&) {
        throw Error("--costs expects four numbers");
    }
    c.validate();
    return c;
}

std::string fixed6(double v) { return diag::format_fixed6(v); }

int cmd_simulate(const std::string& model, std::size_t n, std::uint64_t seed, std::size_t max_steps, double p_drop,
                 double p_dup, const std::string& format, const std::string& out) {
    const auto net = load_model(model);
    petri::PlayoutOptions opt;
    opt.max_steps = max_steps;
    opt.noise = {p_drop, p_dup};
    const auto lg = petri::playout(net, n, seed, opt);
    write_output(out, format == "csv" ? log::write_log_csv(lg) : log::write_log(lg));
    return 0;
}

int cmd_soundness(const petri::PetriNet& net) {
    const auto r = petri::check_soundness(net);
    std::cout << "workflow_net=" << (petri::is_workflow_net(net) ? "yes" : "no") << "\n";
    std::cout << "reachable_markings=" << r.reachable_markings << "\n";
    if (r.inconclusive) {
        std::cout << "sound=inconclusive (" << r.inconclusive_reason << ")\n";
        return 1;
    }
    std::cout << "final_reachable=" << (r.final_reachable ? "yes" : "no") << "\n";
    std::cout << "final_always_reachable=" << (r.final_always_reachable ? "yes" : "no") << "\n";
    std::cout << "dead_transitions=";
    for (std::size_t i = 0; i < r.dead_transitions.size(); ++i)
        std::cout << (i ? "," : "") << r.dead_transitions[i];
    std::cout << "\nsound=" << (r.sound() ? "yes" : "no") << "\n";
    return r.sound() ? 0 : 1;
}

int cmd_check(const std::string& model, const std::string& log_path, const std::string& costs_s,
              const std::string& out) {
    if (log_path.empty()) return cmd_soundness(load_model(model, true));
    const auto net = load_model(model);
    const auto lg = load_log(log_path);
    const align::Aligner aligner(net, parse_costs(costs_s));
    const auto d = diag::build_diagnoses(aligner, lg);
    write_output(out, diag::write_diagnoses(d));
    double fit = 0;
    for (const auto& r : d.rows) fit += r.fitness;
    fit = d.rows.empty() ? 1.0 : fit / static_cast<double>(d.rows.size());
    const double cov = lg.empty() ? 1.0 : align::coverage(aligner, lg);
    std::cout << "fitness=" << fixed6(fit) << " coverage=" << fixed6(cov) << "\n";
    return 0;
}

int cmd_coverage(const std::string& model, const std::string& log_path, const std::string& costs_s) {
    const auto net = load_model(model);
    const auto lg = load_log(log_path);
    const align::Aligner aligner(net, parse_costs(costs_s));
    const auto s = log::stats(lg);
    std::cout << "traces=" << s.n_traces << "\n"
              << "variants=" << s.n_variants << "\n"
              << "mean_length=" << fixed6(s.mean_len) << "\n"
              << "std_length=" << fixed6(s.std_len) << "\n"
              << "fitness=" << fixed6(align::log_fitness(aligner, lg)) << "\n"
              << "coverage=" << fixed6(align::coverage(aligner, lg)) << "\n";
    return 0;
}

std::vector<std::string> load_pool(const std::string& path) {
    if (path.empty()) return inject::default_unknown_pool();
    std::vector<std::string> pool;
    for (const auto& line : log::detail::lines_of(read_file(path))) {
        if (log::detail::is_blank_or_comment(line)) continue;
        for (const auto& tok : petri::detail::split_ws(line)) pool.push_back(tok);
    }
    return pool;
}

int cmd_inject(const std::string& log_path, const std::string& type_s, double lambda, const std::string& pool_path,
               std::uint64_t seed, const std::string& model, const std::string& out) {
    const auto lg = load_log(log_path);
    const auto type = inject::parse_anomaly_type(type_s);
    const auto pool = load_pool(pool_path);
    std::vector<std::string> labels;
    if (!model.empty()) labels = load_model(model).visible_labels();
    inject::InjectionSpec spec{type, lambda, pool, seed};
    spec.validate(labels);
    log::EventLog result;
    if (type == inject::AnomalyType::all)
        result = inject::build_eval_sets(lg, lambda, pool, seed).all;
    else
        result = inject::inject_log(lg, spec).log;
    write_output(out, log::write_log(result));
    return 0;
}

int cmd_train(const std::string& kind_s, const std::string& model, const std::string& log_path,
              const std::string& split_s, double quantile, std::uint64_t seed, std::size_t epochs,
              const std::string& test_out, const std::string& out) {
    const auto kind = detect::parse_kind(kind_s);
    const auto net = load_model(model);
    const auto lg = load_log(log_path);
    const auto parts = log::split_log(lg, log::parse_ratios(split_s), seed);
    const align::Aligner aligner(net);
    detect::TrainParams p;
    p.quantile = quantile;
    p.epochs = epochs;
    const auto det = detect::train(kind, diag::build_diagnoses(aligner, parts.train),
                                   diag::build_diagnoses(aligner, parts.validation), p, seed);
    if (!test_out.empty()) write_output(test_out, log::write_log(parts.test));
    write_output(out, detect::save_detector(det));
    std::cerr << "threshold=" << det.threshold << " train=" << parts.train.size()
              << " validation=" << parts.validation.size() << " test=" << parts.test.size() << "\n";
    return 0;
}

int cmd_detect(const std::string& det_path, const std::string& model, const std::string& log_path,
               const std::string& out) {
    const auto det = detect::load_detector(read_file(det_path));
    const auto net = load_model(model);
    const auto lg = load_log(log_path);
    const auto d = diag::build_diagnoses(align::Aligner(net), lg);
    const auto scores = detect::score_all(det, d);
    std::string csv = "case,score,prediction\n";
    for (std::size_t i = 0; i < scores.size(); ++i)
        csv += d.rows[i].case_id + "," + detect::detail::fmt17(scores[i]) + "," +
               std::string(log::to_string(detect::is_anomalous(det, scores[i]) ? log::Label::anomalous
                                                                                 : log::Label::normal)) +
               "\n";
    write_output(out, csv);
    return 0;
}

int cmd_evaluate(const std::string& preds_path, const std::string& labels_path, const std::string& out,
                 const std::string& roc_out) {
    const auto lg = load_log(labels_path);
    std::map<std::string, bool, std::less<>> truth;
    for (const auto& t : lg) {
        if (!t.label) throw Error(labels_path + ": case '" + t.case_id + "' has no label");
        truth[t.case_id] = *t.label == log::Label::anomalous;
    }
    const auto lines = log::detail::lines_of(read_file(preds_path));
    std::vector<char> y, yhat;
    std::vector<double> scores;
    bool header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        auto t = log::detail::trim(lines[i]);
        if (t.empty() || t.front() == '#') continue;
        auto cells = log::detail::split(t, ',');
        if (!header) {
            if (cells != std::vector<std::string>{"case", "score", "prediction"})
                throw Error(preds_path + ": line " + std::to_string(i + 1) + ": header must be case,score,prediction");
            header = true;
            continue;
        }
        const auto where = preds_path + ": line " + std::to_string(i + 1) + ": ";
        if (cells.size() != 3) throw Error(where + "expected 3 columns");
        auto it = truth.find(cells[0]);
        if (it == truth.end()) throw Error(where + "case '" + cells[0] + "' not in the labeled log");
        auto pred = log::parse_label(cells[2]);
        if (!pred) throw Error(where + "prediction must be normal or anomalous");
        double s = 0;
        try {
            s = std::stod(cells[1]);
        } catch (const std::exception&) {
            throw Error(where + "score is not a number");
        }
        y.push_back(it->second);
        yhat.push_back(*pred == log::Label::anomalous);
        scores.push_back(s);
    }
    if (!header) throw Error(preds_path + ": missing header");
    const std::size_t n = y.size();
    auto yb = std::make_unique<bool[]>(n), pb = std::make_unique<bool[]>(n);
    for (std::size_t i = 0; i < n; ++i) yb[i] = y[i], pb[i] = yhat[i];
    const auto c = metrics::confusion({yb.get(), n}, {pb.get(), n});
    const auto m = metrics::prf(c);
    if (m.zero_division) std::cerr << "warning: zero division in a metric, reported as 0\n";
    std::string csv = "metric,value\n";
    csv += "accuracy," + fixed6(m.accuracy) + "\nprecision," + fixed6(m.precision) + "\nrecall," +
           fixed6(m.recall) + "\nf1," + fixed6(m.f1) + "\n";
    const auto pos = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
    if (pos > 0 && pos < n) {
        const auto roc = metrics::roc_auc({yb.get(), n}, scores);
        csv += "auc," + fixed6(roc.auc) + "\n";
        if (!roc_out.empty()) {
            std::string r = "fpr,tpr\n";
            for (const auto& [f, t] : roc.points) r += fixed6(f) + "," + fixed6(t) + "\n";
            write_output(roc_out, r);
        }
    } else {
        std::cerr << "warning: single-class labels, AUC omitted\n";
        if (!roc_out.empty()) throw Error("ROC needs at least one anomalous and one normal trace");
    }
    csv += "tp," + std::to_string(c.tp) + "\ntn," + std::to_string(c.tn) + "\nfp," + std::to_string(c.fp) +
           "\nfn," + std::to_string(c.fn) + "\n";
    write_output(out, csv);
    return 0;
}

int cmd_experiment(const std::string& config_path, const std::string& output_override) {
    auto cfg = experiment::parse_config(read_file(config_path));
    const auto base = fs::path(config_path).parent_path();
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    const auto model_path = resolve(cfg.model);
    if (!fs::exists(model_path)) throw Error("model '" + model_path.string() + "' does not exist");
    const auto out_dir = output_override.empty() ? resolve(cfg.output) : fs::path(output_override);
    const auto net = load_model(model_path.string());
    const auto res = experiment::run_experiment(net, cfg);
    for (const auto& r : res.runs)
        if (!r.ok()) std::cerr << "seed " << r.seed << " failed: " << r.error << "\n";
    experiment::write_reports(res, out_dir);
    std::cout << experiment::table(res);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conformance-checking based control-flow anomaly detection"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    std::string model, log_path, out, costs, pool, type = "all", detector, split = "0.6,0.2,0.2", format = "lines";
    std::string det_path, preds, labels, roc, config, test_out;
    std::size_t n = 50, max_steps = 200, epochs = 500;
    std::uint64_t seed = 0;
    double p_drop = 0, p_dup = 0, lambda = 3, quantile = 95;

    auto* sim = app.add_subcommand("simulate", "Play out a model into an event log");
    sim->add_option("--model", model, "Model file")->required();
    sim->add_option("--n", n, "Number of traces")->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "Random seed");
    sim->add_option("--max-steps", max_steps, "Firing limit per run")->check(CLI::PositiveNumber);
    sim->add_option("--p-drop", p_drop, "Per-event drop probability")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--p-dup", p_dup, "Per-event duplication probability")->check(CLI::Range(0.0, 1.0));
    sim->add_option("--format", format, "lines or csv")->check(CLI::IsMember({"lines", "csv"}));
    sim->add_option("-o,--output", out, "Output log (default stdout)");

    auto* chk = app.add_subcommand("check", "Soundness report, or diagnoses of a log against a model");
    chk->add_option("--model", model, "Model file")->required();
    chk->add_option("--log", log_path, "Event log; without it the model's soundness is reported");
    chk->add_option("--costs", costs, "log,model,silent,sync move costs");
    chk->add_option("-o,--output", out, "Diagnoses CSV (default stdout)");

    auto* cov = app.add_subcommand("coverage", "Log statistics, fitness and coverage");
    cov->add_option("--model", model, "Model file")->required();
    cov->add_option("--log", log_path, "Event log")->required();
    cov->add_option("--costs", costs, "log,model,silent,sync move costs");

    auto* inj = app.add_subcommand("inject", "Inject control-flow anomalies into a log");
    inj->add_option("--log", log_path, "Source log")->required();
    inj->add_option("--type", type, "ma, woa, ua or all");
    inj->add_option("--lambda", lambda, "Poisson mean of modifications per trace");
    inj->add_option("--pool", pool, "File of unknown activities (default unk_1..unk_10)");
    inj->add_option("--model", model, "Model file; rejects pool activities that the model uses");
    inj->add_option("--seed", seed, "Random seed");
    inj->add_option("-o,--output", out, "Output log (default stdout)");

    auto* trn = app.add_subcommand("train", "Train a detector on a normal log");
    trn->add_option("--detector", detector, "ft, dbscan or ae")->required();
    trn->add_option("--model", model, "Model file")->required();
    trn->add_option("--log", log_path, "Normal event log")->required();
    trn->add_option("--split", split, "train,validation,test ratios");
    trn->add_option("--quantile", quantile, "Threshold percentile of validation scores")->check(CLI::Range(0.0, 100.0));
    trn->add_option("--seed", seed, "Random seed");
    trn->add_option("--epochs", epochs, "Autoencoder epochs");
    trn->add_option("--test-log", test_out, "Write the held-out test part here");
    trn->add_option("-o,--output", out, "Detector file (default stdout)");

    auto* det = app.add_subcommand("detect", "Score and classify a log");
    det->add_option("--detector", det_path, "Detector file")->required();
    det->add_option("--model", model, "Model file")->required();
    det->add_option("--log", log_path, "Event log")->required();
    det->add_option("-o,--output", out, "Predictions CSV (default stdout)");

    auto* ev = app.add_subcommand("evaluate", "Metrics of predictions against a labeled log");
    ev->add_option("--preds", preds, "Predictions CSV")->required();
    ev->add_option("--labels", labels, "Labeled event log")->required();
    ev->add_option("--roc", roc, "Write ROC points here");
    ev->add_option("-o,--output", out, "Metrics CSV (default stdout)");

    auto* exp = app.add_subcommand("experiment", "Multi-seed evaluation");
    exp->add_option("--config", config, "key=value config file")->required();
    exp->add_option("-o,--output", out, "Output directory (overrides the config)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) return cmd_simulate(model, n, seed, max_steps, p_drop, p_dup, format, out);
        if (*chk) return cmd_check(model, log_path, costs, out);
        if (*cov) return cmd_coverage(model, log_path, costs);
        if (*inj) return cmd_inject(log_path, type, lambda, pool, seed, model, out);
        if (*trn) return cmd_train(detector, model, log_path, split, quantile, seed, epochs, test_out, out);
        if (*det) return cmd_detect(det_path, model, log_path, out);
        if (*ev) return cmd_evaluate(preds, labels, out, roc);
        if (*exp) return cmd_experiment(config, out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
