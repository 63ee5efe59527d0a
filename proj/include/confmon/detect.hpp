#ifndef CONFMON_DETECT_HPP
#define CONFMON_DETECT_HPP

// One-class detectors over diagnoses rows. Higher scores are more anomalous;
// a row is anomalous iff its score is strictly above the threshold learned
// as a percentile of validation scores.
//
//   FT      score = 1 - fitness
//   DBSCAN  score = Euclidean distance to the nearest core point of the
//           normalized training rows
//   AE      score = mean squared reconstruction error of an autoencoder

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "confmon/diagnoses.hpp"
#include "confmon/error.hpp"

namespace confmon::detect {

enum class DetectorKind { ft, dbscan, ae };

inline std::string_view to_string(DetectorKind k) {
    switch (k) {
        case DetectorKind::ft: return "ft";
        case DetectorKind::dbscan: return "dbscan";
        case DetectorKind::ae: return "ae";
    }
    return "?";
}

inline DetectorKind parse_kind(std::string_view s) {
    if (s == "ft" || s == "FT") return DetectorKind::ft;
    if (s == "dbscan" || s == "DBSCAN") return DetectorKind::dbscan;
    if (s == "ae" || s == "AE") return DetectorKind::ae;
    throw Error("unknown detector '" + std::string(s) + "' (expected ft, dbscan or ae)");
}

using Matrix = std::vector<std::vector<double>>;

/// Linear-interpolated percentile, q in [0, 100].
inline double percentile(std::vector<double> values, double q) {
    if (values.empty()) throw Error("percentile of an empty sample");
    if (!(q >= 0 && q <= 100)) throw Error("percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = q / 100.0 * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, values.size() - 1);
    return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

inline double euclidean(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Normalization

inline constexpr double kClampLow = -0.5;
inline constexpr double kClampHigh = 1.5;

/// Per-column min-max scaling learned on training rows, clamped to
/// [-0.5, 1.5]. Constant columns use unit scale: training values map to 0
/// and any deviation stays visible.
struct Normalizer {
    std::vector<double> min;
    std::vector<double> scale;

    static Normalizer fit(const Matrix& rows) {
        if (rows.empty()) throw Error("cannot fit normalization on zero rows");
        const auto d = rows.front().size();
        Normalizer n{std::vector<double>(d, std::numeric_limits<double>::infinity()),
                     std::vector<double>(d, -std::numeric_limits<double>::infinity())};
        for (const auto& r : rows)
            for (std::size_t j = 0; j < d; ++j) {
                n.min[j] = std::min(n.min[j], r[j]);
                n.scale[j] = std::max(n.scale[j], r[j]);
            }
        for (std::size_t j = 0; j < d; ++j) {
            const double range = n.scale[j] - n.min[j];
            n.scale[j] = range > 0 ? range : 1.0;
        }
        return n;
    }

    std::vector<double> apply(std::span<const double> row) const {
        if (row.size() != min.size()) throw Error("row width does not match normalization");
        std::vector<double> out(row.size());
        for (std::size_t j = 0; j < row.size(); ++j)
            out[j] = std::clamp((row[j] - min[j]) / scale[j], kClampLow, kClampHigh);
        return out;
    }

    Matrix apply(const Matrix& rows) const {
        Matrix out;
        out.reserve(rows.size());
        for (const auto& r : rows) out.push_back(apply(r));
        return out;
    }
};

// ---------------------------------------------------------------------------
// Multilayer perceptron used as autoencoder

/// Fully connected network with tanh hidden layers and an identity output.
/// Parameters live in one flat vector: for each layer the row-major weight
/// matrix (out x in) followed by the bias vector.
class Mlp {
public:
    Mlp() = default;

    /// Xavier-uniform weights, zero biases.
    Mlp(std::vector<std::size_t> layers, std::uint64_t seed) : layers_(std::move(layers)) {
        allocate();
        std::mt19937_64 rng(seed);
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
            const double a = std::sqrt(6.0 / static_cast<double>(layers_[l] + layers_[l + 1]));
            std::uniform_real_distribution<double> u(-a, a);
            for (std::size_t i = 0; i < layers_[l] * layers_[l + 1]; ++i) params_[weight_offset(l) + i] = u(rng);
        }
    }

    static Mlp zeros(std::vector<std::size_t> layers) {
        Mlp m;
        m.layers_ = std::move(layers);
        m.allocate();
        return m;
    }

    const std::vector<std::size_t>& layers() const noexcept { return layers_; }
    std::vector<double>& params() noexcept { return params_; }
    const std::vector<double>& params() const noexcept { return params_; }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> a(x.begin(), x.end());
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) a = layer(l, a);
        return a;
    }

    /// Mean over rows of the per-row mean squared reconstruction error.
    double loss(const Matrix& data) const {
        if (data.empty()) return 0.0;
        double total = 0;
        for (const auto& x : data) total += reconstruction_error(x);
        return total / static_cast<double>(data.size());
    }

    double reconstruction_error(std::span<const double> x) const {
        auto y = forward(x);
        double s = 0;
        for (std::size_t j = 0; j < x.size(); ++j) s += (y[j] - x[j]) * (y[j] - x[j]);
        return s / static_cast<double>(x.size());
    }

    /// Analytic gradient of loss(data) with respect to params(), by backprop.
    std::vector<double> gradient(const Matrix& data) const {
        std::vector<double> grad(params_.size(), 0.0);
        const std::size_t n_layers = layers_.size() - 1;
        const double d = static_cast<double>(layers_.back());
        const double n = static_cast<double>(data.size());
        std::vector<std::vector<double>> acts(n_layers + 1);
        for (const auto& x : data) {
            acts[0].assign(x.begin(), x.end());
            for (std::size_t l = 0; l < n_layers; ++l) acts[l + 1] = layer(l, acts[l]);
            std::vector<double> delta(layers_.back());
            for (std::size_t j = 0; j < delta.size(); ++j) delta[j] = 2.0 * (acts[n_layers][j] - x[j]) / (d * n);
            for (std::size_t l = n_layers; l-- > 0;) {
                const std::size_t in = layers_[l], out = layers_[l + 1];
                const auto w = weight_offset(l), b = bias_offset(l);
                for (std::size_t o = 0; o < out; ++o) {
                    grad[b + o] += delta[o];
                    for (std::size_t i = 0; i < in; ++i) grad[w + o * in + i] += delta[o] * acts[l][i];
                }
                if (l == 0) break;
                std::vector<double> prev(in, 0.0);
                for (std::size_t i = 0; i < in; ++i) {
                    double s = 0;
                    for (std::size_t o = 0; o < out; ++o) s += params_[w + o * in + i] * delta[o];
                    prev[i] = s * (1.0 - acts[l][i] * acts[l][i]);
                }
                delta = std::move(prev);
            }
        }
        return grad;
    }

private:
    void allocate() {
        if (layers_.size() < 2) throw Error("network needs at least an input and an output layer");
        offsets_.clear();
        std::size_t total = 0;
        for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
            if (layers_[l] == 0 || layers_[l + 1] == 0) throw Error("layer sizes must be positive");
            offsets_.push_back(total);
            total += layers_[l] * layers_[l + 1] + layers_[l + 1];
        }
        params_.assign(total, 0.0);
    }

    std::size_t weight_offset(std::size_t l) const { return offsets_[l]; }
    std::size_t bias_offset(std::size_t l) const { return offsets_[l] + layers_[l] * layers_[l + 1]; }

    std::vector<double> layer(std::size_t l, const std::vector<double>& a) const {
        const std::size_t in = layers_[l], out = layers_[l + 1];
        const auto w = weight_offset(l), b = bias_offset(l);
        const bool hidden = l + 2 < layers_.size();
        std::vector<double> z(out);
        for (std::size_t o = 0; o < out; ++o) {
            double s = params_[b + o];
            for (std::size_t i = 0; i < in; ++i) s += params_[w + o * in + i] * a[i];
            z[o] = hidden ? std::tanh(s) : s;
        }
        return z;
    }

    std::vector<std::size_t> layers_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

struct AdamSettings {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// Full-batch Adam. Returns the loss at the start of every epoch followed by
/// the final loss (epochs + 1 values).
inline std::vector<double> train_mlp(Mlp& net, const Matrix& data, std::size_t epochs, const AdamSettings& s = {}) {
    auto& p = net.params();
    std::vector<double> m(p.size(), 0.0), v(p.size(), 0.0);
    std::vector<double> history;
    history.reserve(epochs + 1);
    for (std::size_t e = 1; e <= epochs; ++e) {
        const double loss = net.loss(data);
        if (!std::isfinite(loss))
            throw Error("autoencoder training diverged (loss is not finite); lower the learning rate");
        history.push_back(loss);
        const auto g = net.gradient(data);
        const double c1 = 1.0 - std::pow(s.beta1, static_cast<double>(e));
        const double c2 = 1.0 - std::pow(s.beta2, static_cast<double>(e));
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = s.beta1 * m[i] + (1 - s.beta1) * g[i];
            v[i] = s.beta2 * v[i] + (1 - s.beta2) * g[i] * g[i];
            p[i] -= s.learning_rate * (m[i] / c1) / (std::sqrt(v[i] / c2) + s.epsilon);
        }
    }
    const double final_loss = net.loss(data);
    if (!std::isfinite(final_loss))
        throw Error("autoencoder training diverged (loss is not finite); lower the learning rate");
    history.push_back(final_loss);
    return history;
}

/// [d, ceil(d/2), max(2, ceil(d/4)), ceil(d/2), d]
inline std::vector<std::size_t> autoencoder_layers(std::size_t d) {
    const auto half = (d + 1) / 2;
    const auto quarter = std::max<std::size_t>(2, (d + 3) / 4);
    return {d, half, quarter, half, d};
}

/// Compares backprop gradients with central finite differences of the
/// reconstruction loss on a few random rows. Relative error per parameter is
/// |a - n| / max(|a| + |n|, 1e-6); the maximum over all parameters is returned.
inline double ae_gradient_check(const std::vector<std::size_t>& layers, std::uint64_t seed, double step = 1e-5) {
    Mlp net(layers, seed);
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::uniform_real_distribution<double> small(-0.1, 0.1), unit(0.0, 1.0);
    // Xavier init leaves biases at zero; perturb them so their gradients are exercised.
    for (auto& x : net.params())
        if (x == 0.0) x = small(rng);
    Matrix data(3, std::vector<double>(layers.front()));
    for (auto& row : data)
        for (auto& x : row) x = unit(rng);

    const auto analytic = net.gradient(data);
    double worst = 0;
    auto& p = net.params();
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + step;
        const double up = net.loss(data);
        p[i] = keep - step;
        const double down = net.loss(data);
        p[i] = keep;
        const double numeric = (up - down) / (2 * step);
        const double rel = std::abs(analytic[i] - numeric) / std::max(std::abs(analytic[i]) + std::abs(numeric), 1e-6);
        worst = std::max(worst, rel);
    }
    return worst;
}

// ---------------------------------------------------------------------------
// Detector

struct FtModel {};

struct DbscanModel {
    double epsilon = 0;
    std::size_t min_pts = 4;
    Matrix core_points;  ///< normalized
};

struct AeModel {
    Mlp net;
    std::vector<double> loss_history;  ///< not serialized
};

struct TrainParams {
    double quantile = 95.0;
    std::size_t min_pts = 4;
    std::optional<double> epsilon;   ///< DBSCAN radius; default from the k-distance heuristic
    double epsilon_percentile = 90;  ///< percentile of min_pts-nearest-neighbour distances
    std::size_t epochs = 500;
    AdamSettings adam{};
};

struct Detector {
    DetectorKind kind = DetectorKind::ft;
    std::vector<std::string> columns;
    Normalizer normalizer;
    double threshold = 0;
    double quantile = 95;
    std::string model_id;
    std::uint64_t seed = 0;
    std::variant<FtModel, DbscanModel, AeModel> model;
};

inline Matrix feature_rows(const diag::DiagnosesMatrix& d) {
    Matrix m;
    m.reserve(d.rows.size());
    for (std::size_t i = 0; i < d.rows.size(); ++i) m.push_back(d.features(i));
    return m;
}

/// Score of a raw (unnormalized) feature row laid out as `detector.columns`.
inline double score(const Detector& det, std::span<const double> features) {
    if (features.size() != det.columns.size())
        throw Error("row has " + std::to_string(features.size()) + " features, detector expects " +
                    std::to_string(det.columns.size()));
    return std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, FtModel>) {
                return 1.0 - features.back();
            } else if constexpr (std::is_same_v<T, DbscanModel>) {
                const auto x = det.normalizer.apply(features);
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : m.core_points) best = std::min(best, euclidean(x, c));
                return best;
            } else {
                return m.net.reconstruction_error(det.normalizer.apply(features));
            }
        },
        det.model);
}

inline void check_columns(const Detector& det, const diag::DiagnosesMatrix& d) {
    if (d.columns() != det.columns) throw Error("diagnoses columns do not match the detector's columns");
}

inline double score(const Detector& det, const diag::DiagnosesMatrix& d, std::size_t row) {
    check_columns(det, d);
    return score(det, d.features(row));
}

inline std::vector<double> score_all(const Detector& det, const diag::DiagnosesMatrix& d) {
    check_columns(det, d);
    std::vector<double> s;
    s.reserve(d.rows.size());
    for (std::size_t i = 0; i < d.rows.size(); ++i) s.push_back(score(det, d.features(i)));
    return s;
}

inline bool is_anomalous(const Detector& det, double s) { return s > det.threshold; }

inline bool classify(const Detector& det, std::span<const double> features) {
    return is_anomalous(det, score(det, features));
}

inline bool classify(const Detector& det, const diag::DiagnosesMatrix& d, std::size_t row) {
    return is_anomalous(det, score(det, d, row));
}

/// Distance from each row to its k-th nearest other row.
inline std::vector<double> k_distances(const Matrix& rows, std::size_t k) {
    if (rows.size() <= k) throw Error("k-distance needs more than " + std::to_string(k) + " rows");
    std::vector<double> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<double> d;
        d.reserve(rows.size() - 1);
        for (std::size_t j = 0; j < rows.size(); ++j)
            if (j != i) d.push_back(euclidean(rows[i], rows[j]));
        std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(k - 1), d.end());
        out.push_back(d[k - 1]);
    }
    return out;
}

/// Core points: rows with at least min_pts rows (itself included) within epsilon.
inline Matrix dbscan_core_points(const Matrix& rows, double epsilon, std::size_t min_pts) {
    Matrix core;
    for (const auto& r : rows) {
        std::size_t n = 0;
        for (const auto& o : rows)
            if (euclidean(r, o) <= epsilon) ++n;
        if (n >= min_pts) core.push_back(r);
    }
    return core;
}

inline constexpr std::size_t kMinTrainRows = 5;

/// Fits normalization and the detector on training rows, then sets the
/// threshold to the `quantile`-th percentile of validation scores.
inline Detector train(DetectorKind kind, const diag::DiagnosesMatrix& train_d, const diag::DiagnosesMatrix& val_d,
                      const TrainParams& params = {}, std::uint64_t seed = 0) {
    if (train_d.columns() != val_d.columns()) throw Error("training and validation diagnoses have different columns");
    if (train_d.rows.size() < kMinTrainRows)
        throw Error("training needs at least " + std::to_string(kMinTrainRows) + " rows, got " +
                    std::to_string(train_d.rows.size()));
    if (val_d.rows.empty()) throw Error("validation diagnoses are empty");
    if (!(params.quantile >= 0 && params.quantile <= 100)) throw Error("quantile must lie in [0, 100]");

    Detector det;
    det.kind = kind;
    det.columns = train_d.columns();
    det.quantile = params.quantile;
    det.model_id = train_d.model_id;
    det.seed = seed;
    const auto raw = feature_rows(train_d);
    det.normalizer = Normalizer::fit(raw);
    const auto x = det.normalizer.apply(raw);

    switch (kind) {
        case DetectorKind::ft: det.model = FtModel{}; break;
        case DetectorKind::dbscan: {
            DbscanModel m;
            m.min_pts = params.min_pts;
            if (m.min_pts == 0) throw Error("min_pts must be positive");
            m.epsilon = params.epsilon ? *params.epsilon : percentile(k_distances(x, m.min_pts), params.epsilon_percentile);
            if (!(m.epsilon >= 0)) throw Error("DBSCAN epsilon must be non-negative");
            m.core_points = dbscan_core_points(x, m.epsilon, m.min_pts);
            if (m.core_points.empty())
                throw Error("DBSCAN found no core points; use a larger epsilon");
            det.model = std::move(m);
            break;
        }
        case DetectorKind::ae: {
            AeModel m{Mlp(autoencoder_layers(det.columns.size()), seed), {}};
            m.loss_history = train_mlp(m.net, x, params.epochs, params.adam);
            det.model = std::move(m);
            break;
        }
    }
    det.threshold = percentile(score_all(det, val_d), params.quantile);
    if (!std::isfinite(det.threshold)) throw Error("detector threshold is not finite");
    return det;
}

// ---------------------------------------------------------------------------
// Serialization

inline constexpr std::string_view kDetectorMagic = "confmon-detector";
inline constexpr int kDetectorVersion = 1;

namespace detail {

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt17(v[i]);
    return s;
}

inline std::vector<double> parse_doubles(std::string_view s, const std::string& key) {
    std::vector<double> out;
    if (s.empty()) return out;
    for (const auto& cell : log::detail::split(s, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(cell, &used));
            if (used != cell.size()) throw std::invalid_argument(cell);
        } catch (const std::exception&) {
            throw ParseError("malformed number '" + cell + "' in " + key);
        }
    }
    return out;
}

} // namespace detail

/// Versioned `key=value` text. Doubles use 17 significant digits so a loaded
/// detector reproduces every score exactly.
inline std::string save_detector(const Detector& det) {
    std::ostringstream out;
    out << kDetectorMagic << " " << kDetectorVersion << "\n";
    out << "kind=" << to_string(det.kind) << "\n";
    out << "model=" << det.model_id << "\n";
    out << "seed=" << det.seed << "\n";
    out << "quantile=" << detail::fmt17(det.quantile) << "\n";
    out << "threshold=" << detail::fmt17(det.threshold) << "\n";
    out << "columns=";
    for (std::size_t i = 0; i < det.columns.size(); ++i) out << (i ? "," : "") << det.columns[i];
    out << "\n";
    out << "norm_min=" << detail::join(det.normalizer.min) << "\n";
    out << "norm_scale=" << detail::join(det.normalizer.scale) << "\n";
    if (const auto* m = std::get_if<DbscanModel>(&det.model)) {
        out << "dbscan_epsilon=" << detail::fmt17(m->epsilon) << "\n";
        out << "dbscan_min_pts=" << m->min_pts << "\n";
        out << "dbscan_core_count=" << m->core_points.size() << "\n";
        for (const auto& c : m->core_points) out << "core=" << detail::join(c) << "\n";
    } else if (const auto* a = std::get_if<AeModel>(&det.model)) {
        out << "ae_layers=";
        const auto& l = a->net.layers();
        for (std::size_t i = 0; i < l.size(); ++i) out << (i ? "," : "") << l[i];
        out << "\n";
        out << "ae_params=" << detail::join(a->net.params()) << "\n";
    }
    out << "end\n";
    return out.str();
}

inline Detector load_detector(std::string_view text) {
    auto lines = log::detail::lines_of(text);
    std::size_t i = 0;
    while (i < lines.size() && log::detail::trim(lines[i]).empty()) ++i;
    if (i == lines.size()) throw ParseError("empty detector file");
    {
        auto head = petri::detail::split_ws(lines[i]);
        if (head.size() != 2 || head[0] != kDetectorMagic) throw ParseError("not a detector file", i + 1);
        if (head[1] != std::to_string(kDetectorVersion))
            throw ParseError("unsupported detector version " + head[1] + " (expected " +
                                 std::to_string(kDetectorVersion) + ")",
                             i + 1);
    }
    std::map<std::string, std::string> kv;
    std::vector<std::string> cores;
    bool ended = false;
    for (++i; i < lines.size(); ++i) {
        auto t = log::detail::trim(lines[i]);
        if (t.empty() || t.front() == '#') continue;
        if (t == "end") {
            ended = true;
            break;
        }
        auto eq = t.find('=');
        if (eq == std::string_view::npos) throw ParseError("expected key=value", i + 1);
        std::string key(t.substr(0, eq));
        std::string value(t.substr(eq + 1));
        if (key == "core")
            cores.push_back(value);
        else
            kv[key] = value;
    }
    if (!ended) throw ParseError("detector file is truncated (missing 'end')");

    auto need = [&](const std::string& key) -> const std::string& {
        auto it = kv.find(key);
        if (it == kv.end()) throw ParseError("detector file lacks '" + key + "'");
        return it->second;
    };
    auto need_double = [&](const std::string& key) {
        auto v = detail::parse_doubles(need(key), key);
        if (v.size() != 1) throw ParseError("'" + key + "' must be a single number");
        return v[0];
    };
    auto need_uint = [&](const std::string& key) -> std::uint64_t {
        const auto& s = need(key);
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); }))
            throw ParseError("'" + key + "' must be a non-negative integer");
        return std::stoull(s);
    };

    Detector det;
    try {
        det.kind = parse_kind(need("kind"));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(e.what());
    }
    det.model_id = need("model");
    det.seed = need_uint("seed");
    det.quantile = need_double("quantile");
    det.threshold = need_double("threshold");
    det.columns = log::detail::split(need("columns"), ',');
    det.normalizer.min = detail::parse_doubles(need("norm_min"), "norm_min");
    det.normalizer.scale = detail::parse_doubles(need("norm_scale"), "norm_scale");
    const auto d = det.columns.size();
    if (d < 2 || det.normalizer.min.size() != d || det.normalizer.scale.size() != d)
        throw ParseError("normalization width does not match the column list");

    switch (det.kind) {
        case DetectorKind::ft: det.model = FtModel{}; break;
        case DetectorKind::dbscan: {
            DbscanModel m;
            m.epsilon = need_double("dbscan_epsilon");
            m.min_pts = need_uint("dbscan_min_pts");
            if (need_uint("dbscan_core_count") != cores.size())
                throw ParseError("core point count does not match dbscan_core_count");
            for (const auto& c : cores) {
                m.core_points.push_back(detail::parse_doubles(c, "core"));
                if (m.core_points.back().size() != d) throw ParseError("core point width mismatch");
            }
            if (m.core_points.empty()) throw ParseError("DBSCAN detector has no core points");
            det.model = std::move(m);
            break;
        }
        case DetectorKind::ae: {
            std::vector<std::size_t> layers;
            for (double v : detail::parse_doubles(need("ae_layers"), "ae_layers")) {
                if (v < 1 || v != std::floor(v)) throw ParseError("ae_layers must be positive integers");
                layers.push_back(static_cast<std::size_t>(v));
            }
            if (layers.size() < 2 || layers.front() != d || layers.back() != d)
                throw ParseError("ae_layers do not match the column count");
            auto net = Mlp::zeros(layers);
            auto p = detail::parse_doubles(need("ae_params"), "ae_params");
            if (p.size() != net.params().size()) throw ParseError("ae_params has the wrong length");
            net.params() = std::move(p);
            det.model = AeModel{std::move(net), {}};
            break;
        }
    }
    return det;
}

} // namespace confmon::detect

#endif // CONFMON_DETECT_HPP
