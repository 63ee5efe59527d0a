#ifndef CONFMON_METRICS_HPP
#define CONFMON_METRICS_HPP

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include "confmon/error.hpp"

namespace confmon::metrics {

/// Anomalous is the positive class.
struct Confusion {
    std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;

    std::uint64_t total() const noexcept { return tp + tn + fp + fn; }
    friend bool operator==(const Confusion&, const Confusion&) = default;
};

inline Confusion confusion(std::span<const bool> anomalous, std::span<const bool> predicted) {
    if (anomalous.size() != predicted.size())
        throw Error("labels and predictions differ in length (" + std::to_string(anomalous.size()) + " vs " +
                    std::to_string(predicted.size()) + ")");
    Confusion c;
    for (std::size_t i = 0; i < anomalous.size(); ++i) {
        if (anomalous[i])
            (predicted[i] ? c.tp : c.fn)++;
        else
            (predicted[i] ? c.fp : c.tn)++;
    }
    return c;
}

struct Prf {
    double accuracy = 0, precision = 0, recall = 0, f1 = 0;
    bool zero_division = false;  ///< some ratio had a zero denominator and was set to 0
};

inline Prf prf(const Confusion& c) {
    Prf r;
    auto ratio = [&](std::uint64_t num, std::uint64_t den) {
        if (den == 0) {
            r.zero_division = true;
            return 0.0;
        }
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.accuracy = ratio(c.tp + c.tn, c.total());
    r.precision = ratio(c.tp, c.tp + c.fp);
    r.recall = ratio(c.tp, c.tp + c.fn);
    // 2PR/(P+R) written over counts, which avoids rounding in the product.
    if (r.precision + r.recall > 0)
        r.f1 = static_cast<double>(2 * c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
    else
        r.f1 = 0.0, r.zero_division = true;
    return r;
}

struct RocCurve {
    std::vector<std::pair<double, double>> points;  ///< (fpr, tpr) from (0,0) to (1,1)
    double auc = 0;
};

/// Sweeps the threshold over distinct scores from high to low; tied scores
/// move the curve diagonally, which counts ties as one half.
inline RocCurve roc_auc(std::span<const bool> anomalous, std::span<const double> scores) {
    if (anomalous.size() != scores.size()) throw Error("labels and scores differ in length");
    const auto pos = static_cast<std::uint64_t>(std::count(anomalous.begin(), anomalous.end(), true));
    const auto neg = anomalous.size() - pos;
    if (pos == 0 || neg == 0) throw Error("ROC needs at least one anomalous and one normal trace");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve roc;
    roc.points.emplace_back(0.0, 0.0);
    std::uint64_t tp = 0, fp = 0;
    double area2 = 0;  // twice the area, in count units
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        std::uint64_t dtp = 0, dfp = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            (anomalous[order[j]] ? dtp : dfp)++;
            ++j;
        }
        area2 += static_cast<double>(dfp) * static_cast<double>(2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        roc.points.emplace_back(static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos));
        i = j;
    }
    roc.auc = area2 / (2.0 * static_cast<double>(pos) * static_cast<double>(neg));
    return roc;
}

} // namespace confmon::metrics

#endif // CONFMON_METRICS_HPP
