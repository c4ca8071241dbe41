#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "fisherdet/errors.hpp"

namespace fisherdet {

/// Detection tradeoff curve. Positive class = adversarial; a sample is
/// flagged when its score is strictly greater than the threshold.
struct RocCurve {
    std::vector<double> fpr;
    std::vector<double> tpr;
    std::vector<double> thresholds; // aligned with the points, +inf first
    double auc = 0.0;
};

/// Trapezoidal area under the stored points.
inline double auc(const RocCurve& curve) {
    double area = 0.0;
    for (std::size_t k = 1; k < curve.fpr.size(); ++k)
        area += (curve.fpr[k] - curve.fpr[k - 1]) * (curve.tpr[k] + curve.tpr[k - 1]) * 0.5;
    return area;
}

/**
 * ROC over all distinct thresholds plus infinite sentinels, swept from
 * +inf (nothing flagged, point (0,0)) down to -inf (everything flagged,
 * point (1,1)). With the strict-> flagging convention the trapezoidal
 * area equals the Mann-Whitney statistic with half credit for ties.
 */
inline RocCurve roc(const std::vector<double>& clean_scores, const std::vector<double>& adv_scores) {
    if (clean_scores.empty() || adv_scores.empty())
        throw DataError("roc needs nonempty clean and adversarial score populations");
    for (double s : clean_scores)
        if (!std::isfinite(s)) throw NumericError("non-finite clean score");
    for (double s : adv_scores)
        if (!std::isfinite(s)) throw NumericError("non-finite adversarial score");

    std::vector<double> cs = clean_scores, as = adv_scores;
    std::sort(cs.begin(), cs.end());
    std::sort(as.begin(), as.end());

    std::vector<double> levels;
    levels.reserve(cs.size() + as.size());
    std::merge(cs.begin(), cs.end(), as.begin(), as.end(), std::back_inserter(levels));
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());

    const double nc = static_cast<double>(cs.size());
    const double na = static_cast<double>(as.size());
    auto count_above = [](const std::vector<double>& sorted, double t) {
        return static_cast<double>(sorted.end() - std::upper_bound(sorted.begin(), sorted.end(), t));
    };

    RocCurve curve;
    auto add = [&](double t) {
        curve.thresholds.push_back(t);
        if (t == -std::numeric_limits<double>::infinity()) {
            curve.fpr.push_back(1.0);
            curve.tpr.push_back(1.0);
        } else if (t == std::numeric_limits<double>::infinity()) {
            curve.fpr.push_back(0.0);
            curve.tpr.push_back(0.0);
        } else {
            curve.fpr.push_back(count_above(cs, t) / nc);
            curve.tpr.push_back(count_above(as, t) / na);
        }
    };
    add(std::numeric_limits<double>::infinity());
    for (auto it = levels.rbegin(); it != levels.rend(); ++it) add(*it);
    add(-std::numeric_limits<double>::infinity());

    // The stored auc is the same trapezoidal area, but accumulated over
    // integer counts: per level, #clean at the level times (#adv above twice,
    // plus #adv at the level). Everything stays integral until one final
    // division, which is also the last step of half-credit pair counting, so
    // the two agree bitwise instead of merely to rounding error.
    auto count_equal = [](const std::vector<double>& sorted, double t) {
        auto [lo, hi] = std::equal_range(sorted.begin(), sorted.end(), t);
        return static_cast<double>(hi - lo);
    };
    double twice_area = 0.0;
    for (double t : levels)
        twice_area += count_equal(cs, t) * (2.0 * count_above(as, t) + count_equal(as, t));
    curve.auc = twice_area / (2.0 * nc * na);
    return curve;
}

struct Histogram {
    std::vector<double> edges;       // bins + 1, uniform
    std::vector<std::size_t> counts; // bins
};

/**
 * Uniform-bin histogram. Bins are left-closed/right-open except the last,
 * which is closed on both sides so the range maximum is counted. Scores
 * outside the range are dropped. A degenerate range (max == min) puts every
 * in-range score into the first bin.
 */
inline Histogram histogram(const std::vector<double>& scores, std::size_t bins,
                           const double* range_lo = nullptr, const double* range_hi = nullptr) {
    if (bins == 0) throw ConfigError("histogram needs at least one bin");
    if (scores.empty()) throw DataError("histogram of an empty score list");
    for (double s : scores)
        if (!std::isfinite(s)) throw NumericError("non-finite score in histogram input");

    double lo = range_lo ? *range_lo : *std::min_element(scores.begin(), scores.end());
    double hi = range_hi ? *range_hi : *std::max_element(scores.begin(), scores.end());
    if (hi < lo) throw ConfigError("histogram range is inverted");

    Histogram h;
    h.edges.resize(bins + 1);
    for (std::size_t k = 0; k <= bins; ++k)
        h.edges[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins);
    h.counts.assign(bins, 0);
    for (double s : scores) {
        if (s < lo || s > hi) continue;
        std::size_t k = 0;
        if (hi > lo) {
            double t = (s - lo) / (hi - lo) * static_cast<double>(bins);
            k = std::min(static_cast<std::size_t>(t), bins - 1);
        }
        ++h.counts[k];
    }
    return h;
}

inline void write_roc_csv(const RocCurve& curve, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "threshold,fpr,tpr\n";
    for (std::size_t k = 0; k < curve.fpr.size(); ++k)
        out << curve.thresholds[k] << ',' << curve.fpr[k] << ',' << curve.tpr[k] << '\n';
    if (!out) throw IoError("write failure on " + path);
}

inline void write_histogram_csv(const Histogram& h, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot write " + path);
    out.precision(17);
    out << "bin_left,bin_right,count\n";
    for (std::size_t k = 0; k < h.counts.size(); ++k)
        out << h.edges[k] << ',' << h.edges[k + 1] << ',' << h.counts[k] << '\n';
    if (!out) throw IoError("write failure on " + path);
}

} // namespace fisherdet
