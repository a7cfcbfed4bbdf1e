#pragma once

#include "ovt/features.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ovt {

// Positive prediction means score >= threshold everywhere in this module.
struct ConfusionCounts {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t tn = 0;
    std::size_t fn = 0;
};

ConfusionCounts confusion_at_threshold(std::span<const double> scores,
                                       std::span<const int> labels, double threshold);

// Ratios are absent, not zero, when their denominator is empty.
std::optional<double> precision(const ConfusionCounts& c);
std::optional<double> recall(const ConfusionCounts& c);
std::optional<double> true_positive_rate(const ConfusionCounts& c); // alias of recall
std::optional<double> true_negative_rate(const ConfusionCounts& c);
std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall);
std::optional<double> f1_score(const ConfusionCounts& c);

// Precision/recall pairs at every distinct score, scores descending. auc is
// the step integral sum((r_k - r_{k-1}) * p_k) with r_0 = 0.
struct PrCurve {
    std::vector<double> thresholds;
    std::vector<double> precision;
    std::vector<double> recall;
    double auc = 0.0;
};

PrCurve pr_curve(std::span<const double> scores, std::span<const int> labels);

struct SweepPoint {
    double threshold = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

// F1 over thresholds 0.00, 0.01, ..., 1.00; ties keep the lowest threshold.
struct SweepResult {
    std::vector<SweepPoint> points;
    double best_threshold = 0.0;
    double best_f1 = 0.0;
};

SweepResult f1_sweep(std::span<const double> scores, std::span<const int> labels);

std::vector<double> fuse_mean(const std::vector<double>& a, const std::vector<double>& b);

// Threshold-free and thresholded summary for one moment's samples; the
// operating point is the moment's own sweep winner.
struct MomentMetrics {
    Moment moment = Moment::t;
    std::size_t n_samples = 0;
    double auc_pr = 0.0;
    double best_threshold = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

std::vector<MomentMetrics> evaluate_moments(const std::vector<double>& scores,
                                            const std::vector<WindowSample>& samples);

// Five-number summary with 1.5 IQR whiskers, one entry per distinct center
// offset, ascending. Quartiles interpolate linearly between order
// statistics.
struct BoxStats {
    double center_offset_s = 0.0;
    std::size_t count = 0;
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
    double whisker_lo = 0.0;
    double whisker_hi = 0.0;
};

std::vector<BoxStats> score_distributions(std::span<const double> scores,
                                          std::span<const double> center_offsets);

std::string pr_curve_csv(const PrCurve& curve);
std::string f1_sweep_csv(const SweepResult& sweep);
std::string box_stats_csv(std::span<const BoxStats> stats);

} // namespace ovt
