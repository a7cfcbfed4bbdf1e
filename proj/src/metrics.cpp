#include "ovt/metrics.hpp"

#include "ovt/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

namespace ovt {
namespace {

void check_scored(std::span<const double> scores, std::span<const int> labels) {
    if (scores.size() != labels.size())
        throw Error(Errc::length_mismatch, "score count does not match labels");
    for (double s : scores)
        if (!std::isfinite(s)) throw Error(Errc::non_finite, "non-finite score");
    for (int y : labels)
        if (y != 0 && y != 1) throw Error(Errc::invalid_argument, "labels must be 0 or 1");
}

void require_both_classes(std::span<const int> labels) {
    const bool has1 = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool has0 = std::find(labels.begin(), labels.end(), 0) != labels.end();
    if (!has0 || !has1)
        throw Error(Errc::single_class, "metric needs both classes present");
}

std::string format_opt(std::optional<double> v) {
    if (!v) return "";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", *v);
    return buf;
}

// Linear interpolation between order statistics of a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p) {
    const std::size_t n = sorted.size();
    if (n == 1) return sorted[0];
    const double h = p * (n - 1);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= n) return sorted[n - 1];
    const double frac = h - lo;
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

} // namespace

ConfusionCounts confusion_at_threshold(std::span<const double> scores,
                                       std::span<const int> labels, double threshold) {
    check_scored(scores, labels);
    ConfusionCounts c;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const bool pred = scores[i] >= threshold;
        if (labels[i] == 1)
            (pred ? c.tp : c.fn) += 1;
        else
            (pred ? c.fp : c.tn) += 1;
    }
    return c;
}

std::optional<double> precision(const ConfusionCounts& c) {
    const std::size_t den = c.tp + c.fp;
    if (den == 0) return std::nullopt;
    return static_cast<double>(c.tp) / den;
}

std::optional<double> recall(const ConfusionCounts& c) {
    const std::size_t den = c.tp + c.fn;
    if (den == 0) return std::nullopt;
    return static_cast<double>(c.tp) / den;
}

std::optional<double> true_positive_rate(const ConfusionCounts& c) { return recall(c); }

std::optional<double> true_negative_rate(const ConfusionCounts& c) {
    const std::size_t den = c.tn + c.fp;
    if (den == 0) return std::nullopt;
    return static_cast<double>(c.tn) / den;
}

std::optional<double> f1_score(std::optional<double> precision, std::optional<double> recall) {
    if (!precision || !recall) return std::nullopt;
    const double sum = *precision + *recall;
    if (sum == 0.0) return std::nullopt;
    return 2.0 * *precision * *recall / sum;
}

std::optional<double> f1_score(const ConfusionCounts& c) {
    return f1_score(precision(c), recall(c));
}

PrCurve pr_curve(std::span<const double> scores, std::span<const int> labels) {
    check_scored(scores, labels);
    require_both_classes(labels);
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    const std::size_t total_pos =
        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));

    PrCurve curve;
    std::size_t tp = 0, fp = 0;
    std::size_t i = 0;
    double prev_recall = 0.0;
    while (i < n) {
        const double s = scores[order[i]];
        while (i < n && scores[order[i]] == s) {
            (labels[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        const double p = static_cast<double>(tp) / (tp + fp);
        const double r = static_cast<double>(tp) / total_pos;
        curve.thresholds.push_back(s);
        curve.precision.push_back(p);
        curve.recall.push_back(r);
        curve.auc += (r - prev_recall) * p;
        prev_recall = r;
    }
    return curve;
}

SweepResult f1_sweep(std::span<const double> scores, std::span<const int> labels) {
    check_scored(scores, labels);
    require_both_classes(labels);
    SweepResult sweep;
    bool found = false;
    for (int i = 0; i <= 100; ++i) {
        const double th = i / 100.0;
        const ConfusionCounts c = confusion_at_threshold(scores, labels, th);
        SweepPoint pt;
        pt.threshold = th;
        pt.precision = precision(c);
        pt.recall = recall(c);
        pt.f1 = f1_score(pt.precision, pt.recall);
        if (pt.f1 && (!found || *pt.f1 > sweep.best_f1)) {
            found = true;
            sweep.best_f1 = *pt.f1;
            sweep.best_threshold = th;
        }
        sweep.points.push_back(pt);
    }
    return sweep;
}

std::vector<double> fuse_mean(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw Error(Errc::length_mismatch, "fusion input size mismatch");
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] + b[i]) / 2.0;
    return out;
}

std::vector<MomentMetrics> evaluate_moments(const std::vector<double>& scores,
                                            const std::vector<WindowSample>& samples) {
    if (scores.size() != samples.size())
        throw Error(Errc::length_mismatch, "score count does not match samples");
    std::vector<MomentMetrics> out;
    for (Moment m : kAllMoments) {
        const std::vector<std::size_t> idx = moment_indices(samples, m);
        if (idx.empty()) throw Error(Errc::empty_moment, std::string(moment_name(m)));
        std::vector<double> s;
        std::vector<int> y;
        s.reserve(idx.size());
        y.reserve(idx.size());
        for (std::size_t i : idx) {
            s.push_back(scores[i]);
            y.push_back(samples[i].label == ClassLabel::overtake ? 1 : 0);
        }
        MomentMetrics mm;
        mm.moment = m;
        mm.n_samples = idx.size();
        mm.auc_pr = pr_curve(s, y).auc;
        const SweepResult sweep = f1_sweep(s, y);
        mm.best_threshold = sweep.best_threshold;
        const ConfusionCounts c = confusion_at_threshold(s, y, sweep.best_threshold);
        mm.precision = precision(c);
        mm.recall = recall(c);
        mm.f1 = f1_score(mm.precision, mm.recall);
        out.push_back(mm);
    }
    return out;
}

std::vector<BoxStats> score_distributions(std::span<const double> scores,
                                          std::span<const double> center_offsets) {
    if (scores.size() != center_offsets.size())
        throw Error(Errc::length_mismatch, "score count does not match offsets");
    if (scores.empty()) return {};
    for (double s : scores)
        if (!std::isfinite(s)) throw Error(Errc::non_finite, "non-finite score");

    std::vector<double> centers(center_offsets.begin(), center_offsets.end());
    std::sort(centers.begin(), centers.end());
    centers.erase(std::unique(centers.begin(), centers.end()), centers.end());

    std::vector<BoxStats> out;
    for (double c : centers) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < scores.size(); ++i)
            if (center_offsets[i] == c) vals.push_back(scores[i]);
        std::sort(vals.begin(), vals.end());

        BoxStats b;
        b.center_offset_s = c;
        b.count = vals.size();
        b.min = vals.front();
        b.max = vals.back();
        b.q1 = quantile_sorted(vals, 0.25);
        b.median = quantile_sorted(vals, 0.5);
        b.q3 = quantile_sorted(vals, 0.75);
        const double iqr = b.q3 - b.q1;
        const double lo_fence = b.q1 - 1.5 * iqr;
        const double hi_fence = b.q3 + 1.5 * iqr;
        b.whisker_lo = *std::find_if(vals.begin(), vals.end(),
                                     [&](double v) { return v >= lo_fence; });
        for (auto it = vals.rbegin(); it != vals.rend(); ++it) {
            if (*it <= hi_fence) {
                b.whisker_hi = *it;
                break;
            }
        }
        out.push_back(b);
    }
    return out;
}

std::string pr_curve_csv(const PrCurve& curve) {
    std::string out = "threshold,precision,recall\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.thresholds.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", curve.thresholds[i],
                      curve.precision[i], curve.recall[i]);
        out += buf;
    }
    return out;
}

std::string f1_sweep_csv(const SweepResult& sweep) {
    std::string out = "threshold,precision,recall,f1\n";
    char buf[64];
    for (const SweepPoint& pt : sweep.points) {
        std::snprintf(buf, sizeof buf, "%.2f", pt.threshold);
        out += buf;
        out += ',' + format_opt(pt.precision) + ',' + format_opt(pt.recall) + ',' +
               format_opt(pt.f1) + '\n';
    }
    return out;
}

std::string box_stats_csv(std::span<const BoxStats> stats) {
    std::string out = "center_offset_s,count,min,whisker_lo,q1,median,q3,whisker_hi,max\n";
    char buf[256];
    for (const BoxStats& b : stats) {
        std::snprintf(buf, sizeof buf, "%.2f,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                      b.center_offset_s, b.count, b.min, b.whisker_lo, b.q1, b.median, b.q3,
                      b.whisker_hi, b.max);
        out += buf;
    }
    return out;
}

} // namespace ovt
