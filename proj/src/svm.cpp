#include "ovt/svm.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"
#include "train_checks.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace ovt {
namespace {

constexpr std::uint64_t kDefaultLinearIters = 1'000'000;
constexpr std::uint64_t kDefaultRbfIters = 100'000'000;
constexpr std::size_t kCacheBudgetBytes = 512ull << 20;

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Lazily computed kernel rows with FIFO eviction under a byte budget.
class KernelCache {
public:
    KernelCache(const Matrix& x, KernelKind kind, double gamma)
        : x_(x), kind_(kind), gamma_(gamma), rows_(x.rows) {
        cap_ = std::max<std::size_t>(2, kCacheBudgetBytes / (sizeof(double) * std::max<std::size_t>(x.rows, 1)));
        if (kind_ == KernelKind::rbf) {
            xsq_.reserve(x.rows);
            for (std::size_t i = 0; i < x.rows; ++i) xsq_.push_back(dot(x.row(i), x.row(i)));
        }
    }

    const std::vector<double>& row(std::size_t i, std::size_t pinned) {
        if (!rows_[i].empty()) return rows_[i];
        while (order_.size() >= cap_) {
            const std::size_t victim = order_.front();
            order_.pop_front();
            if (victim == pinned || victim == i) {
                order_.push_back(victim);
                continue;
            }
            rows_[victim].clear();
            rows_[victim].shrink_to_fit();
        }
        std::vector<double>& r = rows_[i];
        r.resize(x_.rows);
        const std::span<const double> xi = x_.row(i);
        if (kind_ == KernelKind::linear) {
            for (std::size_t j = 0; j < x_.rows; ++j) r[j] = dot(xi, x_.row(j));
        } else {
            for (std::size_t j = 0; j < x_.rows; ++j)
                r[j] = std::exp(-gamma_ * (xsq_[i] + xsq_[j] - 2.0 * dot(xi, x_.row(j))));
        }
        order_.push_back(i);
        return r;
    }

private:
    const Matrix& x_;
    KernelKind kind_;
    double gamma_;
    std::vector<double> xsq_;
    std::size_t cap_;
    std::vector<std::vector<double>> rows_;
    std::deque<std::size_t> order_;
};

double resolve_gamma(const SvmConfig& cfg, const Matrix& x) {
    if (cfg.kernel != KernelKind::rbf) return 0.0;
    if (cfg.gamma) {
        if (*cfg.gamma <= 0.0) throw Error(Errc::invalid_config, "gamma must be positive");
        return *cfg.gamma;
    }
    return default_rbf_gamma(x);
}

std::uint64_t resolve_max_iter(const SvmConfig& cfg) {
    if (cfg.max_iterations != 0) return cfg.max_iterations;
    return cfg.kernel == KernelKind::linear ? kDefaultLinearIters : kDefaultRbfIters;
}

void check_config(const SvmConfig& cfg) {
    if (cfg.c <= 0.0) throw Error(Errc::invalid_config, "c must be positive");
    if (cfg.tol <= 0.0) throw Error(Errc::invalid_config, "tol must be positive");
    if (cfg.platt_folds < 1) throw Error(Errc::invalid_config, "platt_folds must be at least 1");
}

} // namespace

std::string_view kernel_name(KernelKind kind) {
    return kind == KernelKind::linear ? "linear" : "rbf";
}

KernelKind parse_kernel(std::string_view text) {
    if (text == "linear") return KernelKind::linear;
    if (text == "rbf") return KernelKind::rbf;
    throw Error(Errc::invalid_argument, "unknown kernel: " + std::string(text));
}

double default_rbf_gamma(const Matrix& x) {
    if (x.rows == 0 || x.cols == 0) throw Error(Errc::invalid_argument, "empty matrix");
    double total_var = 0.0;
    for (std::size_t c = 0; c < x.cols; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) mean += x.at(r, c);
        mean /= x.rows;
        double var = 0.0;
        for (std::size_t r = 0; r < x.rows; ++r) {
            const double d = x.at(r, c) - mean;
            var += d * d;
        }
        total_var += var / x.rows;
    }
    const double mean_var = total_var / x.cols;
    if (mean_var <= 0.0) return 1.0 / x.cols;
    return 1.0 / (x.cols * mean_var);
}

double kernel_value(KernelKind kind, double gamma, std::span<const double> a,
                    std::span<const double> b) {
    if (a.size() != b.size()) throw Error(Errc::length_mismatch, "kernel operand size mismatch");
    if (kind == KernelKind::linear) return dot(a, b);
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sq += d * d;
    }
    return std::exp(-gamma * sq);
}

SmoResult solve_smo(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg,
                    const SmoObserver& observer) {
    detail::check_training_data(x, y);
    check_config(cfg);
    const std::size_t n = x.rows;
    const double c = cfg.c;
    const double gamma = resolve_gamma(cfg, x);
    const std::uint64_t max_iter = resolve_max_iter(cfg);

    std::vector<signed char> ys(n);
    for (std::size_t i = 0; i < n; ++i) ys[i] = y[i] ? 1 : -1;

    KernelCache cache(x, cfg.kernel, gamma);
    SmoResult res;
    res.alpha.assign(n, 0.0);
    std::vector<double> g(n, -1.0); // dual gradient at alpha = 0

    double m_up = 0.0, m_low = 0.0;
    auto select_pair = [&](std::size_t* out_i, std::size_t* out_j) {
        m_up = -std::numeric_limits<double>::infinity();
        m_low = std::numeric_limits<double>::infinity();
        std::size_t bi = n, bj = n;
        for (std::size_t k = 0; k < n; ++k) {
            const double v = -ys[k] * g[k];
            const bool in_up = ys[k] > 0 ? res.alpha[k] < c : res.alpha[k] > 0.0;
            const bool in_low = ys[k] > 0 ? res.alpha[k] > 0.0 : res.alpha[k] < c;
            if (in_up && v > m_up) {
                m_up = v;
                bi = k;
            }
            if (in_low && v < m_low) {
                m_low = v;
                bj = k;
            }
        }
        *out_i = bi;
        *out_j = bj;
    };

    for (std::uint64_t it = 0; it < max_iter; ++it) {
        std::size_t i, j;
        select_pair(&i, &j);
        if (i >= n || j >= n || m_up - m_low <= cfg.tol) {
            res.converged = true;
            break;
        }
        res.iterations = it + 1;

        const std::vector<double>& ki = cache.row(i, j);
        const std::vector<double>& kj = cache.row(j, i);
        double quad = ki[i] + kj[j] - 2.0 * ki[j];
        if (quad <= 0.0) quad = 1e-12;

        const double old_i = res.alpha[i], old_j = res.alpha[j];
        const double t = (ys[j] * g[j] - ys[i] * g[i]) / quad;
        const double sum = ys[i] * old_i + ys[j] * old_j;
        double ai = old_i + ys[i] * t;
        ai = std::clamp(ai, 0.0, c);
        double aj = ys[j] * (sum - ys[i] * ai);
        aj = std::clamp(aj, 0.0, c);
        ai = ys[i] * (sum - ys[j] * aj);
        res.alpha[i] = ai;
        res.alpha[j] = aj;

        const double di = ai - old_i, dj = aj - old_j;
        for (std::size_t k = 0; k < n; ++k)
            g[k] += ys[k] * (ys[i] * ki[k] * di + ys[j] * kj[k] * dj);

        if (observer) {
            double obj = 0.0;
            for (std::size_t k = 0; k < n; ++k) obj += res.alpha[k] * (g[k] - 1.0);
            observer(res.iterations, 0.5 * obj);
        }
    }

    // Offset from the free support vectors, or the violation midpoint when
    // every alpha sits on a bound.
    std::size_t i, j;
    select_pair(&i, &j);
    double b_sum = 0.0;
    std::size_t b_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (res.alpha[k] > 0.0 && res.alpha[k] < c) {
            b_sum += -ys[k] * g[k];
            ++b_count;
        }
    }
    if (b_count > 0)
        res.bias = b_sum / b_count;
    else if (std::isfinite(m_up) && std::isfinite(m_low))
        res.bias = (m_up + m_low) / 2.0;
    return res;
}

std::pair<double, double> fit_platt(const std::vector<double>& deci, const std::vector<int>& y) {
    if (deci.size() != y.size())
        throw Error(Errc::length_mismatch, "decision value count does not match labels");
    std::size_t prior1 = 0;
    for (int v : y) prior1 += v ? 1 : 0;
    const std::size_t prior0 = y.size() - prior1;
    if (prior0 == 0 || prior1 == 0) return {-1.0, 0.0};

    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) t[i] = y[i] ? hi : lo;

    auto nll = [&](double a, double b) {
        double f = 0.0;
        for (std::size_t i = 0; i < deci.size(); ++i) {
            const double fab = deci[i] * a + b;
            if (fab >= 0.0)
                f += t[i] * fab + std::log1p(std::exp(-fab));
            else
                f += (t[i] - 1.0) * fab + std::log1p(std::exp(fab));
        }
        return f;
    };

    double a = 0.0;
    double b = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = nll(a, b);
    constexpr double kSigma = 1e-12, kEps = 1e-5, kMinStep = 1e-10;
    for (int it = 0; it < 100; ++it) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < deci.size(); ++i) {
            const double fab = deci[i] * a + b;
            double p, q;
            if (fab >= 0.0) {
                p = std::exp(-fab) / (1.0 + std::exp(-fab));
                q = 1.0 / (1.0 + std::exp(-fab));
            } else {
                p = 1.0 / (1.0 + std::exp(fab));
                q = std::exp(fab) / (1.0 + std::exp(fab));
            }
            const double d2 = p * q;
            h11 += deci[i] * deci[i] * d2;
            h22 += d2;
            h21 += deci[i] * d2;
            const double d1 = t[i] - p;
            g1 += deci[i] * d1;
            g2 += d1;
        }
        if (std::fabs(g1) < kEps && std::fabs(g2) < kEps) break;
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double db = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * db;
        double step = 1.0;
        while (step >= kMinStep) {
            const double na = a + step * da, nb = b + step * db;
            const double nf = nll(na, nb);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                b = nb;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep) break;
    }
    return {a, b};
}

double SvmModel::decision_value(std::span<const double> x) const {
    if (x.size() != support_vectors.cols)
        throw Error(Errc::length_mismatch, "feature vector size mismatch");
    double f = bias;
    for (std::size_t i = 0; i < support_vectors.rows; ++i)
        f += coeffs[i] * kernel_value(kernel, gamma, support_vectors.row(i), x);
    return f;
}

double SvmModel::predict_proba(std::span<const double> x) const {
    const double fab = platt_a * decision_value(x) + platt_b;
    if (fab >= 0.0) return std::exp(-fab) / (1.0 + std::exp(-fab));
    return 1.0 / (1.0 + std::exp(fab));
}

std::vector<double> SvmModel::predict_proba(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out.push_back(predict_proba(x.row(i)));
    return out;
}

SvmModel train_svm(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg) {
    detail::check_training_data(x, y);
    check_config(cfg);
    const std::size_t n = x.rows;
    const double gamma = resolve_gamma(cfg, x);
    SvmConfig resolved = cfg;
    if (cfg.kernel == KernelKind::rbf) resolved.gamma = gamma;

    // Calibration targets come from decision values the final model never
    // trained on; folds are stratified so each holds both classes when the
    // data allows it.
    std::size_t n0 = 0, n1 = 0;
    for (int v : y) (v ? n1 : n0) += 1;
    int folds = std::min<std::size_t>(cfg.platt_folds, std::min(n0, n1));
    std::vector<double> cal_deci;
    std::vector<int> cal_y;
    if (folds >= 2) {
        std::vector<std::size_t> by_class[2];
        for (std::size_t i = 0; i < n; ++i) by_class[y[i] ? 1 : 0].push_back(i);
        Rng rng(derive_seed(cfg.seed, "platt"));
        rng.shuffle(by_class[0]);
        rng.shuffle(by_class[1]);
        std::vector<int> fold_of(n);
        for (int cls = 0; cls < 2; ++cls)
            for (std::size_t i = 0; i < by_class[cls].size(); ++i)
                fold_of[by_class[cls][i]] = static_cast<int>(i % folds);

        for (int f = 0; f < folds; ++f) {
            Matrix xt;
            std::vector<int> yt;
            std::vector<std::size_t> held;
            xt.cols = x.cols;
            for (std::size_t i = 0; i < n; ++i) {
                if (fold_of[i] == f) {
                    held.push_back(i);
                    continue;
                }
                const std::span<const double> r = x.row(i);
                xt.data.insert(xt.data.end(), r.begin(), r.end());
                yt.push_back(y[i]);
                ++xt.rows;
            }
            const SmoResult sub = solve_smo(xt, yt, resolved);
            // score held-out rows with the fold solution
            std::vector<std::size_t> sv;
            for (std::size_t i = 0; i < xt.rows; ++i)
                if (sub.alpha[i] > 0.0) sv.push_back(i);
            for (std::size_t i : held) {
                double fx = sub.bias;
                for (std::size_t s : sv)
                    fx += (yt[s] ? 1.0 : -1.0) * sub.alpha[s] *
                          kernel_value(cfg.kernel, gamma, xt.row(s), x.row(i));
                cal_deci.push_back(fx);
                cal_y.push_back(y[i]);
            }
        }
    }

    const SmoResult full = solve_smo(x, y, resolved);
    SvmModel model;
    model.kernel = cfg.kernel;
    model.gamma = gamma;
    model.bias = full.bias;
    model.converged = full.converged;
    model.iterations = full.iterations;
    model.support_vectors.cols = x.cols;
    for (std::size_t i = 0; i < n; ++i) {
        if (full.alpha[i] <= 0.0) continue;
        const std::span<const double> r = x.row(i);
        model.support_vectors.data.insert(model.support_vectors.data.end(), r.begin(), r.end());
        ++model.support_vectors.rows;
        model.coeffs.push_back((y[i] ? 1.0 : -1.0) * full.alpha[i]);
    }

    if (folds < 2) {
        cal_deci.clear();
        cal_y = y;
        for (std::size_t i = 0; i < n; ++i) cal_deci.push_back(model.decision_value(x.row(i)));
    }
    const auto [pa, pb] = fit_platt(cal_deci, cal_y);
    model.platt_a = pa;
    model.platt_b = pb;
    return model;
}

std::string serialize_svm(const SvmModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "svm-v1";
    j["kernel"] = std::string(kernel_name(m.kernel));
    j["gamma"] = m.gamma;
    j["sv_rows"] = m.support_vectors.rows;
    j["sv_cols"] = m.support_vectors.cols;
    j["sv_data"] = m.support_vectors.data;
    j["coeffs"] = m.coeffs;
    j["bias"] = m.bias;
    j["platt_a"] = m.platt_a;
    j["platt_b"] = m.platt_b;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    return j.dump() + "\n";
}

SvmModel parse_svm(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "svm-v1")
        throw Error(Errc::bad_format, "not an svm-v1 document");
    try {
        SvmModel m;
        m.kernel = parse_kernel(j.at("kernel").get<std::string>());
        m.gamma = j.at("gamma").get<double>();
        m.support_vectors.rows = j.at("sv_rows").get<std::size_t>();
        m.support_vectors.cols = j.at("sv_cols").get<std::size_t>();
        m.support_vectors.data = j.at("sv_data").get<std::vector<double>>();
        m.coeffs = j.at("coeffs").get<std::vector<double>>();
        m.bias = j.at("bias").get<double>();
        m.platt_a = j.at("platt_a").get<double>();
        m.platt_b = j.at("platt_b").get<double>();
        m.converged = j.at("converged").get<bool>();
        m.iterations = j.at("iterations").get<std::uint64_t>();
        if (m.support_vectors.data.size() != m.support_vectors.rows * m.support_vectors.cols ||
            m.coeffs.size() != m.support_vectors.rows || m.support_vectors.rows == 0)
            throw Error(Errc::bad_format, "inconsistent svm dimensions");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("bad svm document: ") + e.what());
    }
}

} // namespace ovt
