#include "ovt/mlp.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"
#include "train_checks.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace ovt {
namespace {

constexpr double kProbFloor = 1e-12;

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

std::size_t mlp_param_count(int inputs, int hidden) {
    return static_cast<std::size_t>(hidden) * inputs + 2 * static_cast<std::size_t>(hidden) + 1;
}

std::vector<double> mlp_pack(const MlpModel& m) {
    std::vector<double> p;
    p.reserve(mlp_param_count(m.inputs, m.hidden));
    p.insert(p.end(), m.w1.begin(), m.w1.end());
    p.insert(p.end(), m.b1.begin(), m.b1.end());
    p.insert(p.end(), m.w2.begin(), m.w2.end());
    p.push_back(m.b2);
    return p;
}

void mlp_unpack(std::span<const double> params, MlpModel* m) {
    if (params.size() != mlp_param_count(m->inputs, m->hidden))
        throw Error(Errc::length_mismatch, "packed parameter size mismatch");
    const std::size_t w1n = static_cast<std::size_t>(m->hidden) * m->inputs;
    m->w1.assign(params.begin(), params.begin() + w1n);
    m->b1.assign(params.begin() + w1n, params.begin() + w1n + m->hidden);
    m->w2.assign(params.begin() + w1n + m->hidden, params.begin() + w1n + 2 * m->hidden);
    m->b2 = params.back();
}

double MlpModel::predict_proba(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(inputs))
        throw Error(Errc::length_mismatch, "feature vector size mismatch");
    double z2 = b2;
    for (int j = 0; j < hidden; ++j) {
        double z1 = b1[j];
        const double* w = &w1[static_cast<std::size_t>(j) * inputs];
        for (int k = 0; k < inputs; ++k) z1 += w[k] * x[k];
        if (z1 > 0.0) z2 += w2[j] * z1;
    }
    return std::clamp(sigmoid(z2), kProbFloor, 1.0 - kProbFloor);
}

std::vector<double> MlpModel::predict_proba(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out.push_back(predict_proba(x.row(i)));
    return out;
}

double mlp_loss_grad(const MlpModel& m, const Matrix& x, const std::vector<int>& y,
                     std::vector<double>* grad) {
    if (x.cols != static_cast<std::size_t>(m.inputs))
        throw Error(Errc::length_mismatch, "feature width mismatch");
    if (x.rows != y.size())
        throw Error(Errc::length_mismatch, "label count does not match row count");
    const std::size_t n = x.rows;
    const int h = m.hidden, d = m.inputs;
    if (grad) grad->assign(mlp_param_count(d, h), 0.0);

    double loss = 0.0;
    std::vector<double> a1(h);
    for (std::size_t i = 0; i < n; ++i) {
        const std::span<const double> xi = x.row(i);
        double z2 = m.b2;
        for (int j = 0; j < h; ++j) {
            double z1 = m.b1[j];
            const double* w = &m.w1[static_cast<std::size_t>(j) * d];
            for (int k = 0; k < d; ++k) z1 += w[k] * xi[k];
            a1[j] = z1 > 0.0 ? z1 : 0.0;
            z2 += m.w2[j] * a1[j];
        }
        // log loss straight from the logit; computing 1 - p first would
        // round the saturated tail away
        loss += z2 >= 0.0 ? (y[i] ? 0.0 : z2) + std::log1p(std::exp(-z2))
                          : (y[i] ? -z2 : 0.0) + std::log1p(std::exp(z2));
        if (!grad) continue;

        const double p = sigmoid(z2);

        const double dz2 = (p - y[i]) / n;
        double* gw1 = grad->data();
        double* gb1 = gw1 + static_cast<std::size_t>(h) * d;
        double* gw2 = gb1 + h;
        for (int j = 0; j < h; ++j) {
            gw2[j] += dz2 * a1[j];
            if (a1[j] > 0.0) {
                const double dz1 = dz2 * m.w2[j];
                double* gw = gw1 + static_cast<std::size_t>(j) * d;
                for (int k = 0; k < d; ++k) gw[k] += dz1 * xi[k];
                gb1[j] += dz1;
            }
        }
        grad->back() += dz2;
    }
    return loss / n;
}

MlpModel train_mlp(const Matrix& x, const std::vector<int>& y, const MlpConfig& cfg) {
    detail::check_training_data(x, y);
    if (cfg.hidden_units <= 0) throw Error(Errc::invalid_config, "hidden_units must be positive");
    if (cfg.grad_tol <= 0.0) throw Error(Errc::invalid_config, "grad_tol must be positive");

    MlpModel m;
    m.inputs = static_cast<int>(x.cols);
    m.hidden = cfg.hidden_units;
    Rng rng(cfg.seed);
    const double lim1 = std::sqrt(6.0 / (m.inputs + m.hidden));
    const double lim2 = std::sqrt(6.0 / (m.hidden + 1));
    m.w1.resize(static_cast<std::size_t>(m.hidden) * m.inputs);
    for (double& w : m.w1) w = rng.uniform(-lim1, lim1);
    m.b1.assign(m.hidden, 0.0);
    m.w2.resize(m.hidden);
    for (double& w : m.w2) w = rng.uniform(-lim2, lim2);
    m.b2 = 0.0;

    // Limited-memory quasi-Newton steps with Armijo backtracking on the
    // full-batch loss.
    const std::size_t mem = 10;
    std::deque<std::vector<double>> hist_s, hist_y;
    std::deque<double> hist_rho;

    std::vector<double> theta = mlp_pack(m);
    const std::size_t np = theta.size();
    std::vector<double> g(np), g_new(np), dir(np), trial(np), q(np);
    double f = mlp_loss_grad(m, x, y, &g);

    auto inf_norm = [](const std::vector<double>& v) {
        double n = 0.0;
        for (double a : v) n = std::max(n, std::fabs(a));
        return n;
    };
    auto dot = [](const std::vector<double>& a, const std::vector<double>& b) {
        double s = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
        return s;
    };

    for (std::uint64_t it = 0; it < cfg.max_iterations; ++it) {
        if (inf_norm(g) <= cfg.grad_tol) {
            m.converged = true;
            break;
        }
        m.iterations = it + 1;

        // Two-loop recursion; falls back to steepest descent with an empty
        // history.
        q = g;
        std::vector<double> alpha(hist_s.size());
        for (std::size_t i = hist_s.size(); i-- > 0;) {
            alpha[i] = hist_rho[i] * dot(hist_s[i], q);
            for (std::size_t k = 0; k < np; ++k) q[k] -= alpha[i] * hist_y[i][k];
        }
        if (!hist_s.empty()) {
            const double gamma =
                dot(hist_s.back(), hist_y.back()) / dot(hist_y.back(), hist_y.back());
            for (double& v : q) v *= gamma;
        }
        for (std::size_t i = 0; i < hist_s.size(); ++i) {
            const double beta = hist_rho[i] * dot(hist_y[i], q);
            for (std::size_t k = 0; k < np; ++k) q[k] += (alpha[i] - beta) * hist_s[i][k];
        }
        for (std::size_t k = 0; k < np; ++k) dir[k] = -q[k];

        double slope = dot(g, dir);
        if (slope >= 0.0) { // not a descent direction, reset
            hist_s.clear();
            hist_y.clear();
            hist_rho.clear();
            for (std::size_t k = 0; k < np; ++k) dir[k] = -g[k];
            slope = dot(g, dir);
        }

        double step = 1.0;
        double f_new = f;
        bool accepted = false;
        for (int bt = 0; bt < 60; ++bt) {
            for (std::size_t k = 0; k < np; ++k) trial[k] = theta[k] + step * dir[k];
            mlp_unpack(trial, &m);
            f_new = mlp_loss_grad(m, x, y, nullptr);
            if (f_new <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break; // no step passes Armijo, the search is done

        mlp_unpack(trial, &m);
        f_new = mlp_loss_grad(m, x, y, &g_new);
        std::vector<double> s(np), yv(np);
        for (std::size_t k = 0; k < np; ++k) {
            s[k] = trial[k] - theta[k];
            yv[k] = g_new[k] - g[k];
        }
        const double sy = dot(s, yv);
        if (sy > 1e-10 * std::sqrt(dot(s, s)) * std::sqrt(dot(yv, yv))) {
            hist_s.push_back(std::move(s));
            hist_y.push_back(std::move(yv));
            hist_rho.push_back(1.0 / sy);
            if (hist_s.size() > mem) {
                hist_s.pop_front();
                hist_y.pop_front();
                hist_rho.pop_front();
            }
        }
        theta = trial;
        f = f_new;
        g = g_new;
    }

    mlp_unpack(theta, &m);
    if (!m.converged) {
        std::vector<double> gf(np);
        mlp_loss_grad(m, x, y, &gf);
        m.converged = inf_norm(gf) <= cfg.grad_tol;
    }
    return m;
}

std::string serialize_mlp(const MlpModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "mlp-v1";
    j["inputs"] = m.inputs;
    j["hidden"] = m.hidden;
    j["w1"] = m.w1;
    j["b1"] = m.b1;
    j["w2"] = m.w2;
    j["b2"] = m.b2;
    j["converged"] = m.converged;
    j["iterations"] = m.iterations;
    return j.dump(2) + "\n";
}

MlpModel parse_mlp(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "mlp-v1")
        throw Error(Errc::bad_format, "not an mlp-v1 document");
    try {
        MlpModel m;
        m.inputs = j.at("inputs").get<int>();
        m.hidden = j.at("hidden").get<int>();
        m.w1 = j.at("w1").get<std::vector<double>>();
        m.b1 = j.at("b1").get<std::vector<double>>();
        m.w2 = j.at("w2").get<std::vector<double>>();
        m.b2 = j.at("b2").get<double>();
        m.converged = j.at("converged").get<bool>();
        m.iterations = j.at("iterations").get<std::uint64_t>();
        if (m.inputs <= 0 || m.hidden <= 0 ||
            m.w1.size() != static_cast<std::size_t>(m.hidden) * m.inputs ||
            m.b1.size() != static_cast<std::size_t>(m.hidden) ||
            m.w2.size() != static_cast<std::size_t>(m.hidden))
            throw Error(Errc::bad_format, "inconsistent mlp dimensions");
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("bad mlp document: ") + e.what());
    }
}

} // namespace ovt
