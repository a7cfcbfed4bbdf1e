#include "doctest.h"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"
#include "ovt/svm.hpp"

#include "json.hpp"

#include <cmath>
#include <string>
#include <vector>

using namespace ovt;

namespace {

// Two Gaussian blobs; spread controls how much the classes overlap.
void make_blobs(Rng& rng, std::size_t per_class, std::size_t d, double spread, Matrix* x,
                std::vector<int>* y) {
    *x = Matrix(2 * per_class, d);
    y->assign(2 * per_class, 0);
    for (std::size_t i = 0; i < 2 * per_class; ++i) {
        const int label = static_cast<int>(i % 2);
        (*y)[i] = label;
        const double center = label ? 1.0 : -1.0;
        for (std::size_t k = 0; k < d; ++k) x->at(i, k) = center + spread * rng.normal();
    }
}

// Worst working-pair violation, recomputed from alpha with fresh kernel
// evaluations.
double kkt_gap(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg,
               const std::vector<double>& alpha) {
    const std::size_t n = x.rows;
    const double gamma = cfg.kernel == KernelKind::rbf
                             ? (cfg.gamma ? *cfg.gamma : default_rbf_gamma(x))
                             : 0.0;
    double m_up = -1e300, m_low = 1e300;
    for (std::size_t k = 0; k < n; ++k) {
        const double yk = y[k] ? 1.0 : -1.0;
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            sum += alpha[j] * (y[j] ? 1.0 : -1.0) *
                   kernel_value(cfg.kernel, gamma, x.row(k), x.row(j));
        const double grad = yk * sum - 1.0;
        const double v = -yk * grad;
        const bool in_up = y[k] ? alpha[k] < cfg.c : alpha[k] > 0.0;
        const bool in_low = y[k] ? alpha[k] > 0.0 : alpha[k] < cfg.c;
        if (in_up) m_up = std::max(m_up, v);
        if (in_low) m_low = std::min(m_low, v);
    }
    return m_up - m_low;
}

} // namespace

TEST_CASE("two opposite points solve in closed form") {
    Matrix x(2, 2);
    x.at(0, 0) = -1.0;
    x.at(1, 0) = 1.0;
    const std::vector<int> y = {0, 1};

    SvmConfig cfg;
    const SmoResult r = solve_smo(x, y, cfg);
    CHECK(r.converged);
    CHECK(r.iterations == 1);
    CHECK(r.alpha[0] == 0.5);
    CHECK(r.alpha[1] == 0.5);
    CHECK(r.bias == 0.0);

    const SvmModel model = train_svm(x, y, cfg);
    CHECK(model.decision_value(std::vector<double>{1.0, 0.0}) == 1.0);
    CHECK(model.decision_value(std::vector<double>{-1.0, 0.0}) == -1.0);
    CHECK(model.decision_value(std::vector<double>{0.0, 0.0}) == 0.0);
    REQUIRE(model.support_vectors.rows == 2);

    // in-sample calibration here (one point per class): symmetric and
    // monotone the right way around
    const double p1 = model.predict_proba(std::vector<double>{1.0, 0.0});
    const double p0 = model.predict_proba(std::vector<double>{-1.0, 0.0});
    CHECK(p1 > 0.6);
    CHECK(p0 < 0.4);
    CHECK(p0 + p1 == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("the dual objective never moves backward") {
    Rng rng(700);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 25, 3, 0.9, &x, &y);

    std::vector<double> objectives;
    std::vector<std::uint64_t> iterations;
    SvmConfig cfg;
    const SmoResult r = solve_smo(x, y, cfg, [&](std::uint64_t it, double obj) {
        iterations.push_back(it);
        objectives.push_back(obj);
    });
    CHECK(r.converged);
    REQUIRE(iterations.size() == r.iterations);
    for (std::size_t i = 0; i < iterations.size(); ++i) CHECK(iterations[i] == i + 1);
    for (std::size_t i = 1; i < objectives.size(); ++i)
        CHECK(objectives[i] <= objectives[i - 1] + 1e-9);
}

TEST_CASE("solutions satisfy the stopping rule under independent recount") {
    Rng rng(701);
    for (KernelKind kernel : {KernelKind::linear, KernelKind::rbf}) {
        Matrix x;
        std::vector<int> y;
        make_blobs(rng, 20, 3, 1.1, &x, &y);

        SvmConfig cfg;
        cfg.kernel = kernel;
        const SmoResult r = solve_smo(x, y, cfg);
        REQUIRE(r.converged);

        for (double a : r.alpha) {
            CHECK(a >= 0.0);
            CHECK(a <= cfg.c);
        }
        double imbalance = 0.0;
        for (std::size_t i = 0; i < y.size(); ++i)
            imbalance += (y[i] ? 1.0 : -1.0) * r.alpha[i];
        CHECK(std::fabs(imbalance) < 1e-10);
        CHECK(kkt_gap(x, y, cfg, r.alpha) <= cfg.tol + 1e-9);
    }
}

TEST_CASE("a linear kernel cannot fit xor but rbf can") {
    Rng rng(702);
    const std::size_t per_cluster = 10;
    Matrix x(4 * per_cluster, 2);
    std::vector<int> y(4 * per_cluster);
    std::size_t row = 0;
    for (double cx : {-1.0, 1.0})
        for (double cy : {-1.0, 1.0})
            for (std::size_t i = 0; i < per_cluster; ++i, ++row) {
                x.at(row, 0) = cx + 0.15 * rng.normal();
                x.at(row, 1) = cy + 0.15 * rng.normal();
                y[row] = cx * cy > 0.0 ? 1 : 0;
            }

    SvmConfig cfg;
    cfg.c = 10.0;
    const SvmModel linear = train_svm(x, y, cfg);
    cfg.kernel = KernelKind::rbf;
    cfg.gamma = 1.0;
    const SvmModel rbf = train_svm(x, y, cfg);

    std::size_t linear_ok = 0, rbf_ok = 0;
    for (std::size_t i = 0; i < x.rows; ++i) {
        if ((linear.decision_value(x.row(i)) > 0.0 ? 1 : 0) == y[i]) ++linear_ok;
        if ((rbf.decision_value(x.row(i)) > 0.0 ? 1 : 0) == y[i]) ++rbf_ok;
    }
    CHECK(linear_ok <= 32); // a hyperplane caps out at three of the four corners
    CHECK(rbf_ok >= 38);
    CHECK(rbf_ok > linear_ok);
}

TEST_CASE("calibration recovers a known sigmoid from scored samples") {
    Rng rng(703);
    const double true_a = -2.0, true_b = 0.3;
    std::vector<double> deci;
    std::vector<int> y;
    for (int i = 0; i < 2000; ++i) {
        const double f = rng.uniform(-4.0, 4.0);
        const double p = 1.0 / (1.0 + std::exp(true_a * f + true_b));
        deci.push_back(f);
        y.push_back(rng.bernoulli(p) ? 1 : 0);
    }
    const auto [a, b] = fit_platt(deci, y);
    CHECK(a < 0.0);
    CHECK(std::fabs(a - true_a) < 0.2);
    CHECK(std::fabs(b - true_b) < 0.2);
}

TEST_CASE("calibration with one class present falls back to a fixed slope") {
    const auto [a, b] = fit_platt({0.5, 1.5, 2.5}, {1, 1, 1});
    CHECK(a == -1.0);
    CHECK(b == 0.0);
    const auto [a0, b0] = fit_platt({-0.5, -1.5}, {0, 0});
    CHECK(a0 == -1.0);
    CHECK(b0 == 0.0);
    CHECK_THROWS_AS(fit_platt({0.5}, {1, 0}), Error);
}

TEST_CASE("probabilities apply the fitted sigmoid to the decision value") {
    Rng rng(704);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 15, 2, 0.7, &x, &y);
    const SvmModel model = train_svm(x, y, SvmConfig{});

    for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> probe = {rng.uniform(-3.0, 3.0), rng.uniform(-3.0, 3.0)};
        const double f = model.decision_value(probe);
        const double fab = model.platt_a * f + model.platt_b;
        const double expect =
            fab >= 0.0 ? std::exp(-fab) / (1.0 + std::exp(-fab)) : 1.0 / (1.0 + std::exp(fab));
        CHECK(model.predict_proba(probe) == expect);
    }
    // higher decision value means higher probability
    CHECK(model.platt_a < 0.0);
}

TEST_CASE("the default rbf width follows the feature variance") {
    Matrix x(2, 2);
    x.at(1, 0) = 2.0;
    x.at(1, 1) = 2.0;
    CHECK(default_rbf_gamma(x) == doctest::Approx(0.5).epsilon(1e-15));

    Matrix narrow(2, 1);
    narrow.at(1, 0) = 4.0;
    CHECK(default_rbf_gamma(narrow) == doctest::Approx(0.25).epsilon(1e-15));

    Matrix constant(3, 2, 1.0);
    CHECK(default_rbf_gamma(constant) == 0.5); // falls back to 1 / feature count

    CHECK_THROWS_AS(default_rbf_gamma(Matrix()), Error);
}

TEST_CASE("kernel values and names") {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    const std::vector<double> b = {4.0, 0.0, -1.0};
    CHECK(kernel_value(KernelKind::linear, 0.0, a, b) == 1.0);
    const std::vector<double> p = {0.0, 0.0};
    const std::vector<double> q = {1.0, 1.0};
    CHECK(kernel_value(KernelKind::rbf, 0.5, p, q) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    CHECK(kernel_value(KernelKind::rbf, 0.5, p, p) == 1.0);
    CHECK_THROWS_AS(kernel_value(KernelKind::linear, 0.0, a, p), Error);

    CHECK(kernel_name(KernelKind::linear) == "linear");
    CHECK(kernel_name(KernelKind::rbf) == "rbf");
    CHECK(parse_kernel("linear") == KernelKind::linear);
    CHECK(parse_kernel("rbf") == KernelKind::rbf);
    CHECK_THROWS_AS(parse_kernel("poly"), Error);
}

TEST_CASE("an exhausted iteration budget flags instead of throwing") {
    Rng rng(705);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 20, 3, 1.2, &x, &y);

    SvmConfig cfg;
    cfg.max_iterations = 1;
    const SmoResult r = solve_smo(x, y, cfg);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 1);

    const SvmModel model = train_svm(x, y, cfg);
    CHECK_FALSE(model.converged);
    const double p = model.predict_proba(std::vector<double>{0.0, 0.0, 0.0});
    CHECK(std::isfinite(p));
}

TEST_CASE("calibration folds shrink to the rarer class") {
    Rng rng(706);
    Matrix x(40, 2);
    std::vector<int> y(40, 0);
    for (std::size_t i = 0; i < 40; ++i) {
        const int label = i < 3 ? 1 : 0;
        y[i] = label;
        for (std::size_t k = 0; k < 2; ++k)
            x.at(i, k) = (label ? 1.5 : -1.5) + 0.5 * rng.normal();
    }
    SvmConfig cfg; // platt_folds 5, but only 3 positives exist
    const SvmModel model = train_svm(x, y, cfg);
    CHECK(std::isfinite(model.platt_a));
    CHECK(std::isfinite(model.platt_b));

    cfg.platt_folds = 1; // explicit in-sample calibration
    const SvmModel in_sample = train_svm(x, y, cfg);
    CHECK(std::isfinite(in_sample.platt_a));
}

TEST_CASE("the separating direction points between the blobs") {
    Rng rng(707);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 30, 2, 0.4, &x, &y);
    const SvmModel model = train_svm(x, y, SvmConfig{});

    double w[2] = {0.0, 0.0};
    for (std::size_t i = 0; i < model.support_vectors.rows; ++i) {
        w[0] += model.coeffs[i] * model.support_vectors.at(i, 0);
        w[1] += model.coeffs[i] * model.support_vectors.at(i, 1);
    }
    const double norm = std::sqrt(w[0] * w[0] + w[1] * w[1]);
    const double cosine = (w[0] + w[1]) / (norm * std::sqrt(2.0));
    CHECK(cosine > 0.99);
}

TEST_CASE("svm snapshots round trip through json") {
    Rng rng(708);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 12, 3, 0.8, &x, &y);
    SvmConfig cfg;
    cfg.kernel = KernelKind::rbf;
    const SvmModel model = train_svm(x, y, cfg);

    const std::string text = serialize_svm(model);
    const SvmModel back = parse_svm(text);
    CHECK(back.kernel == model.kernel);
    CHECK(back.gamma == model.gamma);
    CHECK(back.support_vectors.rows == model.support_vectors.rows);
    CHECK(back.support_vectors.data == model.support_vectors.data);
    CHECK(back.coeffs == model.coeffs);
    CHECK(back.bias == model.bias);
    CHECK(back.platt_a == model.platt_a);
    CHECK(back.platt_b == model.platt_b);
    CHECK(back.converged == model.converged);
    CHECK(back.iterations == model.iterations);
    for (int trial = 0; trial < 10; ++trial) {
        const std::vector<double> probe = {rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0),
                                           rng.uniform(-2.0, 2.0)};
        CHECK(back.predict_proba(probe) == model.predict_proba(probe));
    }

    CHECK_THROWS_AS(parse_svm("nope"), Error);
    CHECK_THROWS_AS(parse_svm("{\"format\":\"other\"}"), Error);
    nlohmann::json j = nlohmann::json::parse(text);
    j["coeffs"].erase(0);
    try {
        parse_svm(j.dump());
        FAIL("expected shape error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::bad_format);
    }
}

TEST_CASE("svm training rejects malformed data and configs") {
    Rng rng(709);
    Matrix x;
    std::vector<int> y;
    make_blobs(rng, 8, 2, 0.5, &x, &y);

    SvmConfig cfg;
    cfg.c = 0.0;
    CHECK_THROWS_AS(train_svm(x, y, cfg), Error);
    cfg.c = 1.0;
    cfg.tol = 0.0;
    CHECK_THROWS_AS(train_svm(x, y, cfg), Error);
    cfg.tol = 1e-3;
    cfg.platt_folds = 0;
    CHECK_THROWS_AS(train_svm(x, y, cfg), Error);
    cfg.platt_folds = 5;
    cfg.kernel = KernelKind::rbf;
    cfg.gamma = -1.0;
    CHECK_THROWS_AS(train_svm(x, y, cfg), Error);

    try {
        solve_smo(x, std::vector<int>(16, 0), SvmConfig{});
        FAIL("expected single-class error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::single_class);
    }

    const SvmModel model = train_svm(x, y, SvmConfig{});
    CHECK_THROWS_AS(model.decision_value(std::vector<double>{1.0}), Error);
}
