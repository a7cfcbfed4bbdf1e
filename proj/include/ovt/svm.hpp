#pragma once

#include "ovt/matrix.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovt {

enum class KernelKind { linear, rbf };

std::string_view kernel_name(KernelKind kind);
KernelKind parse_kernel(std::string_view text);

struct SvmConfig {
    double c = 1.0;
    KernelKind kernel = KernelKind::linear;
    std::optional<double> gamma;      // rbf width; unset picks default_rbf_gamma
    double tol = 1e-3;                // working-pair violation threshold
    std::uint64_t max_iterations = 0; // 0 picks 1e6 (linear) or 1e8 (rbf)
    std::uint64_t seed = 0;           // calibration fold shuffling only
    int platt_folds = 5;              // 1 fits the calibration in-sample
};

// 1 / (feature count * mean per-feature population variance); falls back to
// 1 / feature count when the data is constant.
double default_rbf_gamma(const Matrix& x);

double kernel_value(KernelKind kind, double gamma, std::span<const double> a,
                    std::span<const double> b);

// Box-constrained dual solution. alpha is per training row; iterations
// counts working-pair updates.
struct SmoResult {
    std::vector<double> alpha;
    double bias = 0.0;
    bool converged = false;
    std::uint64_t iterations = 0;
};

using SmoObserver = std::function<void(std::uint64_t iteration, double dual_objective)>;

// Pairwise coordinate descent on the dual, always updating the maximal
// violating pair; stops when the worst KKT violation drops to cfg.tol.
// The observer, when set, sees the dual objective after every update.
SmoResult solve_smo(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg,
                    const SmoObserver& observer = {});

struct SvmModel {
    KernelKind kernel = KernelKind::linear;
    double gamma = 0.0;
    Matrix support_vectors;
    std::vector<double> coeffs; // label-signed alphas, aligned with SV rows
    double bias = 0.0;
    double platt_a = -1.0;
    double platt_b = 0.0;
    bool converged = true;
    std::uint64_t iterations = 0;

    double decision_value(std::span<const double> x) const;
    double predict_proba(std::span<const double> x) const;
    std::vector<double> predict_proba(const Matrix& x) const;
};

// Sigmoid map from decision values to probabilities, fitted by Newton
// steps with backtracking on the regularized target log-loss. Returns
// (a, b) for P(y=1|f) = 1 / (1 + exp(a*f + b)).
std::pair<double, double> fit_platt(const std::vector<double>& decision_values,
                                    const std::vector<int>& y);

// Full fit: cross-validated decision values feed the calibrator, then the
// final dual solve runs on all rows. Non-convergence within the iteration
// budget is reported through the model flag, not an error.
SvmModel train_svm(const Matrix& x, const std::vector<int>& y, const SvmConfig& cfg);

std::string serialize_svm(const SvmModel& model);
SvmModel parse_svm(std::string_view json_text);

} // namespace ovt
