#pragma once

#include "ovt/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovt {

struct MlpConfig {
    int hidden_units = 10;
    std::uint64_t max_iterations = 1'000'000;
    double grad_tol = 1e-6; // infinity norm of the mean-loss gradient
    std::uint64_t seed = 0;
};

// One hidden ReLU layer feeding a sigmoid output. Trained full-batch on
// mean binary cross-entropy.
struct MlpModel {
    int inputs = 0;
    int hidden = 0;
    std::vector<double> w1; // hidden x inputs, row-major
    std::vector<double> b1; // hidden
    std::vector<double> w2; // hidden
    double b2 = 0.0;
    bool converged = false;
    std::uint64_t iterations = 0;

    double predict_proba(std::span<const double> x) const;
    std::vector<double> predict_proba(const Matrix& x) const;
};

// Parameters travel through the optimizer as one flat vector laid out as
// (w1, b1, w2, b2).
std::size_t mlp_param_count(int inputs, int hidden);
std::vector<double> mlp_pack(const MlpModel& model);
void mlp_unpack(std::span<const double> params, MlpModel* model);

// Mean cross-entropy over the batch; when grad is non-null it receives the
// gradient in packed layout.
double mlp_loss_grad(const MlpModel& model, const Matrix& x, const std::vector<int>& y,
                     std::vector<double>* grad);

MlpModel train_mlp(const Matrix& x, const std::vector<int>& y, const MlpConfig& cfg);

std::string serialize_mlp(const MlpModel& model);
MlpModel parse_mlp(std::string_view json_text);

} // namespace ovt
