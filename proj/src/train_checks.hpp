#pragma once

#include "ovt/errors.hpp"
#include "ovt/matrix.hpp"

#include <cmath>
#include <vector>

namespace ovt::detail {

// Shared entry checks for the binary trainers: finite features, labels in
// {0,1}, both classes present.
inline void check_training_data(const Matrix& x, const std::vector<int>& y) {
    if (x.rows == 0 || x.cols == 0) throw Error(Errc::invalid_argument, "empty training matrix");
    if (x.rows != y.size())
        throw Error(Errc::length_mismatch, "label count does not match row count");
    for (double v : x.data)
        if (!std::isfinite(v)) throw Error(Errc::non_finite, "non-finite feature value");
    bool has0 = false, has1 = false;
    for (int label : y) {
        if (label == 0) has0 = true;
        else if (label == 1) has1 = true;
        else throw Error(Errc::invalid_argument, "labels must be 0 or 1");
    }
    if (!has0 || !has1) throw Error(Errc::single_class, "training data has a single class");
}

} // namespace ovt::detail
