#pragma once

#include "ovt/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ovt {

struct ForestConfig {
    int n_trees = 100;
    std::size_t min_leaf = 1;
    int features_per_split = 0; // 0 picks ceil(sqrt(feature count))
    std::uint64_t seed = 0;
};

// Axis-aligned binary split; feature < 0 marks a leaf and value holds the
// class-1 fraction of its training rows.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // node 0 is the root

    double predict(std::span<const double> x) const;
};

// Bagged trees grown on bootstrap samples with Gini splits over a random
// feature subset per node. Scores are the unweighted mean of tree outputs
// and depend only on feature order relative to the thresholds, so inputs
// are used unstandardized.
struct ForestModel {
    int inputs = 0;
    std::vector<DecisionTree> trees;

    double predict_proba(std::span<const double> x) const;
    std::vector<double> predict_proba(const Matrix& x) const;
};

ForestModel train_forest(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg);

std::string serialize_forest(const ForestModel& model);
ForestModel parse_forest(std::string_view json_text);

} // namespace ovt
