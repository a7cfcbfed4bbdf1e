#pragma once

#include "ovt/features.hpp"
#include "ovt/matrix.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ovt {

// Per-truck file counts by class, input to split planning.
struct TruckInventory {
    std::string truck_id;
    std::vector<std::string> class0_files;
    std::vector<std::string> class1_files;
};

// Per-truck balanced train/test assignment: floor(fraction * min(class
// counts)) files of each class go to training, everything else to test.
struct SplitPlan {
    struct TruckSplit {
        std::string truck_id;
        std::vector<std::string> train_class0;
        std::vector<std::string> train_class1;
        std::vector<std::string> test_class0;
        std::vector<std::string> test_class1;
    };

    std::vector<TruckSplit> trucks;
    std::uint64_t seed = 0;
    double fraction = 0.7;

    std::size_t train_file_count() const;
    std::size_t test_file_count() const;
};

SplitPlan plan_split(const std::vector<TruckInventory>& inventory, double fraction = 0.7,
                     std::uint64_t seed = 0);

std::string serialize_split_plan(const SplitPlan& plan);
SplitPlan parse_split_plan(std::string_view json_text);

// Per-feature centring/scaling fitted on training windows only. Constant
// features keep a divisor of 1 so they pass through as zero.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> std_dev;

    void apply(std::span<double> features) const;
    Matrix transformed(const Matrix& features) const;
};

Standardizer fit_standardizer(const Matrix& features);

std::string serialize_standardizer(const Standardizer& s);
Standardizer parse_standardizer(std::string_view json_text);

// Assembled train/test window rows; metadata stays attached for per-moment
// evaluation.
struct Dataset {
    std::vector<WindowSample> train;
    std::vector<WindowSample> test;
};

Dataset build_dataset(const SplitPlan& plan, std::span<const WindowSample> windows);

Matrix to_feature_matrix(std::span<const WindowSample> samples);
std::vector<int> to_labels(std::span<const WindowSample> samples);

// Groups manifest entries into the per-truck inventory (file order preserved).
std::vector<TruckInventory> build_inventory(const std::vector<ManifestEntry>& manifest);

} // namespace ovt
