#pragma once

#include "ovt/dataset.hpp"
#include "ovt/features.hpp"
#include "ovt/forest.hpp"
#include "ovt/metrics.hpp"
#include "ovt/mlp.hpp"
#include "ovt/svm.hpp"
#include "ovt/trigger.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace ovt {

struct ClassifierSelection {
    bool ann = true;
    bool rf = true;
    bool svm_linear = true;
    bool svm_rbf = true;
    bool fusion = true; // needs rf and svm_linear
};

// One root seed drives everything; the per-model seed fields inside the
// sub-configs are overwritten with streams derived from it.
struct ExperimentConfig {
    std::uint64_t seed = 0;
    double split_fraction = 0.7;
    TriggerRule trigger;
    WindowingConfig windowing;
    ClassifierSelection selection;
    MlpConfig ann;
    ForestConfig rf;
    SvmConfig svm_linear;
    SvmConfig svm_rbf;
};

// Everything downstream of the raw recordings and upstream of the models:
// detected triggers, crops, windows, the split, and standardized matrices.
struct PreparedData {
    SplitPlan plan;
    Standardizer standardizer;
    Dataset dataset;
    Matrix train_raw;
    Matrix test_raw;
    Matrix train_std;
    Matrix test_std;
    std::vector<int> train_labels;
    std::vector<int> test_labels;
};

PreparedData prepare_data(const std::vector<Recording>& recordings, const ExperimentConfig& cfg);

struct ModelSet {
    std::optional<MlpModel> ann;
    std::optional<ForestModel> rf;
    std::optional<SvmModel> svm_linear;
    std::optional<SvmModel> svm_rbf;
};

ModelSet train_models(const PreparedData& data, const ExperimentConfig& cfg);

struct ClassifierResult {
    std::string name; // ANN, RF, SVML, SVMrbf, RF+SVML
    bool converged = true;
    std::vector<double> test_scores; // aligned with dataset.test
    std::vector<MomentMetrics> moments;
    std::vector<BoxStats> class1_boxes; // overtake test windows by center offset
};

struct ExperimentResult {
    ExperimentConfig config;
    PreparedData data;
    ModelSet models;
    std::vector<ClassifierResult> classifiers;
    bool all_converged = true;

    const ClassifierResult* find(std::string_view name) const;
};

ExperimentResult run_experiment(const std::vector<Recording>& recordings,
                                const ExperimentConfig& cfg);

// Scoring and reporting for already-fitted models; run_experiment is
// prepare + train + this.
ExperimentResult evaluate_models(const std::vector<Recording>& recordings,
                                 const ExperimentConfig& cfg, const ModelSet& models);

// Moment table as a stable JSON document; equal runs serialize to equal
// bytes.
std::string serialize_report(const ExperimentResult& result);

// Plain-text table from a serialized report.
std::string render_report(std::string_view report_json);

// split_plan.json, standardizer.json, models/, moment_report.json,
// pr_curves/, f1_sweeps/, boxplot_data.csv under out_dir.
void write_artifacts(const ExperimentResult& result, const std::string& out_dir);

ModelSet load_models(const std::string& out_dir, const ClassifierSelection& selection);

// Recordings named in a manifest, loaded relative to its directory.
std::vector<Recording> load_recordings(const std::string& data_dir);

} // namespace ovt
