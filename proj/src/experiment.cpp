#include "ovt/experiment.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;

namespace ovt {
namespace {

void check_selection(const ClassifierSelection& sel) {
    if (!sel.ann && !sel.rf && !sel.svm_linear && !sel.svm_rbf)
        throw Error(Errc::invalid_config, "no classifier selected");
    if (sel.fusion && (!sel.rf || !sel.svm_linear))
        throw Error(Errc::invalid_config, "fusion needs both rf and svml selected");
}

std::string file_stub(std::string_view name) {
    std::string out;
    for (char c : name) {
        if (c == '+') out += '_';
        else out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(Errc::io_error, "cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

ClassifierResult score_classifier(std::string name, bool converged, std::vector<double> scores,
                                  const Dataset& dataset) {
    ClassifierResult res;
    res.name = std::move(name);
    res.converged = converged;
    res.moments = evaluate_moments(scores, dataset.test);

    std::vector<double> pos_scores, pos_centers;
    for (std::size_t i = 0; i < dataset.test.size(); ++i) {
        if (dataset.test[i].label != ClassLabel::overtake) continue;
        pos_scores.push_back(scores[i]);
        pos_centers.push_back(dataset.test[i].center_offset_s);
    }
    res.class1_boxes = score_distributions(pos_scores, pos_centers);
    res.test_scores = std::move(scores);
    return res;
}

nlohmann::ordered_json moment_json(const MomentMetrics& m) {
    nlohmann::ordered_json j;
    j["n"] = m.n_samples;
    j["auc_pr"] = m.auc_pr;
    j["best_threshold"] = m.best_threshold;
    j["precision"] = m.precision ? nlohmann::ordered_json(*m.precision)
                                 : nlohmann::ordered_json(nullptr);
    j["recall"] = m.recall ? nlohmann::ordered_json(*m.recall) : nlohmann::ordered_json(nullptr);
    j["f1"] = m.f1 ? nlohmann::ordered_json(*m.f1) : nlohmann::ordered_json(nullptr);
    return j;
}

} // namespace

const ClassifierResult* ExperimentResult::find(std::string_view name) const {
    for (const ClassifierResult& c : classifiers)
        if (c.name == name) return &c;
    return nullptr;
}

std::vector<Recording> load_recordings(const std::string& data_dir) {
    const fs::path dir(data_dir);
    const std::vector<ManifestEntry> manifest =
        parse_manifest(read_file(dir / "manifest.json"));
    std::vector<Recording> recordings;
    recordings.reserve(manifest.size());
    for (const ManifestEntry& entry : manifest)
        recordings.push_back(parse_recording(read_file(dir / entry.file), entry));
    return recordings;
}

PreparedData prepare_data(const std::vector<Recording>& recordings, const ExperimentConfig& cfg) {
    check_selection(cfg.selection);
    std::vector<ManifestEntry> manifest;
    std::vector<WindowSample> windows;
    for (const Recording& rec : recordings) {
        if (!rec.label) throw Error(Errc::unknown_label, rec.file_id + " has no label");
        const Recording annotated =
            rec.trigger_index ? rec : annotate_trigger(rec, cfg.trigger);
        const CroppedRecording crop = crop_around_trigger(annotated);
        std::vector<WindowSample> w = extract_windows(crop, cfg.windowing);
        windows.insert(windows.end(), std::make_move_iterator(w.begin()),
                       std::make_move_iterator(w.end()));
        manifest.push_back({rec.file_id, rec.truck_id, *rec.label});
    }

    PreparedData data;
    data.plan = plan_split(build_inventory(manifest), cfg.split_fraction,
                           derive_seed(cfg.seed, "split"));
    data.dataset = build_dataset(data.plan, windows);
    data.train_raw = to_feature_matrix(data.dataset.train);
    data.test_raw = to_feature_matrix(data.dataset.test);
    data.train_labels = to_labels(data.dataset.train);
    data.test_labels = to_labels(data.dataset.test);
    data.standardizer = fit_standardizer(data.train_raw);
    data.train_std = data.standardizer.transformed(data.train_raw);
    data.test_std = data.standardizer.transformed(data.test_raw);
    return data;
}

ModelSet train_models(const PreparedData& data, const ExperimentConfig& cfg) {
    check_selection(cfg.selection);
    ModelSet models;
    if (cfg.selection.ann) {
        MlpConfig c = cfg.ann;
        c.seed = derive_seed(cfg.seed, "mlp");
        models.ann = train_mlp(data.train_std, data.train_labels, c);
    }
    if (cfg.selection.rf) {
        ForestConfig c = cfg.rf;
        c.seed = derive_seed(cfg.seed, "forest");
        models.rf = train_forest(data.train_raw, data.train_labels, c);
    }
    if (cfg.selection.svm_linear) {
        SvmConfig c = cfg.svm_linear;
        c.kernel = KernelKind::linear;
        c.seed = derive_seed(cfg.seed, "svm-linear");
        models.svm_linear = train_svm(data.train_std, data.train_labels, c);
    }
    if (cfg.selection.svm_rbf) {
        SvmConfig c = cfg.svm_rbf;
        c.kernel = KernelKind::rbf;
        c.seed = derive_seed(cfg.seed, "svm-rbf");
        models.svm_rbf = train_svm(data.train_std, data.train_labels, c);
    }
    return models;
}

ExperimentResult evaluate_models(const std::vector<Recording>& recordings,
                                 const ExperimentConfig& cfg, const ModelSet& models) {
    ExperimentResult result;
    result.config = cfg;
    result.data = prepare_data(recordings, cfg);
    result.models = models;
    const Dataset& ds = result.data.dataset;

    std::vector<double> rf_scores, svml_scores;
    if (cfg.selection.ann) {
        if (!models.ann) throw Error(Errc::invalid_config, "ann selected but not provided");
        result.classifiers.push_back(score_classifier(
            "ANN", models.ann->converged, models.ann->predict_proba(result.data.test_std), ds));
    }
    if (cfg.selection.rf) {
        if (!models.rf) throw Error(Errc::invalid_config, "rf selected but not provided");
        rf_scores = models.rf->predict_proba(result.data.test_raw);
        result.classifiers.push_back(score_classifier("RF", true, rf_scores, ds));
    }
    if (cfg.selection.svm_linear) {
        if (!models.svm_linear)
            throw Error(Errc::invalid_config, "svml selected but not provided");
        svml_scores = models.svm_linear->predict_proba(result.data.test_std);
        result.classifiers.push_back(
            score_classifier("SVML", models.svm_linear->converged, svml_scores, ds));
    }
    if (cfg.selection.svm_rbf) {
        if (!models.svm_rbf)
            throw Error(Errc::invalid_config, "svmrbf selected but not provided");
        result.classifiers.push_back(
            score_classifier("SVMrbf", models.svm_rbf->converged,
                             models.svm_rbf->predict_proba(result.data.test_std), ds));
    }
    if (cfg.selection.fusion) {
        result.classifiers.push_back(
            score_classifier("RF+SVML", true, fuse_mean(rf_scores, svml_scores), ds));
    }

    for (const ClassifierResult& c : result.classifiers)
        result.all_converged = result.all_converged && c.converged;
    return result;
}

ExperimentResult run_experiment(const std::vector<Recording>& recordings,
                                const ExperimentConfig& cfg) {
    const PreparedData data = prepare_data(recordings, cfg);
    const ModelSet models = train_models(data, cfg);
    return evaluate_models(recordings, cfg, models);
}

std::string serialize_report(const ExperimentResult& result) {
    nlohmann::ordered_json j;
    j["format"] = "moment-report-v1";
    j["seed"] = result.config.seed;
    j["split_fraction"] = result.config.split_fraction;
    j["window_len_frames"] = result.config.windowing.window_len_frames;
    j["hop_frames"] = result.config.windowing.hop_frames;
    j["train_files"] = result.data.plan.train_file_count();
    j["test_files"] = result.data.plan.test_file_count();
    j["train_windows"] = result.data.dataset.train.size();
    j["test_windows"] = result.data.dataset.test.size();

    nlohmann::ordered_json jc;
    for (const ClassifierResult& c : result.classifiers) {
        nlohmann::ordered_json jm;
        jm["converged"] = c.converged;
        nlohmann::ordered_json moments;
        for (const MomentMetrics& m : c.moments)
            moments[std::string(moment_name(m.moment))] = moment_json(m);
        jm["moments"] = std::move(moments);
        jc[c.name] = std::move(jm);
    }
    j["classifiers"] = std::move(jc);

    // Fusion lift over its two inputs, metric by metric. Null when one side
    // is undefined.
    const ClassifierResult* rf = result.find("RF");
    const ClassifierResult* svml = result.find("SVML");
    const ClassifierResult* fused = result.find("RF+SVML");
    if (rf && svml && fused) {
        nlohmann::ordered_json var;
        for (std::size_t i = 0; i < fused->moments.size(); ++i) {
            const MomentMetrics& a = rf->moments[i];
            const MomentMetrics& b = svml->moments[i];
            const MomentMetrics& f = fused->moments[i];
            nlohmann::ordered_json row;
            row["auc_pr"] = f.auc_pr - std::max(a.auc_pr, b.auc_pr);
            auto delta = [](const std::optional<double>& fv, const std::optional<double>& av,
                            const std::optional<double>& bv) -> nlohmann::ordered_json {
                if (!fv || !av || !bv) return nullptr;
                return *fv - std::max(*av, *bv);
            };
            row["precision"] = delta(f.precision, a.precision, b.precision);
            row["recall"] = delta(f.recall, a.recall, b.recall);
            row["f1"] = delta(f.f1, a.f1, b.f1);
            var[std::string(moment_name(f.moment))] = std::move(row);
        }
        j["variation"] = std::move(var);
    }
    return j.dump(2) + "\n";
}

std::string render_report(std::string_view report_json) {
    nlohmann::json j = nlohmann::json::parse(report_json, nullptr, false);
    if (j.is_discarded() || j.value("format", "") != "moment-report-v1")
        throw Error(Errc::bad_format, "not a moment-report-v1 document");

    std::string out;
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "seed %llu  split %.2f  train %llu files / %llu windows  test %llu files / %llu windows\n",
                  static_cast<unsigned long long>(j.value("seed", 0ull)),
                  j.value("split_fraction", 0.0),
                  static_cast<unsigned long long>(j.value("train_files", 0ull)),
                  static_cast<unsigned long long>(j.value("train_windows", 0ull)),
                  static_cast<unsigned long long>(j.value("test_files", 0ull)),
                  static_cast<unsigned long long>(j.value("test_windows", 0ull)));
    out += buf;

    auto cell = [](const nlohmann::json& v) -> std::string {
        if (v.is_null()) return "   -  ";
        char b[32];
        std::snprintf(b, sizeof b, "%6.4f", v.get<double>());
        return b;
    };

    static constexpr const char* kMoments[] = {"t", "t-1", "t-2", "t-3", "all"};
    for (const char* metric : {"auc_pr", "precision", "recall", "f1"}) {
        std::snprintf(buf, sizeof buf, "\n%-10s %8s %8s %8s %8s %8s\n", metric, "t", "t-1",
                      "t-2", "t-3", "all");
        out += buf;
        for (const auto& [name, body] : j.at("classifiers").items()) {
            std::snprintf(buf, sizeof buf, "%-10s ", name.c_str());
            out += buf;
            for (const char* m : kMoments) {
                out += "  " + cell(body.at("moments").at(m).at(metric));
            }
            out += '\n';
        }
        if (j.contains("variation")) {
            out += "variation  ";
            for (const char* m : kMoments) out += "  " + cell(j["variation"][m][metric]);
            out += '\n';
        }
    }

    bool all_converged = true;
    for (const auto& [name, body] : j.at("classifiers").items())
        all_converged = all_converged && body.value("converged", true);
    if (!all_converged) out += "\nwarning: at least one model hit its iteration limit\n";
    return out;
}

void write_artifacts(const ExperimentResult& result, const std::string& out_dir) {
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir / "models", ec);
    fs::create_directories(dir / "pr_curves", ec);
    fs::create_directories(dir / "f1_sweeps", ec);
    if (ec) throw Error(Errc::io_error, "cannot create " + out_dir);

    write_file(dir / "split_plan.json", serialize_split_plan(result.data.plan));
    write_file(dir / "standardizer.json", serialize_standardizer(result.data.standardizer));
    write_file(dir / "moment_report.json", serialize_report(result));

    if (result.models.ann) write_file(dir / "models/ann.json", serialize_mlp(*result.models.ann));
    if (result.models.rf) write_file(dir / "models/rf.json", serialize_forest(*result.models.rf));
    if (result.models.svm_linear)
        write_file(dir / "models/svm_linear.json", serialize_svm(*result.models.svm_linear));
    if (result.models.svm_rbf)
        write_file(dir / "models/svm_rbf.json", serialize_svm(*result.models.svm_rbf));

    std::string box_csv = "classifier,center_offset_s,count,min,whisker_lo,q1,median,q3,whisker_hi,max\n";
    for (const ClassifierResult& c : result.classifiers) {
        const std::string stub = file_stub(c.name);
        for (const MomentMetrics& m : c.moments) {
            std::vector<double> s;
            std::vector<int> y;
            const std::vector<std::size_t> idx =
                moment_indices(result.data.dataset.test, m.moment);
            for (std::size_t i : idx) {
                s.push_back(c.test_scores[i]);
                y.push_back(result.data.test_labels[i]);
            }
            const std::string suffix = std::string(moment_name(m.moment));
            write_file(dir / "pr_curves" / (stub + "_" + suffix + ".csv"),
                       pr_curve_csv(pr_curve(s, y)));
            write_file(dir / "f1_sweeps" / (stub + "_" + suffix + ".csv"),
                       f1_sweep_csv(f1_sweep(s, y)));
        }
        const std::string full = box_stats_csv(c.class1_boxes);
        // skip the header line, prepend the classifier name per row
        std::istringstream lines(full);
        std::string line;
        std::getline(lines, line);
        while (std::getline(lines, line)) box_csv += c.name + "," + line + "\n";
    }
    write_file(dir / "boxplot_data.csv", box_csv);
}

ModelSet load_models(const std::string& out_dir, const ClassifierSelection& selection) {
    check_selection(selection);
    const fs::path dir(out_dir);
    ModelSet models;
    if (selection.ann) models.ann = parse_mlp(read_file(dir / "models/ann.json"));
    if (selection.rf) models.rf = parse_forest(read_file(dir / "models/rf.json"));
    if (selection.svm_linear)
        models.svm_linear = parse_svm(read_file(dir / "models/svm_linear.json"));
    if (selection.svm_rbf) models.svm_rbf = parse_svm(read_file(dir / "models/svm_rbf.json"));
    return models;
}

} // namespace ovt
