#include "ovt/dataset.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <unordered_map>

namespace ovt {

namespace {

// floor() of the product, tolerating the binary representation of fractions
// like 0.7 (0.7 * 10 must give 7, not 6).
std::size_t train_count(double fraction, std::size_t minimum) {
    return static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(minimum) + 1e-9));
}

void split_class(const std::vector<std::string>& files, std::size_t take, Rng& rng,
                 std::vector<std::string>& train, std::vector<std::string>& test) {
    std::vector<std::string> shuffled = files;
    std::sort(shuffled.begin(), shuffled.end());
    rng.shuffle(shuffled);
    train.assign(shuffled.begin(), shuffled.begin() + static_cast<std::ptrdiff_t>(take));
    test.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(take), shuffled.end());
    std::sort(train.begin(), train.end());
    std::sort(test.begin(), test.end());
}

} // namespace

std::size_t SplitPlan::train_file_count() const {
    std::size_t n = 0;
    for (const auto& t : trucks)
        n += t.train_class0.size() + t.train_class1.size();
    return n;
}

std::size_t SplitPlan::test_file_count() const {
    std::size_t n = 0;
    for (const auto& t : trucks)
        n += t.test_class0.size() + t.test_class1.size();
    return n;
}

SplitPlan plan_split(const std::vector<TruckInventory>& inventory, double fraction,
                     std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw Error(Errc::invalid_config, "split fraction must be in (0,1)");

    SplitPlan plan;
    plan.seed = seed;
    plan.fraction = fraction;
    for (const TruckInventory& truck : inventory) {
        if (truck.class0_files.empty() || truck.class1_files.empty())
            throw Error(Errc::empty_class,
                        "truck '" + truck.truck_id + "' lacks files of one class");

        const std::size_t minimum = std::min(truck.class0_files.size(), truck.class1_files.size());
        const std::size_t take = train_count(fraction, minimum);

        SplitPlan::TruckSplit split;
        split.truck_id = truck.truck_id;
        Rng rng0(derive_seed(seed, "split/" + truck.truck_id + "/class0"));
        Rng rng1(derive_seed(seed, "split/" + truck.truck_id + "/class1"));
        split_class(truck.class0_files, take, rng0, split.train_class0, split.test_class0);
        split_class(truck.class1_files, take, rng1, split.train_class1, split.test_class1);
        plan.trucks.push_back(std::move(split));
    }
    return plan;
}

std::string serialize_split_plan(const SplitPlan& plan) {
    nlohmann::ordered_json doc;
    doc["format"] = "split-plan-v1";
    doc["seed"] = plan.seed;
    doc["fraction"] = plan.fraction;
    doc["trucks"] = nlohmann::ordered_json::array();
    for (const auto& t : plan.trucks) {
        doc["trucks"].push_back({{"truck_id", t.truck_id},
                                 {"train_class0", t.train_class0},
                                 {"train_class1", t.train_class1},
                                 {"test_class0", t.test_class0},
                                 {"test_class1", t.test_class1}});
    }
    return doc.dump(2) + "\n";
}

SplitPlan parse_split_plan(std::string_view json_text) {
    try {
        const auto doc = nlohmann::json::parse(json_text);
        if (doc.at("format").get<std::string>() != "split-plan-v1")
            throw Error(Errc::bad_format, "unsupported split plan format");
        SplitPlan plan;
        plan.seed = doc.at("seed").get<std::uint64_t>();
        plan.fraction = doc.at("fraction").get<double>();
        for (const auto& t : doc.at("trucks")) {
            SplitPlan::TruckSplit split;
            split.truck_id = t.at("truck_id").get<std::string>();
            split.train_class0 = t.at("train_class0").get<std::vector<std::string>>();
            split.train_class1 = t.at("train_class1").get<std::vector<std::string>>();
            split.test_class0 = t.at("test_class0").get<std::vector<std::string>>();
            split.test_class1 = t.at("test_class1").get<std::vector<std::string>>();
            plan.trucks.push_back(std::move(split));
        }
        return plan;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("split plan: ") + e.what());
    }
}

void Standardizer::apply(std::span<double> features) const {
    if (features.size() != mean.size())
        throw Error(Errc::length_mismatch, "feature count does not match standardizer");
    for (std::size_t i = 0; i < features.size(); ++i)
        features[i] = (features[i] - mean[i]) / std_dev[i];
}

Matrix Standardizer::transformed(const Matrix& features) const {
    Matrix out = features;
    for (std::size_t r = 0; r < out.rows; ++r)
        apply(out.row(r));
    return out;
}

Standardizer fit_standardizer(const Matrix& features) {
    if (features.rows < 2)
        throw Error(Errc::invalid_argument, "standardizer needs at least 2 training rows");

    Standardizer s;
    s.mean.resize(features.cols);
    s.std_dev.resize(features.cols);
    const double n = static_cast<double>(features.rows);
    for (std::size_t c = 0; c < features.cols; ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < features.rows; ++r)
            sum += features.at(r, c);
        const double mean = sum / n;

        double sq = 0.0;
        for (std::size_t r = 0; r < features.rows; ++r) {
            const double d = features.at(r, c) - mean;
            sq += d * d;
        }
        const double std_dev = std::sqrt(sq / (n - 1.0));

        s.mean[c] = mean;
        s.std_dev[c] = std_dev > 0.0 ? std_dev : 1.0;
    }
    return s;
}

std::string serialize_standardizer(const Standardizer& s) {
    nlohmann::ordered_json doc;
    doc["format"] = "standardizer-v1";
    doc["mean"] = s.mean;
    doc["std"] = s.std_dev;
    return doc.dump(2) + "\n";
}

Standardizer parse_standardizer(std::string_view json_text) {
    try {
        const auto doc = nlohmann::json::parse(json_text);
        if (doc.at("format").get<std::string>() != "standardizer-v1")
            throw Error(Errc::bad_format, "unsupported standardizer format");
        Standardizer s;
        s.mean = doc.at("mean").get<std::vector<double>>();
        s.std_dev = doc.at("std").get<std::vector<double>>();
        if (s.mean.size() != s.std_dev.size())
            throw Error(Errc::bad_format, "standardizer mean/std size mismatch");
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("standardizer: ") + e.what());
    }
}

Dataset build_dataset(const SplitPlan& plan, std::span<const WindowSample> windows) {
    std::unordered_map<std::string, std::vector<const WindowSample*>> by_file;
    for (const WindowSample& w : windows)
        by_file[w.file_id].push_back(&w);

    const auto append = [&by_file](const std::vector<std::string>& files,
                                   std::vector<WindowSample>& out) {
        for (const std::string& file : files) {
            const auto it = by_file.find(file);
            if (it == by_file.end())
                throw Error(Errc::missing_file_windows, "no windows extracted for '" + file + "'");
            for (const WindowSample* w : it->second)
                out.push_back(*w);
        }
    };

    Dataset dataset;
    for (const auto& truck : plan.trucks) {
        append(truck.train_class0, dataset.train);
        append(truck.train_class1, dataset.train);
    }
    for (const auto& truck : plan.trucks) {
        append(truck.test_class0, dataset.test);
        append(truck.test_class1, dataset.test);
    }
    return dataset;
}

Matrix to_feature_matrix(std::span<const WindowSample> samples) {
    Matrix m(samples.size(), kFeatureCount);
    for (std::size_t r = 0; r < samples.size(); ++r)
        std::copy(samples[r].features.begin(), samples[r].features.end(), m.row(r).begin());
    return m;
}

std::vector<int> to_labels(std::span<const WindowSample> samples) {
    std::vector<int> labels(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i)
        labels[i] = static_cast<int>(samples[i].label);
    return labels;
}

std::vector<TruckInventory> build_inventory(const std::vector<ManifestEntry>& manifest) {
    std::vector<TruckInventory> inventory;
    std::unordered_map<std::string, std::size_t> index;
    for (const ManifestEntry& entry : manifest) {
        auto [it, inserted] = index.try_emplace(entry.truck_id, inventory.size());
        if (inserted)
            inventory.push_back(TruckInventory{entry.truck_id, {}, {}});
        TruckInventory& truck = inventory[it->second];
        if (entry.label == ClassLabel::overtake)
            truck.class1_files.push_back(entry.file);
        else
            truck.class0_files.push_back(entry.file);
    }
    return inventory;
}

} // namespace ovt
