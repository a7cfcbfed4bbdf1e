#include "ovt/forest.hpp"

#include "ovt/errors.hpp"
#include "ovt/rng.hpp"
#include "train_checks.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace ovt {
namespace {

double gini(std::size_t n0, std::size_t n1) {
    const double n = static_cast<double>(n0 + n1);
    if (n == 0.0) return 0.0;
    const double p0 = n0 / n, p1 = n1 / n;
    return 1.0 - p0 * p0 - p1 * p1;
}

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double decrease = 0.0;
};

struct TreeBuilder {
    const Matrix& x;
    const std::vector<int>& y;
    const ForestConfig& cfg;
    int k_features;
    Rng& rng;
    std::vector<int> feature_pool;
    std::vector<std::pair<double, int>> scratch; // (value, label) sorted per feature

    // Best Gini-decrease split over a fresh random feature subset. Ties keep
    // the earliest candidate in draw order, then the lowest threshold.
    SplitChoice best_split(const std::vector<std::size_t>& idx, std::size_t n1_total) {
        const std::size_t m = idx.size();
        const double parent = gini(m - n1_total, n1_total);
        SplitChoice best;
        for (int i = 0; i < k_features; ++i) {
            const std::size_t j = rng.uniform_index(i, feature_pool.size() - 1);
            std::swap(feature_pool[i], feature_pool[j]);
            const int f = feature_pool[i];

            scratch.clear();
            for (std::size_t r : idx) scratch.emplace_back(x.at(r, f), y[r]);
            std::sort(scratch.begin(), scratch.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left1 = 0;
            for (std::size_t pos = 0; pos + 1 < m; ++pos) {
                left1 += scratch[pos].second;
                const double a = scratch[pos].first, b = scratch[pos + 1].first;
                if (!(a < b)) continue;
                const std::size_t nl = pos + 1, nr = m - nl;
                if (nl < cfg.min_leaf || nr < cfg.min_leaf) continue;
                // the split stores the right group's smallest value; < then
                // routes purely by order, so a strictly increasing remap of a
                // feature never moves a point across a split
                const double w = (nl * gini(nl - left1, left1) +
                                  nr * gini(nr - (n1_total - left1), n1_total - left1)) /
                                 m;
                const double dec = parent - w;
                if (dec > best.decrease) best = {f, b, dec};
            }
        }
        return best;
    }
};

int grow(TreeBuilder& tb, DecisionTree& tree, std::vector<std::size_t> idx) {
    const int node_id = static_cast<int>(tree.nodes.size());
    tree.nodes.emplace_back();

    std::size_t n1 = 0;
    for (std::size_t r : idx) n1 += tb.y[r];
    const std::size_t m = idx.size();
    tree.nodes[node_id].value = static_cast<double>(n1) / m;

    if (n1 == 0 || n1 == m || m < 2 * tb.cfg.min_leaf) return node_id;
    const SplitChoice split = tb.best_split(idx, n1);
    if (split.feature < 0 || split.decrease <= 0.0) return node_id;

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t r : idx)
        (tb.x.at(r, split.feature) < split.threshold ? left_idx : right_idx).push_back(r);
    idx.clear();
    idx.shrink_to_fit();

    tree.nodes[node_id].feature = split.feature;
    tree.nodes[node_id].threshold = split.threshold;
    const int l = grow(tb, tree, std::move(left_idx));
    tree.nodes[node_id].left = l;
    const int r = grow(tb, tree, std::move(right_idx));
    tree.nodes[node_id].right = r;
    return node_id;
}

} // namespace

double DecisionTree::predict(std::span<const double> x) const {
    int node = 0;
    while (nodes[node].feature >= 0)
        node = x[nodes[node].feature] < nodes[node].threshold ? nodes[node].left
                                                              : nodes[node].right;
    return nodes[node].value;
}

double ForestModel::predict_proba(std::span<const double> x) const {
    if (x.size() != static_cast<std::size_t>(inputs))
        throw Error(Errc::length_mismatch, "feature vector size mismatch");
    double sum = 0.0;
    for (const DecisionTree& t : trees) sum += t.predict(x);
    return sum / trees.size();
}

std::vector<double> ForestModel::predict_proba(const Matrix& x) const {
    std::vector<double> out;
    out.reserve(x.rows);
    for (std::size_t i = 0; i < x.rows; ++i) out.push_back(predict_proba(x.row(i)));
    return out;
}

ForestModel train_forest(const Matrix& x, const std::vector<int>& y, const ForestConfig& cfg) {
    detail::check_training_data(x, y);
    if (cfg.n_trees <= 0) throw Error(Errc::invalid_config, "n_trees must be positive");
    if (cfg.min_leaf == 0) throw Error(Errc::invalid_config, "min_leaf must be positive");
    const int d = static_cast<int>(x.cols);
    int k = cfg.features_per_split;
    if (k == 0) k = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(d))));
    if (k < 1 || k > d)
        throw Error(Errc::invalid_config, "features_per_split out of range");

    ForestModel model;
    model.inputs = d;
    model.trees.resize(cfg.n_trees);
    const std::size_t n = x.rows;
    for (int t = 0; t < cfg.n_trees; ++t) {
        Rng rng(derive_seed(cfg.seed, "tree", static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> sample(n);
        for (std::size_t i = 0; i < n; ++i) sample[i] = rng.uniform_index(0, n - 1);

        TreeBuilder tb{x, y, cfg, k, rng, {}, {}};
        tb.feature_pool.resize(d);
        std::iota(tb.feature_pool.begin(), tb.feature_pool.end(), 0);
        grow(tb, model.trees[t], std::move(sample));
    }
    return model;
}

std::string serialize_forest(const ForestModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "forest-v1";
    j["inputs"] = model.inputs;
    nlohmann::ordered_json trees = nlohmann::ordered_json::array();
    for (const DecisionTree& t : model.trees) {
        nlohmann::ordered_json jt;
        std::vector<int> feature, left, right;
        std::vector<double> threshold, value;
        for (const TreeNode& n : t.nodes) {
            feature.push_back(n.feature);
            threshold.push_back(n.threshold);
            left.push_back(n.left);
            right.push_back(n.right);
            value.push_back(n.value);
        }
        jt["feature"] = feature;
        jt["threshold"] = threshold;
        jt["left"] = left;
        jt["right"] = right;
        jt["value"] = value;
        trees.push_back(std::move(jt));
    }
    j["trees"] = std::move(trees);
    return j.dump() + "\n";
}

ForestModel parse_forest(std::string_view text) {
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.is_object() || j.value("format", "") != "forest-v1")
        throw Error(Errc::bad_format, "not a forest-v1 document");
    try {
        ForestModel model;
        model.inputs = j.at("inputs").get<int>();
        for (const auto& jt : j.at("trees")) {
            DecisionTree tree;
            const auto feature = jt.at("feature").get<std::vector<int>>();
            const auto threshold = jt.at("threshold").get<std::vector<double>>();
            const auto left = jt.at("left").get<std::vector<int>>();
            const auto right = jt.at("right").get<std::vector<int>>();
            const auto value = jt.at("value").get<std::vector<double>>();
            const std::size_t n = feature.size();
            if (threshold.size() != n || left.size() != n || right.size() != n ||
                value.size() != n || n == 0)
                throw Error(Errc::bad_format, "inconsistent tree arrays");
            const int count = static_cast<int>(n);
            for (std::size_t i = 0; i < n; ++i) {
                TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
                if (node.feature >= 0 &&
                    (node.feature >= model.inputs || node.left < 0 || node.left >= count ||
                     node.right < 0 || node.right >= count))
                    throw Error(Errc::bad_format, "tree node out of range");
                tree.nodes.push_back(node);
            }
            model.trees.push_back(std::move(tree));
        }
        if (model.inputs <= 0 || model.trees.empty())
            throw Error(Errc::bad_format, "empty forest");
        return model;
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::bad_format, std::string("bad forest document: ") + e.what());
    }
}

} // namespace ovt
