#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "asrfeat/corpus.hpp"
#include "asrfeat/errors.hpp"
#include "asrfeat/rng.hpp"
#include "asrfeat/version.hpp"

namespace asrfeat {

struct ForestConfig {
    int trees = 300;
    int max_depth = 12;
    int min_leaf = 2;
    double feature_fraction = 0.0;  // 0 picks sqrt(feature count)
    bool class_weights = true;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::array<double, 3> distribution{};
};

struct Tree {
    std::vector<TreeNode> nodes;

    const std::array<double, 3>& route(const std::vector<double>& row) const {
        int at = 0;
        while (nodes[at].feature >= 0)
            at = row[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold ? nodes[at].left
                                                                                         : nodes[at].right;
        return nodes[at].distribution;
    }
};

struct ForestModel {
    ForestConfig config;
    std::uint64_t seed = 0;
    std::size_t num_features = 0;
    std::string manifest_hash;
    std::vector<Tree> trees;
};

namespace detail {

struct TreeSample {
    std::vector<std::size_t> rows;  // bootstrap draws, with repetition
};

struct TreeBuilder {
    const std::vector<std::vector<double>>& matrix;
    const std::vector<int>& labels;
    const std::array<double, 3>& class_weight;
    const ForestConfig& config;
    std::size_t features_per_split;
    Rng& rng;
    std::vector<TreeNode> nodes;

    std::array<double, 3> weighted_counts(const std::vector<std::size_t>& rows) const {
        std::array<double, 3> counts{};
        for (std::size_t r : rows) counts[static_cast<std::size_t>(labels[r])] += class_weight[labels[r]];
        return counts;
    }

    static double gini(const std::array<double, 3>& counts) {
        const double total = counts[0] + counts[1] + counts[2];
        if (total == 0.0) return 0.0;
        double sum_sq = 0.0;
        for (double c : counts) sum_sq += (c / total) * (c / total);
        return 1.0 - sum_sq;
    }

    int make_leaf(const std::vector<std::size_t>& rows) {
        std::array<double, 3> counts = weighted_counts(rows);
        const double total = counts[0] + counts[1] + counts[2];
        for (double& c : counts) c /= total;
        TreeNode node;
        node.distribution = counts;
        nodes.push_back(node);
        return static_cast<int>(nodes.size() - 1);
    }

    int build(const std::vector<std::size_t>& rows, int depth) {
        const std::array<double, 3> counts = weighted_counts(rows);
        const double impurity = gini(counts);
        if (depth >= config.max_depth || rows.size() < 2 * static_cast<std::size_t>(config.min_leaf) ||
            impurity == 0.0)
            return make_leaf(rows);

        std::vector<std::size_t> candidates(matrix.front().size());
        std::iota(candidates.begin(), candidates.end(), 0);
        rng.shuffle(candidates);
        candidates.resize(features_per_split);
        std::sort(candidates.begin(), candidates.end());

        int best_feature = -1;
        double best_threshold = 0.0;
        double best_score = impurity;

        std::vector<std::pair<double, int>> column(rows.size());
        for (std::size_t feature : candidates) {
            for (std::size_t i = 0; i < rows.size(); ++i)
                column[i] = {matrix[rows[i]][feature], labels[rows[i]]};
            std::sort(column.begin(), column.end());

            std::array<double, 3> left{};
            std::array<double, 3> right = counts;
            const double total = right[0] + right[1] + right[2];
            std::size_t moved = 0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                const double w = class_weight[column[i].second];
                left[static_cast<std::size_t>(column[i].second)] += w;
                right[static_cast<std::size_t>(column[i].second)] -= w;
                ++moved;
                if (column[i].first == column[i + 1].first) continue;
                if (moved < static_cast<std::size_t>(config.min_leaf) ||
                    column.size() - moved < static_cast<std::size_t>(config.min_leaf))
                    continue;
                const double lt = left[0] + left[1] + left[2];
                const double score = (lt * gini(left) + (total - lt) * gini(right)) / total;
                if (score < best_score - 1e-12) {
                    best_score = score;
                    best_feature = static_cast<int>(feature);
                    best_threshold = (column[i].first + column[i + 1].first) / 2.0;
                }
            }
        }

        if (best_feature < 0) return make_leaf(rows);

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows)
            (matrix[r][static_cast<std::size_t>(best_feature)] <= best_threshold ? left_rows : right_rows)
                .push_back(r);

        TreeNode node;
        node.feature = best_feature;
        node.threshold = best_threshold;
        nodes.push_back(node);
        const int index = static_cast<int>(nodes.size() - 1);
        nodes[static_cast<std::size_t>(index)].left = build(left_rows, depth + 1);
        nodes[static_cast<std::size_t>(index)].right = build(right_rows, depth + 1);
        return index;
    }
};

}  // namespace detail

inline ForestModel train(const std::vector<std::vector<double>>& matrix, const std::vector<int>& labels,
                         const ForestConfig& config, std::uint64_t seed) {
    if (matrix.empty()) throw ValidationError("train: empty matrix");
    if (matrix.size() != labels.size()) throw ValidationError("train: matrix/label length mismatch");
    const std::size_t num_features = matrix.front().size();
    if (num_features == 0) throw ValidationError("train: rows have no features");
    for (const auto& row : matrix) {
        if (row.size() != num_features) throw ValidationError("train: ragged matrix");
        for (double v : row)
            if (!std::isfinite(v)) throw ValidationError("train: non-finite feature value");
    }
    if (config.trees < 1) throw ConfigError("train: tree count must be positive");
    if (config.min_leaf < 1) throw ConfigError("train: min leaf size must be positive");
    if (config.feature_fraction < 0.0 || config.feature_fraction > 1.0)
        throw ConfigError("train: feature fraction must be in [0,1]");

    std::array<std::size_t, 3> class_count{};
    for (int label : labels) class_count[static_cast<std::size_t>(label)] += 1;
    int classes_present = 0;
    for (std::size_t c : class_count) classes_present += c > 0 ? 1 : 0;
    if (classes_present < 2) throw ValidationError("train: need at least 2 classes, got " +
                                                   std::to_string(classes_present));

    std::array<double, 3> class_weight{1.0, 1.0, 1.0};
    if (config.class_weights) {
        const double n = static_cast<double>(labels.size());
        for (std::size_t c = 0; c < 3; ++c)
            class_weight[c] = class_count[c] > 0
                                  ? n / (static_cast<double>(classes_present) * static_cast<double>(class_count[c]))
                                  : 0.0;
    }

    std::size_t features_per_split =
        config.feature_fraction == 0.0
            ? static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(num_features)) + 1e-9))
            : static_cast<std::size_t>(std::ceil(config.feature_fraction * static_cast<double>(num_features) - 1e-9));
    features_per_split = std::clamp<std::size_t>(features_per_split, 1, num_features);

    ForestModel model;
    model.config = config;
    model.seed = seed;
    model.num_features = num_features;
    model.trees.resize(static_cast<std::size_t>(config.trees));

    for (int t = 0; t < config.trees; ++t) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> sample(matrix.size());
        for (std::size_t& r : sample) r = static_cast<std::size_t>(rng.below(matrix.size()));
        detail::TreeBuilder builder{matrix, labels, class_weight, config, features_per_split, rng, {}};
        builder.build(sample, 0);
        model.trees[static_cast<std::size_t>(t)].nodes = std::move(builder.nodes);
    }
    return model;
}

struct Prediction {
    int label = 0;
    std::array<double, 3> scores{};
};

inline Prediction predict(const ForestModel& model, const std::vector<double>& row) {
    if (row.size() != model.num_features)
        throw ValidationError("predict: row has " + std::to_string(row.size()) + " features, model expects " +
                              std::to_string(model.num_features));
    Prediction out;
    for (const Tree& tree : model.trees) {
        const auto& dist = tree.route(row);
        for (std::size_t c = 0; c < 3; ++c) out.scores[c] += dist[c];
    }
    for (double& s : out.scores) s /= static_cast<double>(model.trees.size());
    for (std::size_t c = 1; c < 3; ++c)
        if (out.scores[c] > out.scores[static_cast<std::size_t>(out.label)]) out.label = static_cast<int>(c);
    return out;
}

inline std::vector<int> predict_labels(const ForestModel& model, const std::vector<std::vector<double>>& matrix) {
    std::vector<int> out;
    out.reserve(matrix.size());
    for (const auto& row : matrix) out.push_back(predict(model, row).label);
    return out;
}

struct EvalReport {
    double accuracy = 0.0;
    double balanced_accuracy = 0.0;
    std::array<std::array<std::int64_t, 3>, 3> confusion{};  // [truth][prediction]
    std::array<double, 3> per_class_recall{};
};

inline EvalReport evaluate(const std::vector<int>& predictions, const std::vector<int>& ground_truth) {
    if (predictions.size() != ground_truth.size()) throw ValidationError("evaluate: length mismatch");
    if (predictions.empty()) throw ValidationError("evaluate: no predictions");

    EvalReport report;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (ground_truth[i] < 0 || ground_truth[i] > 2 || predictions[i] < 0 || predictions[i] > 2)
            throw ValidationError("evaluate: labels must be in {0,1,2}");
        report.confusion[static_cast<std::size_t>(ground_truth[i])][static_cast<std::size_t>(predictions[i])] += 1;
    }

    std::int64_t correct = 0;
    double recall_sum = 0.0;
    int classes_present = 0;
    for (std::size_t c = 0; c < 3; ++c) {
        const std::int64_t row_total = report.confusion[c][0] + report.confusion[c][1] + report.confusion[c][2];
        correct += report.confusion[c][c];
        if (row_total > 0) {
            report.per_class_recall[c] = static_cast<double>(report.confusion[c][c]) / static_cast<double>(row_total);
            recall_sum += report.per_class_recall[c];
            ++classes_present;
        }
    }
    report.accuracy = static_cast<double>(correct) / static_cast<double>(predictions.size());
    report.balanced_accuracy = recall_sum / static_cast<double>(classes_present);
    return report;
}

struct ImportanceEntry {
    std::string feature;
    double mean = 0.0;
    double sd = 0.0;
};

struct ImportanceReport {
    double baseline_balanced_accuracy = 0.0;
    std::vector<ImportanceEntry> entries;  // descending mean
};

// Importance of a feature is the drop in balanced accuracy when its column
// is shuffled, averaged over repeats.
inline ImportanceReport permutation_importance(const ForestModel& model,
                                               const std::vector<std::vector<double>>& matrix,
                                               const std::vector<int>& labels,
                                               const std::vector<std::string>& feature_names, int repeats,
                                               std::uint64_t seed) {
    if (matrix.empty()) throw ValidationError("permutation_importance: empty matrix");
    if (matrix.size() != labels.size()) throw ValidationError("permutation_importance: matrix/label length mismatch");
    if (repeats < 1) throw ValidationError("permutation_importance: repeats must be >= 1");
    if (feature_names.size() != model.num_features)
        throw ValidationError("permutation_importance: feature name count mismatch");

    ImportanceReport report;
    report.baseline_balanced_accuracy = evaluate(predict_labels(model, matrix), labels).balanced_accuracy;

    std::vector<std::vector<double>> shuffled = matrix;
    for (std::size_t feature = 0; feature < model.num_features; ++feature) {
        std::vector<double> scores;
        scores.reserve(static_cast<std::size_t>(repeats));
        for (int repeat = 0; repeat < repeats; ++repeat) {
            Rng rng(derive_seed(seed, feature * static_cast<std::size_t>(repeats) + static_cast<std::size_t>(repeat)));
            std::vector<double> column(matrix.size());
            for (std::size_t r = 0; r < matrix.size(); ++r) column[r] = matrix[r][feature];
            rng.shuffle(column);
            for (std::size_t r = 0; r < matrix.size(); ++r) shuffled[r][feature] = column[r];
            scores.push_back(evaluate(predict_labels(model, shuffled), labels).balanced_accuracy);
        }
        for (std::size_t r = 0; r < matrix.size(); ++r) shuffled[r][feature] = matrix[r][feature];

        double mean = 0.0;
        for (double s : scores) mean += s;
        mean /= static_cast<double>(scores.size());
        double var = 0.0;
        for (double s : scores) var += (s - mean) * (s - mean);
        ImportanceEntry entry;
        entry.feature = feature_names[feature];
        entry.mean = report.baseline_balanced_accuracy - mean;
        entry.sd = std::sqrt(var / static_cast<double>(scores.size()));
        report.entries.push_back(std::move(entry));
    }
    std::stable_sort(report.entries.begin(), report.entries.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) { return a.mean > b.mean; });
    return report;
}

// ---------------------------------------------------------------------------
// Model file.

inline ordered_json model_to_json(const ForestModel& model) {
    ordered_json j;
    j["format"] = "asrfeat-forest";
    j["version"] = kVersion;
    ordered_json config;
    config["trees"] = model.config.trees;
    config["max_depth"] = model.config.max_depth;
    config["min_leaf"] = model.config.min_leaf;
    config["feature_fraction"] = model.config.feature_fraction;
    config["class_weights"] = model.config.class_weights;
    j["config"] = std::move(config);
    j["seed"] = model.seed;
    j["num_features"] = model.num_features;
    j["manifest_hash"] = model.manifest_hash;
    ordered_json trees = ordered_json::array();
    for (const Tree& tree : model.trees) {
        ordered_json nodes = ordered_json::array();
        for (const TreeNode& node : tree.nodes) {
            ordered_json jn;
            if (node.feature >= 0) {
                jn["feature"] = node.feature;
                jn["threshold"] = node.threshold;
                jn["left"] = node.left;
                jn["right"] = node.right;
            } else {
                jn["leaf"] = node.distribution;
            }
            nodes.push_back(std::move(jn));
        }
        trees.push_back(ordered_json{{"nodes", std::move(nodes)}});
    }
    j["trees"] = std::move(trees);
    return j;
}

inline void write_model_file(const ForestModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write model file: " + path);
    out << model_to_json(model).dump() << '\n';
}

inline ForestModel read_model_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open model file: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const ordered_json::exception& e) {
        throw ParseError(std::string("model file: ") + e.what());
    }
    ForestModel model;
    try {
        if (j.at("format").get<std::string>() != "asrfeat-forest")
            throw ValidationError("model file: unrecognized format tag");
        const auto& config = j.at("config");
        model.config.trees = config.at("trees").get<int>();
        model.config.max_depth = config.at("max_depth").get<int>();
        model.config.min_leaf = config.at("min_leaf").get<int>();
        model.config.feature_fraction = config.at("feature_fraction").get<double>();
        model.config.class_weights = config.at("class_weights").get<bool>();
        model.seed = j.at("seed").get<std::uint64_t>();
        model.num_features = j.at("num_features").get<std::size_t>();
        model.manifest_hash = j.at("manifest_hash").get<std::string>();
        for (const auto& jt : j.at("trees")) {
            Tree tree;
            for (const auto& jn : jt.at("nodes")) {
                TreeNode node;
                if (jn.contains("leaf")) {
                    node.distribution = jn.at("leaf").get<std::array<double, 3>>();
                    double total = node.distribution[0] + node.distribution[1] + node.distribution[2];
                    if (std::fabs(total - 1.0) > 1e-9)
                        throw ValidationError("model file: leaf distribution does not sum to 1");
                } else {
                    node.feature = jn.at("feature").get<int>();
                    node.threshold = jn.at("threshold").get<double>();
                    node.left = jn.at("left").get<int>();
                    node.right = jn.at("right").get<int>();
                    if (node.feature < 0 || static_cast<std::size_t>(node.feature) >= model.num_features)
                        throw ValidationError("model file: node references invalid feature index");
                }
                tree.nodes.push_back(node);
            }
            if (tree.nodes.empty()) throw ValidationError("model file: empty tree");
            for (const TreeNode& node : tree.nodes)
                if (node.feature >= 0 &&
                    (node.left < 0 || node.right < 0 || node.left >= static_cast<int>(tree.nodes.size()) ||
                     node.right >= static_cast<int>(tree.nodes.size())))
                    throw ValidationError("model file: node references invalid child index");
            model.trees.push_back(std::move(tree));
        }
    } catch (const ordered_json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
    if (model.trees.empty()) throw ValidationError("model file: no trees");
    return model;
}

}  // namespace asrfeat
