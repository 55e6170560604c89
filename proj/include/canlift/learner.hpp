#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "canlift/config.hpp"
#include "canlift/decomposer.hpp"
#include "canlift/features.hpp"
#include "canlift/rng.hpp"

namespace canlift {

constexpr uint16_t kLeafMarker = 0xFFFF;

struct TreeNode {
    uint16_t feature = kLeafMarker; // kLeafMarker for leaves
    double threshold = 0.0;         // go left when x[feature] <= threshold
    uint32_t left = 0;
    uint32_t right = 0;
    double leaf_p = 0.0; // positive-class probability at leaves
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    double predict_p(std::span<const double> x) const;
    bool predict(std::span<const double> x) const { return predict_p(x) >= 0.5; }
};

struct TrainingRow {
    std::span<const double> x;
    uint8_t label; // 1 positive, 0 negative
};

struct TrainStats {
    std::vector<double> importance; // impurity decrease per feature, unnormalized
};

// Greedy CART on Gini impurity over a random ceil(sqrt(d)) feature subset
// per node; stops at max_depth, min_samples_leaf, or a pure node.
DecisionTree train_tree(std::span<const TrainingRow> rows, const ForestParams& params, Rng& rng,
                        TrainStats* stats = nullptr);

struct Forest {
    std::vector<DecisionTree> trees;
    ForestParams params;
    uint64_t seed = 0;
    std::string positive_label;
    FeatureSpec spec;
    uint64_t config_hash = 0;
    std::vector<double> importance_sum; // per feature, accumulated at training time
    double oob_accuracy = -1.0;         // out-of-bag majority-vote accuracy; -1 without bootstrap

    // Hard majority vote over trees.
    bool predict(std::span<const double> x) const;
    size_t positive_trees(std::span<const double> x) const;
};

// Balances classes by seeded downsampling of the larger one, then trains
// n_trees on independent bootstrap resamples. Per-tree generators are split
// from the master seed, so the parallel and serial paths build identical
// forests.
Forest train_forest(const std::vector<std::vector<double>>& positives,
                    const std::vector<std::vector<double>>& negatives, const ForestParams& params,
                    uint64_t seed, bool parallel = true);

// Mean impurity decrease per feature, normalized to sum to 1, descending.
std::vector<std::pair<Feature, double>> feature_importances(const Forest& forest);

struct CandidateVotes {
    SeriesId id;
    size_t votes = 0;   // windows classified positive
    size_t windows = 0; // windows evaluated
};

struct MatchReport {
    std::string signal_name;
    uint64_t config_hash = 0;
    std::vector<CandidateVotes> ranked; // votes descending, ties by identity
    size_t total_votes = 0;
    size_t total_windows = 0;

    std::optional<size_t> rank_of_truth;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> gap;
};

// Decomposes, windows and classifies every candidate of the target log with
// the model's feature spec; votes(candidate) = positive windows.
MatchReport locate_signal(const Forest& model, const CanLog& target, const PipelineConfig& cfg);
// Same, from already-decomposed candidates.
MatchReport locate_signal(const Forest& model, const std::vector<CandidateSeries>& candidates,
                          const PipelineConfig& cfg);

struct Evaluation {
    size_t rank = 0;
    double precision = 0.0;
    double recall = 0.0;
    double gap = 0.0;
};

// `truth` holds every candidate identity that carries the target signal
// (sensors often appear under several spans); `primary` is the exact
// location and drives recall. The gap is computed against the best-ranked
// candidate outside the truth set and clamped at 0.
Evaluation evaluate(const MatchReport& report, const std::set<SeriesId>& truth,
                    const SeriesId& primary);
Evaluation evaluate(const MatchReport& report, const SeriesId& truth);

// Feature matrix helpers shared by training and the CLI.
std::vector<FeatureVector> candidate_feature_vectors(const CandidateSeries& candidate,
                                                     const PipelineConfig& cfg,
                                                     const FeatureSpec& spec);

// Versioned binary model file (.cmf).
void save_model(const Forest& forest, const std::string& path);
Forest load_model(const std::string& path);

} // namespace canlift
