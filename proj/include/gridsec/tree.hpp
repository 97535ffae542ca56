#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gridsec/dataset.hpp"
#include "gridsec/rng.hpp"

namespace gridsec {

enum class SplitCriterion { Gini, GainRatio, Variance };
enum class ThresholdMode { Exhaustive, RandomOnePerAttribute };

struct TreeParams {
    SplitCriterion criterion = SplitCriterion::Gini;
    int max_depth = 0;  // 0 = unlimited
    int min_samples_leaf = 1;
    int mtry = 0;  // attributes tried per split, 0 = all
    ThresholdMode threshold_mode = ThresholdMode::Exhaustive;
    std::uint64_t rng_seed = 0;
};

struct SplitRule {
    int attribute = -1;
    double threshold = 0.0;  // value <= threshold goes left
    bool default_left = true;  // direction for missing values
};

struct TreeNode {
    SplitRule rule;
    std::int32_t left = -1, right = -1;  // node indices, -1 at leaves
    double impurity_decrease = 0.0;      // gini decrease (classification) or
                                         // variance decrease (regression)
    int n_samples = 0;
    std::array<double, kNumClasses> class_counts{};  // weighted
    double value = 0.0;                              // regression leaf value

    bool is_leaf() const { return left < 0; }
};

// Binary axis-aligned tree; nodes[0] is the root, children follow their
// parent (left subtree first). Immutable once grown.
struct Tree {
    std::vector<TreeNode> nodes;
};

// Column-major training snapshot shared by all trees of an ensemble.
class TrainingView {
public:
    explicit TrainingView(const Dataset& data);

    int n() const { return n_; }
    int p() const { return p_; }
    double value(int sample, int attr) const { return columns_[static_cast<std::size_t>(attr)][static_cast<std::size_t>(sample)]; }
    bool missing(int sample, int attr) const {
        return has_missing_ && missing_[static_cast<std::size_t>(attr) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(sample)] != 0;
    }
    int label(int sample) const { return labels_[static_cast<std::size_t>(sample)]; }

private:
    int n_ = 0, p_ = 0;
    bool has_missing_ = false;
    std::vector<std::vector<double>> columns_;
    std::vector<std::uint8_t> missing_;
    std::vector<int> labels_;
};

// gini impurity 1 - sum((n_c/n)^2); throws on an empty count vector
double gini_impurity(std::span<const double> class_counts);

struct SplitChoice {
    SplitRule rule;
    double gain = 0.0;               // criterion value used for selection
    double impurity_decrease = 0.0;  // recorded on the node
};

// Best split over the candidate attributes, or nothing when no split
// improves the criterion. Exhaustive mode scans midpoints between
// consecutive distinct values; random mode draws one uniform threshold per
// attribute (Extra-Trees style). Ties break on lowest attribute index,
// then lowest threshold. `targets` supplies regression responses for the
// variance criterion; it is ignored otherwise.
std::optional<SplitChoice> best_split(const TrainingView& view, std::span<const int> node_samples,
                                      std::span<const double> sample_weights, std::span<const int> candidate_attributes,
                                      SplitCriterion criterion, ThresholdMode mode, int min_samples_leaf, Rng& rng,
                                      std::span<const double> targets = {});

// Recursive partitioning with per-sample weights (all 1 for plain CART).
Tree grow_tree(const TrainingView& view, std::span<const int> samples, std::span<const double> weights,
               const TreeParams& params, std::span<const double> targets = {});

// Dataset-level convenience wrapper.
Tree grow_tree(const Dataset& train, const TreeParams& params);

// Per-class probability scores at the leaf reached by x; missing attributes
// follow the stored default direction.
std::array<double, kNumClasses> predict_tree(const Tree& tree, const FeatureVector& x);

// Regression prediction (boosting residual trees).
double predict_tree_value(const Tree& tree, const FeatureVector& x);

// Leaf index reached by training-matrix row `sample`.
int tree_leaf_index(const Tree& tree, const TrainingView& view, int sample);

}  // namespace gridsec
