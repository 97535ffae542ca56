#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridsec/tree.hpp"

namespace gridsec {

enum class EnsembleAlgorithm { SingleCart, SingleJ48, BaggedCart, RandomForest, ExtraTrees, AdaBoost, Sgb };

const char* algorithm_name(EnsembleAlgorithm a);
EnsembleAlgorithm algorithm_from_name(const std::string& name);

struct EnsembleParams {
    int n_trees = 100;
    TreeParams tree_params;        // template; per-tree seeds are derived
    bool bootstrap = true;         // bagging family
    double sample_fraction = 0.5;  // boosting stage subsample
    double learning_rate = 0.1;    // boosting shrinkage
    std::uint64_t master_seed = 1;
};

// Trained composition of base trees: per-tree weights realize the score
// aggregation, boosting keeps one tree per class and stage. Immutable and
// safe for concurrent prediction.
struct EnsembleModel {
    EnsembleAlgorithm algorithm = EnsembleAlgorithm::RandomForest;
    std::vector<Tree> trees;           // boosting: stage-major, K per stage
    std::vector<double> tree_weights;  // all 1 for the bagging family
    std::array<double, kNumClasses> base_scores{};  // boosting prior scores
    double learning_rate = 0.1;
    std::vector<std::string> schema;
    EnsembleParams params;
    std::optional<double> oob_error;          // bagging family with bootstrap
    std::vector<double> train_deviance;       // boosting: per-stage deviance
    std::vector<std::string> diagnostics;

    int n_stages() const {
        return algorithm == EnsembleAlgorithm::Sgb ? static_cast<int>(trees.size()) / kNumClasses
                                                   : static_cast<int>(trees.size());
    }
};

// Trained models are identical for a fixed master seed at any worker count
// (per-tree seeds are derived, never shared).

// Bagged CART: bootstrap resamples, all attributes per split.
EnsembleModel train_bagging(const Dataset& train, const EnsembleParams& params, int workers = 1);

// Random Forest: bootstrap + per-node random attribute subset
// (default floor(sqrt(p))).
EnsembleModel train_random_forest(const Dataset& train, const EnsembleParams& params, int workers = 1);

// Extremely Randomized Trees: full sample per tree, random attribute
// subset, one uniform threshold per candidate attribute.
EnsembleModel train_extra_trees(const Dataset& train, const EnsembleParams& params, int workers = 1);

// Multiclass AdaBoost (SAMME) over depth-limited trees. Stages are
// inherently sequential.
EnsembleModel train_adaboost(const Dataset& train, const EnsembleParams& params);

// Stochastic gradient boosting with multinomial deviance: one
// variance-criterion regression tree per class and stage, Newton leaf
// values, shrinkage, subsampling without replacement. Stages are
// sequential; the per-class trees of a stage train in parallel.
EnsembleModel train_sgb(const Dataset& train, const EnsembleParams& params, int workers = 1);

// Single-tree models share the ensemble interface (N = 1, weight 1).
EnsembleModel train_single_tree(const Dataset& train, const EnsembleParams& params, SplitCriterion criterion);

EnsembleModel train_algorithm(EnsembleAlgorithm algorithm, const Dataset& train, const EnsembleParams& params,
                              int workers = 1);

struct Prediction {
    SecurityClass label;
    std::array<double, kNumClasses> scores;
};

// Aggregated prediction; score ties resolve toward the more severe class.
Prediction predict_ensemble(const EnsembleModel& model, const FeatureVector& x);

struct StagedErrorTable {
    std::vector<int> t;                                       // prefix sizes 1..N
    std::vector<double> overall_error;                        // fraction
    std::array<std::vector<double>, kNumClasses> class_error; // -1 when class absent
};

// Test error as a function of the ensemble prefix size (first t trees or
// boosting stages).
StagedErrorTable staged_test_error(const EnsembleModel& model, const Dataset& test);

struct ImportanceReport {
    std::vector<int> attribute;    // schema indices, sorted by descending overall importance
    std::vector<double> overall;
    std::array<std::vector<double>, kNumClasses> per_class;
};

// Mean decrease impurity: per attribute, the mean over trees of the summed
// node-weighted impurity decreases. The per-class split attributes each
// node's decrease by its class-wise impurity change (clamped at zero).
ImportanceReport variable_importance(const EnsembleModel& model);

// Versioned text serialization; loading reproduces the model bit-exactly.
void save_model(std::ostream& out, const EnsembleModel& model);
EnsembleModel load_model(std::istream& in);

}  // namespace gridsec
