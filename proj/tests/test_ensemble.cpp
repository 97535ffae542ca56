#include <doctest.h>

#include <cmath>
#include <sstream>

#include "gridsec/ensemble.hpp"

using namespace gridsec;

namespace {

Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
    Dataset d;
    const std::size_t p = rows.empty() ? 0 : rows[0].size();
    for (std::size_t a = 0; a < p; ++a) d.schema.push_back("x" + std::to_string(a));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        LabeledSample s;
        s.features.values = rows[i];
        s.features.missing.assign(p, 0);
        s.label = static_cast<SecurityClass>(labels[i]);
        const double si_for_class[] = {0.0, 3.0, 10.0, 20.0};
        s.si = si_for_class[labels[i]];
        d.samples.push_back(std::move(s));
    }
    return d;
}

// blobs: 4 well-separated clusters, one per class
Dataset blob_dataset(int per_class, std::uint64_t seed, int n_classes = 4) {
    Rng rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    const double centers[4][2] = {{0, 0}, {10, 0}, {0, 10}, {10, 10}};
    for (int k = 0; k < n_classes; ++k)
        for (int i = 0; i < per_class; ++i) {
            rows.push_back({centers[k][0] + rng.next_double() * 2.0, centers[k][1] + rng.next_double() * 2.0});
            labels.push_back(k);
        }
    return make_dataset(rows, labels);
}

std::string serialized(const EnsembleModel& m) {
    std::ostringstream out;
    save_model(out, m);
    return out.str();
}

double train_accuracy(const EnsembleModel& m, const Dataset& d) {
    int hit = 0;
    for (const auto& s : d.samples)
        if (predict_ensemble(m, s.features).label == s.label) ++hit;
    return static_cast<double>(hit) / static_cast<double>(d.size());
}

}  // namespace

TEST_CASE("bagging with one tree and no bootstrap equals the single tree") {
    Dataset d = blob_dataset(12, 3);
    EnsembleParams params;
    params.n_trees = 1;
    params.bootstrap = false;
    params.master_seed = 99;
    EnsembleModel bag = train_bagging(d, params);
    Tree single = grow_tree(d, bag.params.tree_params);
    REQUIRE(bag.trees.size() == 1);
    REQUIRE(bag.trees[0].nodes.size() == single.nodes.size());
    for (const auto& s : d.samples) {
        auto via_bag = predict_ensemble(bag, s.features);
        auto via_tree = predict_tree(single, s.features);
        for (int k = 0; k < kNumClasses; ++k)
            CHECK(via_bag.scores[static_cast<std::size_t>(k)] == doctest::Approx(via_tree[static_cast<std::size_t>(k)]));
    }
}

TEST_CASE("same master seed reproduces the identical serialized model") {
    Dataset d = blob_dataset(10, 7);
    EnsembleParams params;
    params.n_trees = 12;
    params.master_seed = 1234;
    CHECK(serialized(train_bagging(d, params)) == serialized(train_bagging(d, params)));
    CHECK(serialized(train_random_forest(d, params)) == serialized(train_random_forest(d, params)));
    CHECK(serialized(train_extra_trees(d, params)) == serialized(train_extra_trees(d, params)));
    CHECK(serialized(train_adaboost(d, params)) == serialized(train_adaboost(d, params)));
    EnsembleParams sgb = params;
    sgb.n_trees = 5;
    CHECK(serialized(train_sgb(d, sgb)) == serialized(train_sgb(d, sgb)));
}

TEST_CASE("training is invariant to the worker count") {
    Dataset d = blob_dataset(10, 11);
    EnsembleParams params;
    params.n_trees = 8;
    params.master_seed = 5150;
    CHECK(serialized(train_random_forest(d, params, 1)) == serialized(train_random_forest(d, params, 4)));
    EnsembleParams sgb = params;
    sgb.n_trees = 4;
    CHECK(serialized(train_sgb(d, sgb, 1)) == serialized(train_sgb(d, sgb, 4)));
}

TEST_CASE("rf with mtry = p and bootstrap behaves like bagging") {
    Dataset d = blob_dataset(10, 19);
    EnsembleParams params;
    params.n_trees = 6;
    params.master_seed = 31337;
    params.tree_params.mtry = static_cast<int>(d.n_attributes());
    EnsembleModel rf = train_random_forest(d, params);
    EnsembleModel bag = train_bagging(d, params);
    for (const auto& s : d.samples)
        CHECK(predict_ensemble(rf, s.features).label == predict_ensemble(bag, s.features).label);
}

TEST_CASE("out-of-bag error approximates training-set error on separable blobs") {
    Dataset d = blob_dataset(40, 23);
    EnsembleParams params;
    params.n_trees = 30;
    params.master_seed = 4;
    EnsembleModel rf = train_random_forest(d, params);
    REQUIRE(rf.oob_error.has_value());
    CHECK(*rf.oob_error <= 0.05);  // blobs are trivially separable
}

TEST_CASE("extra trees train clean without bootstrap") {
    Dataset d = blob_dataset(12, 27);
    EnsembleParams params;
    params.n_trees = 10;
    params.bootstrap = false;
    params.master_seed = 8;
    EnsembleModel et = train_extra_trees(d, params);
    CHECK(train_accuracy(et, d) == doctest::Approx(1.0));
    // randomized thresholds: trees differ from one another
    bool any_different = false;
    for (std::size_t t = 1; t < et.trees.size(); ++t)
        if (et.trees[t].nodes.size() != et.trees[0].nodes.size() ||
            et.trees[t].nodes[0].rule.threshold != et.trees[0].nodes[0].rule.threshold)
            any_different = true;
    CHECK(any_different);
}

TEST_CASE("adaboost drives training error to zero on separable data") {
    Dataset d = blob_dataset(15, 37, 2);
    EnsembleParams params;
    params.n_trees = 10;
    params.master_seed = 12;
    params.tree_params.max_depth = 1;  // stumps suffice for blobs
    EnsembleModel ada = train_adaboost(d, params);
    CHECK(ada.trees.size() <= 5);
    CHECK(train_accuracy(ada, d) == doctest::Approx(1.0));
    for (double alpha : ada.tree_weights) {
        CHECK(std::isfinite(alpha));
        CHECK(alpha > 0.0);
    }
}

TEST_CASE("adaboost stage weights stay positive while stages are kept") {
    Dataset d = blob_dataset(10, 41);
    EnsembleParams params;
    params.n_trees = 15;
    params.master_seed = 3;
    params.tree_params.max_depth = 2;
    EnsembleModel ada = train_adaboost(d, params);
    REQUIRE_FALSE(ada.trees.empty());
    for (double alpha : ada.tree_weights) CHECK(alpha > 0.0);
}

TEST_CASE("sgb with zero learning rate predicts the class priors") {
    Dataset d = make_dataset({{1}, {2}, {3}, {4}, {5}, {6}, {7}, {8}, {9}, {10}},
                             {0, 0, 0, 0, 0, 1, 1, 1, 2, 3});
    EnsembleParams params;
    params.n_trees = 1;
    params.learning_rate = 0.0;
    params.sample_fraction = 1.0;
    params.master_seed = 5;
    EnsembleModel sgb = train_sgb(d, params);
    auto pred = predict_ensemble(sgb, d.samples[0].features);
    CHECK(pred.scores[0] == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(pred.scores[1] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(pred.scores[2] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(pred.scores[3] == doctest::Approx(0.1).epsilon(1e-9));
}

TEST_CASE("sgb training deviance is non-increasing at full sample fraction") {
    Dataset d = blob_dataset(15, 43);
    EnsembleParams params;
    params.n_trees = 12;
    params.sample_fraction = 1.0;
    params.learning_rate = 0.1;
    params.master_seed = 6;
    EnsembleModel sgb = train_sgb(d, params);
    REQUIRE(sgb.train_deviance.size() == 12);
    for (std::size_t m = 1; m < sgb.train_deviance.size(); ++m)
        CHECK(sgb.train_deviance[m] <= sgb.train_deviance[m - 1] + 1e-12);
    CHECK(train_accuracy(sgb, d) == doctest::Approx(1.0));
}

TEST_CASE("prediction aggregation") {
    SUBCASE("ensemble of identical trees predicts like one tree") {
        Dataset d = blob_dataset(8, 47);
        EnsembleParams params;
        params.n_trees = 5;
        params.bootstrap = false;  // identical deterministic trees
        params.master_seed = 2;
        EnsembleModel bag = train_bagging(d, params);
        Tree single = grow_tree(d, bag.params.tree_params);
        for (const auto& s : d.samples) {
            auto a = predict_ensemble(bag, s.features);
            auto b = predict_tree(single, s.features);
            for (int k = 0; k < kNumClasses; ++k)
                CHECK(a.scores[static_cast<std::size_t>(k)] == doctest::Approx(b[static_cast<std::size_t>(k)]));
        }
    }
    SUBCASE("score vectors are normalized probabilities") {
        Dataset d = blob_dataset(8, 53);
        EnsembleParams params;
        params.n_trees = 7;
        params.master_seed = 11;
        for (const auto& model : {train_random_forest(d, params), train_extra_trees(d, params)}) {
            for (const auto& s : d.samples) {
                auto pred = predict_ensemble(model, s.features);
                double sum = 0.0;
                for (double v : pred.scores) {
                    CHECK(v >= 0.0);
                    sum += v;
                }
                CHECK(sum == doctest::Approx(1.0));
            }
        }
    }
    SUBCASE("ties break toward the more severe class") {
        // hand-built model: two single-leaf trees voting for different classes
        EnsembleModel m;
        m.algorithm = EnsembleAlgorithm::BaggedCart;
        m.schema = {"x0"};
        for (int cls : {1, 2}) {  // alarm vs emergency1
            Tree t;
            TreeNode leaf;
            leaf.n_samples = 1;
            leaf.class_counts[static_cast<std::size_t>(cls)] = 1.0;
            t.nodes.push_back(leaf);
            m.trees.push_back(t);
            m.tree_weights.push_back(1.0);
        }
        FeatureVector x;
        x.values = {0.0};
        auto pred = predict_ensemble(m, x);
        CHECK(pred.label == SecurityClass::Emergency1);
        CHECK(pred.scores[1] == doctest::Approx(pred.scores[2]));
    }
    SUBCASE("schema mismatch throws") {
        Dataset d = blob_dataset(5, 59);
        EnsembleParams params;
        params.n_trees = 1;
        params.master_seed = 1;
        EnsembleModel m = train_bagging(d, params);
        FeatureVector bad;
        bad.values = {1.0, 2.0, 3.0};
        CHECK_THROWS_AS(predict_ensemble(m, bad), std::invalid_argument);
    }
}

TEST_CASE("staged test error") {
    Dataset train = blob_dataset(20, 61);
    Dataset test = blob_dataset(10, 67);
    EnsembleParams params;
    params.n_trees = 15;
    params.master_seed = 21;
    EnsembleModel rf = train_random_forest(train, params);
    auto table = staged_test_error(rf, test);
    REQUIRE(table.t.size() == 15);
    CHECK(table.t.front() == 1);
    CHECK(table.t.back() == 15);
    // last entry equals the full-model error
    int miss = 0;
    for (const auto& s : test.samples)
        if (predict_ensemble(rf, s.features).label != s.label) ++miss;
    CHECK(table.overall_error.back() ==
          doctest::Approx(static_cast<double>(miss) / static_cast<double>(test.size())));
    // per-class curves exist for all four classes
    for (int k = 0; k < kNumClasses; ++k) REQUIRE(table.class_error[static_cast<std::size_t>(k)].size() == 15);

    SUBCASE("single-tree model yields a one-row table") {
        EnsembleParams one;
        one.n_trees = 1;
        one.master_seed = 2;
        EnsembleModel single = train_bagging(train, one);
        auto t1 = staged_test_error(single, test);
        CHECK(t1.t.size() == 1);
    }
    SUBCASE("sgb is staged per boosting stage") {
        EnsembleParams sgb_params;
        sgb_params.n_trees = 6;
        sgb_params.master_seed = 23;
        EnsembleModel sgb = train_sgb(train, sgb_params);
        auto ts = staged_test_error(sgb, test);
        CHECK(ts.t.size() == 6);
        int miss2 = 0;
        for (const auto& s : test.samples)
            if (predict_ensemble(sgb, s.features).label != s.label) ++miss2;
        CHECK(ts.overall_error.back() ==
              doctest::Approx(static_cast<double>(miss2) / static_cast<double>(test.size())));
    }
}

TEST_CASE("variable importance") {
    SUBCASE("unused attribute has zero importance") {
        // only attribute 0 is informative
        Dataset d = make_dataset({{1, 5}, {2, 5}, {3, 5}, {11, 5}, {12, 5}, {13, 5}}, {0, 0, 0, 1, 1, 1});
        EnsembleParams params;
        params.n_trees = 5;
        params.bootstrap = false;
        params.master_seed = 3;
        EnsembleModel bag = train_bagging(d, params);
        auto imp = variable_importance(bag);
        REQUIRE(imp.attribute.size() == 2);
        CHECK(imp.attribute[0] == 0);
        CHECK(imp.overall[1] == doctest::Approx(0.0));
        for (int k = 0; k < kNumClasses; ++k)
            for (double v : imp.per_class[static_cast<std::size_t>(k)]) CHECK(v >= 0.0);
    }
    SUBCASE("single split holds all the importance") {
        Dataset d = make_dataset({{1}, {2}, {9}, {10}}, {0, 0, 3, 3});
        EnsembleParams params;
        params.n_trees = 1;
        params.bootstrap = false;
        params.master_seed = 1;
        EnsembleModel m = train_bagging(d, params);
        auto imp = variable_importance(m);
        CHECK(imp.overall[0] > 0.0);
        // gini decrease of the perfect binary split of a 50/50 node is 0.5
        CHECK(imp.overall[0] == doctest::Approx(0.5));
    }
    SUBCASE("importances are sorted descending") {
        Dataset d = blob_dataset(15, 71);
        EnsembleParams params;
        params.n_trees = 8;
        params.master_seed = 17;
        auto imp = variable_importance(train_random_forest(d, params));
        for (std::size_t i = 1; i < imp.overall.size(); ++i) CHECK(imp.overall[i - 1] >= imp.overall[i]);
    }
}

TEST_CASE("model serialization round-trips bit-exactly") {
    Dataset d = blob_dataset(10, 73);
    for (EnsembleAlgorithm alg : {EnsembleAlgorithm::RandomForest, EnsembleAlgorithm::AdaBoost, EnsembleAlgorithm::Sgb,
                                  EnsembleAlgorithm::SingleJ48}) {
        EnsembleParams params;
        params.n_trees = alg == EnsembleAlgorithm::Sgb ? 3 : 5;
        params.master_seed = 29;
        EnsembleModel m = train_algorithm(alg, d, params);
        std::stringstream buf(serialized(m));
        EnsembleModel loaded = load_model(buf);
        CHECK(serialized(loaded) == serialized(m));
        for (const auto& s : d.samples)
            CHECK(predict_ensemble(loaded, s.features).label == predict_ensemble(m, s.features).label);
    }
}
