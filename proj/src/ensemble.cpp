#include "gridsec/ensemble.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "gridsec/parallel.hpp"

namespace gridsec {

const char* algorithm_name(EnsembleAlgorithm a) {
    switch (a) {
        case EnsembleAlgorithm::SingleCart: return "cart";
        case EnsembleAlgorithm::SingleJ48: return "j48";
        case EnsembleAlgorithm::BaggedCart: return "bcart";
        case EnsembleAlgorithm::RandomForest: return "rf";
        case EnsembleAlgorithm::ExtraTrees: return "et";
        case EnsembleAlgorithm::AdaBoost: return "adaboost";
        case EnsembleAlgorithm::Sgb: return "sgb";
    }
    return "?";
}

EnsembleAlgorithm algorithm_from_name(const std::string& name) {
    for (EnsembleAlgorithm a :
         {EnsembleAlgorithm::SingleCart, EnsembleAlgorithm::SingleJ48, EnsembleAlgorithm::BaggedCart,
          EnsembleAlgorithm::RandomForest, EnsembleAlgorithm::ExtraTrees, EnsembleAlgorithm::AdaBoost,
          EnsembleAlgorithm::Sgb})
        if (name == algorithm_name(a)) return a;
    throw std::invalid_argument("unknown algorithm '" + name + "'");
}

namespace {

constexpr int kK = kNumClasses;

SecurityClass argmax_severe(const std::array<double, kK>& scores) {
    int best = kK - 1;
    double best_score = scores[static_cast<std::size_t>(best)];
    for (int k = kK - 2; k >= 0; --k)
        if (scores[static_cast<std::size_t>(k)] > best_score) {
            best = k;
            best_score = scores[static_cast<std::size_t>(k)];
        }
    return static_cast<SecurityClass>(best);
}

std::vector<int> bootstrap_indices(int n, Rng& rng) {
    std::vector<int> out(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n)));
    return out;
}

int default_mtry(int p) { return std::max(1, static_cast<int>(std::floor(std::sqrt(static_cast<double>(p))))); }

SecurityClass tree_vote(const Tree& tree, const TrainingView& view, int sample) {
    const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree_leaf_index(tree, view, sample))];
    std::array<double, kK> scores{};
    double tot = 0.0;
    for (int k = 0; k < kK; ++k) tot += leaf.class_counts[static_cast<std::size_t>(k)];
    for (int k = 0; k < kK; ++k)
        scores[static_cast<std::size_t>(k)] = tot > 0 ? leaf.class_counts[static_cast<std::size_t>(k)] / tot : 0.0;
    return argmax_severe(scores);
}

EnsembleModel train_bagging_family(EnsembleAlgorithm algorithm, const Dataset& train, const EnsembleParams& params,
                                   int workers) {
    if (train.size() == 0) throw std::invalid_argument("empty training set");
    EnsembleModel model;
    model.algorithm = algorithm;
    model.schema = train.schema;
    model.params = params;
    model.learning_rate = params.learning_rate;

    TrainingView view(train);
    const int n = view.n();
    TreeParams proto = params.tree_params;
    if (algorithm == EnsembleAlgorithm::BaggedCart) {
        proto.mtry = 0;
        proto.criterion = SplitCriterion::Gini;
        proto.threshold_mode = ThresholdMode::Exhaustive;
    } else if (algorithm == EnsembleAlgorithm::RandomForest) {
        if (proto.mtry == 0) proto.mtry = default_mtry(view.p());
        proto.criterion = SplitCriterion::Gini;
        proto.threshold_mode = ThresholdMode::Exhaustive;
    } else if (algorithm == EnsembleAlgorithm::ExtraTrees) {
        if (proto.mtry == 0) proto.mtry = default_mtry(view.p());
        proto.criterion = SplitCriterion::Gini;
        proto.threshold_mode = ThresholdMode::RandomOnePerAttribute;
    }

    const std::vector<double> unit_weights(static_cast<std::size_t>(n), 1.0);
    std::vector<int> full(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) full[static_cast<std::size_t>(i)] = i;

    model.trees.resize(static_cast<std::size_t>(params.n_trees));
    parallel_for(params.n_trees, workers, [&](int t) {
        const std::uint64_t seed_t = mix_seed(params.master_seed, static_cast<std::uint64_t>(t));
        TreeParams tp = proto;
        tp.rng_seed = mix_seed(seed_t, 2);
        if (params.bootstrap) {
            Rng rng(mix_seed(seed_t, 1));
            auto indices = bootstrap_indices(n, rng);
            model.trees[static_cast<std::size_t>(t)] = grow_tree(view, indices, unit_weights, tp);
        } else {
            model.trees[static_cast<std::size_t>(t)] = grow_tree(view, full, unit_weights, tp);
        }
    });
    model.tree_weights.assign(static_cast<std::size_t>(params.n_trees), 1.0);

    if (params.bootstrap) {
        // out-of-bag estimate; in-bag sets are re-derived from the seeds
        std::vector<std::array<double, kK>> votes(static_cast<std::size_t>(n));
        std::vector<int> n_oob(static_cast<std::size_t>(n), 0);
        std::vector<char> in_bag(static_cast<std::size_t>(n));
        for (int t = 0; t < params.n_trees; ++t) {
            const std::uint64_t seed_t = mix_seed(params.master_seed, static_cast<std::uint64_t>(t));
            Rng rng(mix_seed(seed_t, 1));
            std::fill(in_bag.begin(), in_bag.end(), 0);
            for (int d = 0; d < n; ++d) in_bag[static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(n)))] = 1;
            const Tree& tree = model.trees[static_cast<std::size_t>(t)];
            for (int i = 0; i < n; ++i) {
                if (in_bag[static_cast<std::size_t>(i)]) continue;
                const TreeNode& leaf = tree.nodes[static_cast<std::size_t>(tree_leaf_index(tree, view, i))];
                double tot = 0.0;
                for (double c : leaf.class_counts) tot += c;
                if (tot <= 0) continue;
                for (int k = 0; k < kK; ++k)
                    votes[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] += leaf.class_counts[static_cast<std::size_t>(k)] / tot;
                ++n_oob[static_cast<std::size_t>(i)];
            }
        }
        int miss = 0, counted = 0;
        for (int i = 0; i < n; ++i) {
            if (n_oob[static_cast<std::size_t>(i)] == 0) continue;
            ++counted;
            if (static_cast<int>(argmax_severe(votes[static_cast<std::size_t>(i)])) != view.label(i)) ++miss;
        }
        if (counted > 0) model.oob_error = static_cast<double>(miss) / static_cast<double>(counted);
    }
    return model;
}

}  // namespace

EnsembleModel train_bagging(const Dataset& train, const EnsembleParams& params, int workers) {
    return train_bagging_family(EnsembleAlgorithm::BaggedCart, train, params, workers);
}

EnsembleModel train_random_forest(const Dataset& train, const EnsembleParams& params, int workers) {
    return train_bagging_family(EnsembleAlgorithm::RandomForest, train, params, workers);
}

EnsembleModel train_extra_trees(const Dataset& train, const EnsembleParams& params, int workers) {
    return train_bagging_family(EnsembleAlgorithm::ExtraTrees, train, params, workers);
}

EnsembleModel train_single_tree(const Dataset& train, const EnsembleParams& params, SplitCriterion criterion) {
    EnsembleParams single = params;
    single.n_trees = 1;
    single.bootstrap = false;
    single.tree_params.criterion = criterion;
    single.tree_params.threshold_mode = ThresholdMode::Exhaustive;
    single.tree_params.mtry = 0;
    EnsembleModel model = train_bagging_family(
        criterion == SplitCriterion::GainRatio ? EnsembleAlgorithm::SingleJ48 : EnsembleAlgorithm::SingleCart, train,
        single, 1);
    return model;
}

EnsembleModel train_adaboost(const Dataset& train, const EnsembleParams& params) {
    if (train.size() == 0) throw std::invalid_argument("empty training set");
    EnsembleModel model;
    model.algorithm = EnsembleAlgorithm::AdaBoost;
    model.schema = train.schema;
    model.params = params;
    model.learning_rate = params.learning_rate;

    TrainingView view(train);
    const int n = view.n();

    std::vector<char> class_present(kK, 0);
    for (int i = 0; i < n; ++i) class_present[static_cast<std::size_t>(view.label(i))] = 1;
    const int k_classes = std::max(2, static_cast<int>(std::count(class_present.begin(), class_present.end(), 1)));
    const double chance_bound = 1.0 - 1.0 / static_cast<double>(k_classes);
    const double log_km1 = std::log(static_cast<double>(k_classes) - 1.0);

    TreeParams proto = params.tree_params;
    if (proto.max_depth == 0) proto.max_depth = 3;

    std::vector<double> w(static_cast<std::size_t>(n), 1.0 / static_cast<double>(n));
    std::vector<int> full(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) full[static_cast<std::size_t>(i)] = i;
    std::vector<char> missed(static_cast<std::size_t>(n));

    for (int stage = 0; stage < params.n_trees; ++stage) {
        TreeParams tp = proto;
        tp.rng_seed = mix_seed(params.master_seed, static_cast<std::uint64_t>(stage));
        Tree tree = grow_tree(view, full, w, tp);

        double err = 0.0;
        for (int i = 0; i < n; ++i) {
            missed[static_cast<std::size_t>(i)] = static_cast<int>(tree_vote(tree, view, i)) != view.label(i);
            if (missed[static_cast<std::size_t>(i)]) err += w[static_cast<std::size_t>(i)];
        }

        if (err <= 0.0) {
            // perfect stage: keep with a capped weight, nothing left to boost
            constexpr double kEpsErr = 1e-10;
            model.trees.push_back(std::move(tree));
            model.tree_weights.push_back(std::log((1.0 - kEpsErr) / kEpsErr) + log_km1);
            break;
        }
        if (err >= chance_bound) {
            if (stage == 0) {
                model.diagnostics.push_back("weak learner no better than chance at stage 1");
                model.trees.push_back(std::move(tree));
                model.tree_weights.push_back(1e-6);
            }
            break;
        }
        const double alpha = std::log((1.0 - err) / err) + log_km1;
        model.trees.push_back(std::move(tree));
        model.tree_weights.push_back(alpha);

        double wsum = 0.0;
        for (int i = 0; i < n; ++i) {
            if (missed[static_cast<std::size_t>(i)]) w[static_cast<std::size_t>(i)] *= std::exp(alpha);
            wsum += w[static_cast<std::size_t>(i)];
        }
        for (double& wi : w) wi /= wsum;
    }
    return model;
}

namespace {

std::array<double, kNumClasses> softmax(const std::array<double, kNumClasses>& f) {
    std::array<double, kNumClasses> p{};
    double mx = f[0];
    for (double v : f) mx = std::max(mx, v);
    double sum = 0.0;
    for (int k = 0; k < kNumClasses; ++k) {
        p[static_cast<std::size_t>(k)] = std::exp(f[static_cast<std::size_t>(k)] - mx);
        sum += p[static_cast<std::size_t>(k)];
    }
    for (double& v : p) v /= sum;
    return p;
}

}  // namespace

EnsembleModel train_sgb(const Dataset& train, const EnsembleParams& params, int workers) {
    if (train.size() == 0) throw std::invalid_argument("empty training set");
    EnsembleModel model;
    model.algorithm = EnsembleAlgorithm::Sgb;
    model.schema = train.schema;
    model.params = params;
    model.learning_rate = params.learning_rate;

    TrainingView view(train);
    const int n = view.n();

    std::array<double, kK> prior{};
    for (int i = 0; i < n; ++i) prior[static_cast<std::size_t>(view.label(i))] += 1.0;
    for (int k = 0; k < kK; ++k)
        model.base_scores[static_cast<std::size_t>(k)] =
            std::log(std::max(prior[static_cast<std::size_t>(k)] / static_cast<double>(n), 1e-12));

    TreeParams proto = params.tree_params;
    proto.criterion = SplitCriterion::Variance;
    if (proto.max_depth == 0) proto.max_depth = 5;

    // per-sample scores F, updated stage by stage
    std::vector<std::array<double, kK>> score(static_cast<std::size_t>(n), model.base_scores);
    const std::vector<double> unit_weights(static_cast<std::size_t>(n), 1.0);
    const int subsample = std::max(1, std::min(n, static_cast<int>(std::floor(params.sample_fraction * n))));

    std::vector<std::array<double, kK>> prob(static_cast<std::size_t>(n));
    for (int stage = 0; stage < params.n_trees; ++stage) {
        for (int i = 0; i < n; ++i) prob[static_cast<std::size_t>(i)] = softmax(score[static_cast<std::size_t>(i)]);

        std::vector<int> in_stage;
        if (subsample < n) {
            Rng rng(mix_seed(params.master_seed, 2ULL * static_cast<std::uint64_t>(stage) + 1));
            in_stage = rng.sample_without_replacement(n, subsample);
            std::sort(in_stage.begin(), in_stage.end());
        } else {
            in_stage.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) in_stage[static_cast<std::size_t>(i)] = i;
        }

        std::array<Tree, kK> stage_trees;
        parallel_for(kK, workers, [&](int k) {
            std::vector<double> residual(static_cast<std::size_t>(n), 0.0);
            for (int i : in_stage) {
                const double y = view.label(i) == k ? 1.0 : 0.0;
                residual[static_cast<std::size_t>(i)] = y - prob[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)];
            }
            TreeParams tp = proto;
            tp.rng_seed = mix_seed(params.master_seed, static_cast<std::uint64_t>(stage) * kK + static_cast<std::uint64_t>(k) + 101);
            Tree tree = grow_tree(view, in_stage, unit_weights, tp, residual);

            // Newton leaf values for multinomial deviance
            std::vector<double> num(tree.nodes.size(), 0.0), den(tree.nodes.size(), 0.0);
            for (int i : in_stage) {
                const int leaf = tree_leaf_index(tree, view, i);
                const double r = residual[static_cast<std::size_t>(i)];
                num[static_cast<std::size_t>(leaf)] += r;
                den[static_cast<std::size_t>(leaf)] += std::abs(r) * (1.0 - std::abs(r));
            }
            const double k_factor = static_cast<double>(kK - 1) / static_cast<double>(kK);
            for (std::size_t j = 0; j < tree.nodes.size(); ++j)
                if (tree.nodes[j].is_leaf())
                    tree.nodes[j].value = den[j] > 1e-12 ? k_factor * num[j] / den[j] : 0.0;
            stage_trees[static_cast<std::size_t>(k)] = std::move(tree);
        });

        for (int k = 0; k < kK; ++k) {
            const Tree& tree = stage_trees[static_cast<std::size_t>(k)];
            for (int i = 0; i < n; ++i) {
                const int leaf = tree_leaf_index(tree, view, i);
                score[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +=
                    params.learning_rate * tree.nodes[static_cast<std::size_t>(leaf)].value;
            }
            model.trees.push_back(stage_trees[static_cast<std::size_t>(k)]);
            model.tree_weights.push_back(1.0);
        }

        double deviance = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto p = softmax(score[static_cast<std::size_t>(i)]);
            deviance -= std::log(std::max(p[static_cast<std::size_t>(view.label(i))], 1e-300));
        }
        model.train_deviance.push_back(deviance / static_cast<double>(n));
    }
    return model;
}

EnsembleModel train_algorithm(EnsembleAlgorithm algorithm, const Dataset& train, const EnsembleParams& params,
                              int workers) {
    switch (algorithm) {
        case EnsembleAlgorithm::SingleCart: return train_single_tree(train, params, SplitCriterion::Gini);
        case EnsembleAlgorithm::SingleJ48: return train_single_tree(train, params, SplitCriterion::GainRatio);
        case EnsembleAlgorithm::BaggedCart: return train_bagging(train, params, workers);
        case EnsembleAlgorithm::RandomForest: return train_random_forest(train, params, workers);
        case EnsembleAlgorithm::ExtraTrees: return train_extra_trees(train, params, workers);
        case EnsembleAlgorithm::AdaBoost: return train_adaboost(train, params);
        case EnsembleAlgorithm::Sgb: return train_sgb(train, params, workers);
    }
    throw std::logic_error("unreachable");
}

Prediction predict_ensemble(const EnsembleModel& model, const FeatureVector& x) {
    if (x.values.size() != model.schema.size())
        throw std::invalid_argument("feature vector does not match model schema");
    std::array<double, kK> scores{};
    switch (model.algorithm) {
        case EnsembleAlgorithm::Sgb: {
            std::array<double, kK> f = model.base_scores;
            for (std::size_t t = 0; t < model.trees.size(); ++t)
                f[t % kK] += model.learning_rate * predict_tree_value(model.trees[t], x);
            scores = softmax(f);
            break;
        }
        case EnsembleAlgorithm::AdaBoost: {
            double total = 0.0;
            for (std::size_t t = 0; t < model.trees.size(); ++t) {
                const auto p = predict_tree(model.trees[t], x);
                const SecurityClass vote = argmax_severe(p);
                scores[static_cast<std::size_t>(vote)] += model.tree_weights[t];
                total += model.tree_weights[t];
            }
            if (total > 0)
                for (double& s : scores) s /= total;
            break;
        }
        default: {  // single trees and the bagging family: mean of tree scores
            for (std::size_t t = 0; t < model.trees.size(); ++t) {
                const auto p = predict_tree(model.trees[t], x);
                for (int k = 0; k < kK; ++k) scores[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
            }
            for (double& s : scores) s /= static_cast<double>(model.trees.size());
            break;
        }
    }
    return {argmax_severe(scores), scores};
}

StagedErrorTable staged_test_error(const EnsembleModel& model, const Dataset& test) {
    const int n = static_cast<int>(test.size());
    if (n == 0) throw std::invalid_argument("empty test set");
    const int stages = model.n_stages();

    std::array<int, kK> class_total{};
    for (const auto& s : test.samples) ++class_total[static_cast<std::size_t>(s.label)];

    StagedErrorTable table;
    std::vector<std::array<double, kK>> acc(static_cast<std::size_t>(n),
                                            model.algorithm == EnsembleAlgorithm::Sgb
                                                ? model.base_scores
                                                : std::array<double, kK>{});

    for (int t = 0; t < stages; ++t) {
        for (int i = 0; i < n; ++i) {
            const auto& x = test.samples[static_cast<std::size_t>(i)].features;
            auto& a = acc[static_cast<std::size_t>(i)];
            switch (model.algorithm) {
                case EnsembleAlgorithm::Sgb:
                    for (int k = 0; k < kK; ++k)
                        a[static_cast<std::size_t>(k)] +=
                            model.learning_rate *
                            predict_tree_value(model.trees[static_cast<std::size_t>(t * kK + k)], x);
                    break;
                case EnsembleAlgorithm::AdaBoost: {
                    const auto p = predict_tree(model.trees[static_cast<std::size_t>(t)], x);
                    a[static_cast<std::size_t>(argmax_severe(p))] += model.tree_weights[static_cast<std::size_t>(t)];
                    break;
                }
                default: {
                    const auto p = predict_tree(model.trees[static_cast<std::size_t>(t)], x);
                    for (int k = 0; k < kK; ++k) a[static_cast<std::size_t>(k)] += p[static_cast<std::size_t>(k)];
                    break;
                }
            }
        }
        std::array<int, kK> class_miss{};
        int miss = 0;
        for (int i = 0; i < n; ++i) {
            const auto predicted = model.algorithm == EnsembleAlgorithm::Sgb
                                       ? argmax_severe(softmax(acc[static_cast<std::size_t>(i)]))
                                       : argmax_severe(acc[static_cast<std::size_t>(i)]);
            const auto actual = test.samples[static_cast<std::size_t>(i)].label;
            if (predicted != actual) {
                ++miss;
                ++class_miss[static_cast<std::size_t>(actual)];
            }
        }
        table.t.push_back(t + 1);
        table.overall_error.push_back(static_cast<double>(miss) / static_cast<double>(n));
        for (int k = 0; k < kK; ++k)
            table.class_error[static_cast<std::size_t>(k)].push_back(
                class_total[static_cast<std::size_t>(k)] > 0
                    ? static_cast<double>(class_miss[static_cast<std::size_t>(k)]) / class_total[static_cast<std::size_t>(k)]
                    : -1.0);
    }
    return table;
}

ImportanceReport variable_importance(const EnsembleModel& model) {
    const std::size_t p = model.schema.size();
    std::vector<double> overall(p, 0.0);
    std::array<std::vector<double>, kK> per_class;
    for (auto& v : per_class) v.assign(p, 0.0);

    for (std::size_t t = 0; t < model.trees.size(); ++t) {
        const Tree& tree = model.trees[t];
        if (tree.nodes.empty()) continue;
        const double n_root = static_cast<double>(tree.nodes[0].n_samples);
        if (n_root <= 0) continue;
        const bool regression = model.algorithm == EnsembleAlgorithm::Sgb;
        const std::size_t class_of_tree = t % kK;
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) continue;
            const double share = static_cast<double>(node.n_samples) / n_root * node.impurity_decrease;
            const std::size_t a = static_cast<std::size_t>(node.rule.attribute);
            overall[a] += share;
            if (regression) {
                per_class[class_of_tree][a] += share;
                continue;
            }
            // split the gini decrease by class: g_c(p) = p_c (1 - p_c)
            const auto& l = tree.nodes[static_cast<std::size_t>(node.left)];
            const auto& r = tree.nodes[static_cast<std::size_t>(node.right)];
            double wp = 0.0, wl = 0.0, wr = 0.0;
            for (int k = 0; k < kK; ++k) {
                wp += node.class_counts[static_cast<std::size_t>(k)];
                wl += l.class_counts[static_cast<std::size_t>(k)];
                wr += r.class_counts[static_cast<std::size_t>(k)];
            }
            if (wp <= 0 || wl <= 0 || wr <= 0) continue;
            for (int k = 0; k < kK; ++k) {
                auto gc = [](double c, double w) {
                    const double f = c / w;
                    return f * (1.0 - f);
                };
                const double dec_k = gc(node.class_counts[static_cast<std::size_t>(k)], wp) -
                                     wl / wp * gc(l.class_counts[static_cast<std::size_t>(k)], wl) -
                                     wr / wp * gc(r.class_counts[static_cast<std::size_t>(k)], wr);
                per_class[static_cast<std::size_t>(k)][a] += static_cast<double>(node.n_samples) / n_root * dec_k;
            }
        }
    }
    const double n_trees = static_cast<double>(model.trees.size());
    for (double& v : overall) v /= n_trees;
    for (auto& vec : per_class)
        for (double& v : vec) v = std::max(0.0, v / n_trees);

    ImportanceReport report;
    report.attribute.resize(p);
    for (std::size_t a = 0; a < p; ++a) report.attribute[a] = static_cast<int>(a);
    std::stable_sort(report.attribute.begin(), report.attribute.end(),
                     [&overall](int a, int b) { return overall[static_cast<std::size_t>(a)] > overall[static_cast<std::size_t>(b)]; });
    report.overall.resize(p);
    for (auto& v : report.per_class) v.resize(p);
    for (std::size_t i = 0; i < p; ++i) {
        const std::size_t a = static_cast<std::size_t>(report.attribute[i]);
        report.overall[i] = overall[a];
        for (int k = 0; k < kK; ++k) report.per_class[static_cast<std::size_t>(k)][i] = per_class[static_cast<std::size_t>(k)][a];
    }
    return report;
}

namespace {

using nlohmann::json;

json tree_to_json(const Tree& tree) {
    json nodes = json::array();
    for (const auto& n : tree.nodes) {
        nodes.push_back(json::array({n.rule.attribute, n.rule.threshold, n.rule.default_left ? 1 : 0, n.left, n.right,
                                     n.impurity_decrease, n.n_samples, n.class_counts[0], n.class_counts[1],
                                     n.class_counts[2], n.class_counts[3], n.value}));
    }
    return nodes;
}

Tree tree_from_json(const json& j) {
    Tree tree;
    tree.nodes.reserve(j.size());
    for (const auto& row : j) {
        TreeNode n;
        n.rule.attribute = row.at(0).get<int>();
        n.rule.threshold = row.at(1).get<double>();
        n.rule.default_left = row.at(2).get<int>() != 0;
        n.left = row.at(3).get<std::int32_t>();
        n.right = row.at(4).get<std::int32_t>();
        n.impurity_decrease = row.at(5).get<double>();
        n.n_samples = row.at(6).get<int>();
        for (int k = 0; k < kK; ++k) n.class_counts[static_cast<std::size_t>(k)] = row.at(7 + static_cast<std::size_t>(k)).get<double>();
        n.value = row.at(11).get<double>();
        tree.nodes.push_back(n);
    }
    return tree;
}

}  // namespace

void save_model(std::ostream& out, const EnsembleModel& model) {
    json j;
    j["format"] = "gridsec-model";
    j["version"] = 1;
    j["algorithm"] = algorithm_name(model.algorithm);
    j["learning_rate"] = model.learning_rate;
    j["base_scores"] = model.base_scores;
    j["schema"] = model.schema;
    j["tree_weights"] = model.tree_weights;
    j["params"] = {{"n_trees", model.params.n_trees},
                   {"bootstrap", model.params.bootstrap},
                   {"sample_fraction", model.params.sample_fraction},
                   {"learning_rate", model.params.learning_rate},
                   {"master_seed", model.params.master_seed},
                   {"criterion", static_cast<int>(model.params.tree_params.criterion)},
                   {"max_depth", model.params.tree_params.max_depth},
                   {"min_samples_leaf", model.params.tree_params.min_samples_leaf},
                   {"mtry", model.params.tree_params.mtry},
                   {"threshold_mode", static_cast<int>(model.params.tree_params.threshold_mode)}};
    if (model.oob_error) j["oob_error"] = *model.oob_error;
    if (!model.train_deviance.empty()) j["train_deviance"] = model.train_deviance;
    if (!model.diagnostics.empty()) j["diagnostics"] = model.diagnostics;
    json trees = json::array();
    for (const auto& t : model.trees) trees.push_back(tree_to_json(t));
    j["trees"] = std::move(trees);
    out << j.dump() << "\n";
}

EnsembleModel load_model(std::istream& in) {
    json j = json::parse(in);
    if (j.value("format", "") != "gridsec-model" || j.value("version", 0) != 1)
        throw std::runtime_error("not a gridsec model file");
    EnsembleModel model;
    model.algorithm = algorithm_from_name(j.at("algorithm").get<std::string>());
    model.learning_rate = j.at("learning_rate").get<double>();
    const auto base = j.at("base_scores");
    for (int k = 0; k < kK; ++k) model.base_scores[static_cast<std::size_t>(k)] = base.at(static_cast<std::size_t>(k)).get<double>();
    model.schema = j.at("schema").get<std::vector<std::string>>();
    model.tree_weights = j.at("tree_weights").get<std::vector<double>>();
    const auto& p = j.at("params");
    model.params.n_trees = p.at("n_trees").get<int>();
    model.params.bootstrap = p.at("bootstrap").get<bool>();
    model.params.sample_fraction = p.at("sample_fraction").get<double>();
    model.params.learning_rate = p.at("learning_rate").get<double>();
    model.params.master_seed = p.at("master_seed").get<std::uint64_t>();
    model.params.tree_params.criterion = static_cast<SplitCriterion>(p.at("criterion").get<int>());
    model.params.tree_params.max_depth = p.at("max_depth").get<int>();
    model.params.tree_params.min_samples_leaf = p.at("min_samples_leaf").get<int>();
    model.params.tree_params.mtry = p.at("mtry").get<int>();
    model.params.tree_params.threshold_mode = static_cast<ThresholdMode>(p.at("threshold_mode").get<int>());
    if (j.contains("oob_error")) model.oob_error = j.at("oob_error").get<double>();
    if (j.contains("train_deviance")) model.train_deviance = j.at("train_deviance").get<std::vector<double>>();
    if (j.contains("diagnostics")) model.diagnostics = j.at("diagnostics").get<std::vector<std::string>>();
    for (const auto& t : j.at("trees")) model.trees.push_back(tree_from_json(t));
    return model;
}

}  // namespace gridsec
