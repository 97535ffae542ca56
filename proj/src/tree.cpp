#include "gridsec/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gridsec {

TrainingView::TrainingView(const Dataset& data) {
    n_ = static_cast<int>(data.size());
    p_ = static_cast<int>(data.n_attributes());
    columns_.assign(static_cast<std::size_t>(p_), std::vector<double>(static_cast<std::size_t>(n_)));
    labels_.resize(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) {
        const auto& s = data.samples[static_cast<std::size_t>(i)];
        labels_[static_cast<std::size_t>(i)] = static_cast<int>(s.label);
        for (int a = 0; a < p_; ++a) columns_[static_cast<std::size_t>(a)][static_cast<std::size_t>(i)] = s.features.values[static_cast<std::size_t>(a)];
        if (!s.features.missing.empty())
            for (int a = 0; a < p_; ++a)
                if (s.features.missing[static_cast<std::size_t>(a)]) has_missing_ = true;
    }
    if (has_missing_) {
        missing_.assign(static_cast<std::size_t>(p_) * static_cast<std::size_t>(n_), 0);
        for (int i = 0; i < n_; ++i) {
            const auto& m = data.samples[static_cast<std::size_t>(i)].features.missing;
            if (m.empty()) continue;
            for (int a = 0; a < p_; ++a)
                missing_[static_cast<std::size_t>(a) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i)] = m[static_cast<std::size_t>(a)];
        }
    }
}

double gini_impurity(std::span<const double> class_counts) {
    if (class_counts.empty()) throw std::invalid_argument("gini_impurity: empty counts");
    double total = 0.0;
    for (double c : class_counts) total += c;
    if (total <= 0.0) throw std::invalid_argument("gini_impurity: zero total count");
    double sum_sq = 0.0;
    for (double c : class_counts) {
        const double f = c / total;
        sum_sq += f * f;
    }
    return 1.0 - sum_sq;
}

namespace {

struct ScanEntry {
    double value;
    int label;
    double weight;
    double target;
};

double entropy(const std::array<double, kNumClasses>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        const double f = c / total;
        h -= f * std::log(f);
    }
    return h;
}

double gini_of(const std::array<double, kNumClasses>& counts, double total) {
    if (total <= 0.0) return 0.0;
    double ss = 0.0;
    for (double c : counts) ss += (c / total) * (c / total);
    return 1.0 - ss;
}

struct SplitEval {
    double gain;
    double impurity_decrease;
    bool valid;
};

// evaluates one candidate partition described by left/right aggregates
struct Aggregates {
    std::array<double, kNumClasses> counts{};
    double w = 0.0;
    double wy = 0.0;
    double wy2 = 0.0;
    int n = 0;

    void add(const ScanEntry& e) {
        counts[static_cast<std::size_t>(e.label)] += e.weight;
        w += e.weight;
        wy += e.weight * e.target;
        wy2 += e.weight * e.target * e.target;
        ++n;
    }
    double variance() const {
        if (w <= 0.0) return 0.0;
        const double mean = wy / w;
        return std::max(0.0, wy2 / w - mean * mean);
    }
};

SplitEval evaluate(const Aggregates& parent, const Aggregates& left, const Aggregates& right,
                   SplitCriterion criterion) {
    constexpr double kEps = 1e-12;
    if (left.w <= 0.0 || right.w <= 0.0) return {0.0, 0.0, false};
    const double wl = left.w / parent.w, wr = right.w / parent.w;
    switch (criterion) {
        case SplitCriterion::Gini: {
            const double dec = gini_of(parent.counts, parent.w) - wl * gini_of(left.counts, left.w) -
                               wr * gini_of(right.counts, right.w);
            return {dec, dec, dec > kEps};
        }
        case SplitCriterion::GainRatio: {
            const double gain = entropy(parent.counts, parent.w) - wl * entropy(left.counts, left.w) -
                                wr * entropy(right.counts, right.w);
            const double split_info = -(wl * std::log(wl) + wr * std::log(wr));
            if (gain <= kEps || split_info <= kEps) return {0.0, 0.0, false};
            const double gini_dec = gini_of(parent.counts, parent.w) - wl * gini_of(left.counts, left.w) -
                                    wr * gini_of(right.counts, right.w);
            return {gain / split_info, gini_dec, true};
        }
        case SplitCriterion::Variance: {
            const double dec = parent.variance() - wl * left.variance() - wr * right.variance();
            return {dec, dec, dec > kEps};
        }
    }
    return {0.0, 0.0, false};
}

bool better(double gain, int attr, double thr, double best_gain, int best_attr, double best_thr) {
    constexpr double kTieEps = 1e-12;
    if (gain > best_gain + kTieEps) return true;
    if (gain < best_gain - kTieEps) return false;
    if (attr != best_attr) return attr < best_attr;
    return thr < best_thr;
}

}  // namespace

std::optional<SplitChoice> best_split(const TrainingView& view, std::span<const int> node_samples,
                                      std::span<const double> sample_weights, std::span<const int> candidate_attributes,
                                      SplitCriterion criterion, ThresholdMode mode, int min_samples_leaf, Rng& rng,
                                      std::span<const double> targets) {
    std::optional<SplitChoice> best;
    double best_gain = 0.0;
    int best_attr = std::numeric_limits<int>::max();
    double best_thr = 0.0;

    std::vector<ScanEntry> present;
    present.reserve(node_samples.size());
    const bool regression = criterion == SplitCriterion::Variance;

    for (int attr : candidate_attributes) {
        present.clear();
        Aggregates parent;
        for (int s : node_samples) {
            if (view.missing(s, attr)) continue;  // scanned on present values only
            ScanEntry e;
            e.weight = sample_weights[static_cast<std::size_t>(s)];
            e.label = regression ? 0 : view.label(s);
            e.target = regression ? targets[static_cast<std::size_t>(s)] : 0.0;
            e.value = view.value(s, attr);
            present.push_back(e);
            parent.add(e);
        }
        if (static_cast<int>(present.size()) < 2 * min_samples_leaf || parent.w <= 0.0) continue;

        if (mode == ThresholdMode::Exhaustive) {
            std::sort(present.begin(), present.end(),
                      [](const ScanEntry& a, const ScanEntry& b) { return a.value < b.value; });
            Aggregates left;
            Aggregates right = parent;
            for (std::size_t i = 0; i + 1 < present.size(); ++i) {
                left.add(present[i]);
                right.counts[static_cast<std::size_t>(present[i].label)] -= present[i].weight;
                right.w -= present[i].weight;
                right.wy -= present[i].weight * present[i].target;
                right.wy2 -= present[i].weight * present[i].target * present[i].target;
                --right.n;
                if (present[i + 1].value <= present[i].value) continue;  // not a distinct boundary
                if (left.n < min_samples_leaf || right.n < min_samples_leaf) continue;
                const double thr = present[i].value + 0.5 * (present[i + 1].value - present[i].value);
                const SplitEval ev = evaluate(parent, left, right, criterion);
                if (!ev.valid) continue;
                if (better(ev.gain, attr, thr, best_gain, best_attr, best_thr)) {
                    best_gain = ev.gain;
                    best_attr = attr;
                    best_thr = thr;
                    best = SplitChoice{{attr, thr, left.w >= right.w}, ev.gain, ev.impurity_decrease};
                }
            }
        } else {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (const auto& e : present) {
                lo = std::min(lo, e.value);
                hi = std::max(hi, e.value);
            }
            if (!(hi > lo)) continue;
            const double thr = rng.next_double(lo, hi);
            Aggregates left, right;
            for (const auto& e : present) (e.value <= thr ? left : right).add(e);
            if (left.n < min_samples_leaf || right.n < min_samples_leaf) continue;
            const SplitEval ev = evaluate(parent, left, right, criterion);
            if (!ev.valid) continue;
            if (better(ev.gain, attr, thr, best_gain, best_attr, best_thr)) {
                best_gain = ev.gain;
                best_attr = attr;
                best_thr = thr;
                best = SplitChoice{{attr, thr, left.w >= right.w}, ev.gain, ev.impurity_decrease};
            }
        }
    }
    return best;
}

namespace {

struct GrowContext {
    const TrainingView& view;
    std::span<const double> weights;
    std::span<const double> targets;
    const TreeParams& params;
    Rng rng;
    std::vector<TreeNode> nodes;
    std::vector<int> all_attrs;
};

int build_node(GrowContext& ctx, std::vector<int>& samples, int depth) {
    const int idx = static_cast<int>(ctx.nodes.size());
    ctx.nodes.emplace_back();
    const bool regression = ctx.params.criterion == SplitCriterion::Variance;

    TreeNode node;
    node.n_samples = static_cast<int>(samples.size());
    double total_w = 0.0, wy = 0.0;
    int distinct_labels = 0;
    for (int s : samples) {
        const double w = ctx.weights[static_cast<std::size_t>(s)];
        total_w += w;
        if (regression) {
            wy += w * ctx.targets[static_cast<std::size_t>(s)];
        } else {
            auto& c = node.class_counts[static_cast<std::size_t>(ctx.view.label(s))];
            if (c == 0.0) ++distinct_labels;
            c += w;
        }
    }
    if (regression) node.value = total_w > 0.0 ? wy / total_w : 0.0;

    const bool depth_capped = ctx.params.max_depth > 0 && depth >= ctx.params.max_depth;
    const bool splittable = static_cast<int>(samples.size()) >= 2 * ctx.params.min_samples_leaf &&
                            (regression || distinct_labels > 1);
    std::optional<SplitChoice> choice;
    if (!depth_capped && splittable) {
        const int p = ctx.view.p();
        std::span<const int> attrs;
        std::vector<int> subset;
        if (ctx.params.mtry > 0 && ctx.params.mtry < p) {
            subset = ctx.rng.sample_without_replacement(p, ctx.params.mtry);
            attrs = subset;
        } else {
            attrs = ctx.all_attrs;
        }
        choice = best_split(ctx.view, samples, ctx.weights, attrs, ctx.params.criterion, ctx.params.threshold_mode,
                            ctx.params.min_samples_leaf, ctx.rng, ctx.targets);
    }
    if (!choice) {
        ctx.nodes[static_cast<std::size_t>(idx)] = node;
        return idx;
    }

    node.rule = choice->rule;
    node.impurity_decrease = choice->impurity_decrease;

    std::vector<int> left, right;
    left.reserve(samples.size());
    for (int s : samples) {
        const bool go_left = ctx.view.missing(s, node.rule.attribute)
                                 ? node.rule.default_left
                                 : ctx.view.value(s, node.rule.attribute) <= node.rule.threshold;
        (go_left ? left : right).push_back(s);
    }
    if (left.empty() || right.empty()) {  // all mass on one side after missing assignment
        ctx.nodes[static_cast<std::size_t>(idx)] = node;
        return idx;
    }
    samples.clear();
    samples.shrink_to_fit();

    ctx.nodes[static_cast<std::size_t>(idx)] = node;
    const int l = build_node(ctx, left, depth + 1);
    const int r = build_node(ctx, right, depth + 1);
    ctx.nodes[static_cast<std::size_t>(idx)].left = l;
    ctx.nodes[static_cast<std::size_t>(idx)].right = r;
    return idx;
}

}  // namespace

Tree grow_tree(const TrainingView& view, std::span<const int> samples, std::span<const double> weights,
               const TreeParams& params, std::span<const double> targets) {
    if (samples.empty()) throw std::invalid_argument("grow_tree: no samples");
    if (params.criterion == SplitCriterion::Variance && targets.size() != static_cast<std::size_t>(view.n()))
        throw std::invalid_argument("grow_tree: variance criterion requires targets");
    GrowContext ctx{view, weights, targets, params, Rng(params.rng_seed), {}, {}};
    ctx.all_attrs.resize(static_cast<std::size_t>(view.p()));
    for (int a = 0; a < view.p(); ++a) ctx.all_attrs[static_cast<std::size_t>(a)] = a;
    std::vector<int> root(samples.begin(), samples.end());
    build_node(ctx, root, 0);
    Tree t;
    t.nodes = std::move(ctx.nodes);
    return t;
}

Tree grow_tree(const Dataset& train, const TreeParams& params) {
    TrainingView view(train);
    std::vector<int> samples(static_cast<std::size_t>(view.n()));
    for (int i = 0; i < view.n(); ++i) samples[static_cast<std::size_t>(i)] = i;
    std::vector<double> weights(static_cast<std::size_t>(view.n()), 1.0);
    return grow_tree(view, samples, weights, params);
}

namespace {

template <typename ValueFn, typename MissingFn>
const TreeNode& descend(const Tree& tree, ValueFn value, MissingFn is_missing) {
    const TreeNode* node = &tree.nodes.at(0);
    while (!node->is_leaf()) {
        const int a = node->rule.attribute;
        const bool go_left = is_missing(a) ? node->rule.default_left : value(a) <= node->rule.threshold;
        node = &tree.nodes[static_cast<std::size_t>(go_left ? node->left : node->right)];
    }
    return *node;
}

}  // namespace

std::array<double, kNumClasses> predict_tree(const Tree& tree, const FeatureVector& x) {
    const TreeNode& leaf = descend(
        tree, [&x](int a) { return x.values[static_cast<std::size_t>(a)]; },
        [&x](int a) { return x.is_missing(static_cast<std::size_t>(a)); });
    std::array<double, kNumClasses> scores{};
    double total = 0.0;
    for (double c : leaf.class_counts) total += c;
    if (total <= 0.0) {
        scores.fill(1.0 / kNumClasses);
        return scores;
    }
    for (std::size_t k = 0; k < kNumClasses; ++k) scores[k] = leaf.class_counts[k] / total;
    return scores;
}

double predict_tree_value(const Tree& tree, const FeatureVector& x) {
    return descend(
               tree, [&x](int a) { return x.values[static_cast<std::size_t>(a)]; },
               [&x](int a) { return x.is_missing(static_cast<std::size_t>(a)); })
        .value;
}

int tree_leaf_index(const Tree& tree, const TrainingView& view, int sample) {
    int idx = 0;
    while (!tree.nodes[static_cast<std::size_t>(idx)].is_leaf()) {
        const TreeNode& node = tree.nodes[static_cast<std::size_t>(idx)];
        const int a = node.rule.attribute;
        const bool go_left = view.missing(sample, a) ? node.rule.default_left : view.value(sample, a) <= node.rule.threshold;
        idx = go_left ? node.left : node.right;
    }
    return idx;
}

}  // namespace gridsec
