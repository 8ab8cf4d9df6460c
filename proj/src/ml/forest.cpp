#include <algorithm>
#include <cmath>
#include <numeric>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/ml/ml.hpp"

namespace hrtrust {
namespace {

struct TreeBuilder {
    const std::vector<std::vector<double>>& cols;  // column-major
    const Labels& y;
    const ForestParams& params;
    std::size_t mtry;
    Rng& rng;
    std::vector<double>& importance;
    DecisionTree tree;
    std::vector<std::pair<double, std::size_t>> buf;

    int build(std::vector<std::size_t>& idx, int depth) {
        const std::size_t n = idx.size();
        std::size_t pos = 0;
        for (std::size_t i : idx) {
            pos += y[i] == 1;
        }
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.push_back({});
        tree.nodes.back().p_positive = static_cast<double>(pos) / static_cast<double>(n);

        const auto min_leaf = static_cast<std::size_t>(params.min_samples_leaf);
        if (n < static_cast<std::size_t>(params.min_samples_split) || n < 2 * min_leaf || pos == 0 || pos == n ||
            (params.max_depth && depth >= *params.max_depth)) {
            return id;
        }

        const double nd = static_cast<double>(n);
        const double p1 = static_cast<double>(pos) / nd;
        const double parent = nd * (1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1));

        std::vector<std::size_t> features(cols.size());
        std::iota(features.begin(), features.end(), std::size_t{0});
        portable_shuffle(features.begin(), features.end(), rng);

        double best_gain = 0.0;
        int best_feature = -1;
        double best_threshold = 0.0;
        std::size_t visited = 0;
        for (std::size_t f : features) {
            if (visited >= mtry && best_feature >= 0) {
                break;
            }
            buf.clear();
            for (std::size_t i : idx) {
                buf.emplace_back(cols[f][i], i);
            }
            std::sort(buf.begin(), buf.end());
            if (buf.front().first == buf.back().first) {
                continue;  // constant here; does not count towards mtry
            }
            ++visited;
            std::size_t left_pos = 0;
            for (std::size_t k = 1; k < n; ++k) {
                left_pos += y[buf[k - 1].second] == 1;
                if (buf[k - 1].first == buf[k].first || k < min_leaf || n - k < min_leaf) {
                    continue;
                }
                const double nl = static_cast<double>(k);
                const double nr = nd - nl;
                const double pl = static_cast<double>(left_pos) / nl;
                const double pr = static_cast<double>(pos - left_pos) / nr;
                const double child = nl * 2.0 * pl * (1.0 - pl) + nr * 2.0 * pr * (1.0 - pr);
                const double gain = parent - child;
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best_feature = static_cast<int>(f);
                    double thr = 0.5 * (buf[k - 1].first + buf[k].first);
                    if (!(thr < buf[k].first)) {
                        thr = buf[k - 1].first;
                    }
                    best_threshold = thr;
                }
            }
        }
        if (best_feature < 0) {
            return id;
        }
        importance[static_cast<std::size_t>(best_feature)] += best_gain;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (std::size_t i : idx) {
            (cols[static_cast<std::size_t>(best_feature)][i] <= best_threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = build(left, depth + 1);
        const int r = build(right, depth + 1);
        TreeNode& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best_feature;
        node.threshold = best_threshold;
        node.left = l;
        node.right = r;
        return id;
    }
};

}  // namespace

void ForestParams::validate() const {
    if (n_estimators < 1) {
        throw InvalidInput("forest: n_estimators must be positive");
    }
    if (max_depth && *max_depth < 1) {
        throw InvalidInput("forest: max_depth must be positive or None");
    }
    if (min_samples_split < 2) {
        throw InvalidInput("forest: min_samples_split must be at least 2");
    }
    if (min_samples_leaf < 1) {
        throw InvalidInput("forest: min_samples_leaf must be positive");
    }
}

double DecisionTree::predict_proba(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes[i].feature >= 0) {
        const auto& nd = nodes[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right);
    }
    return nodes[i].p_positive;
}

ForestModel::ForestModel(ForestParams params, std::vector<DecisionTree> trees, std::vector<double> importance,
                         std::optional<double> oob_accuracy)
    : params_(std::move(params)), trees_(std::move(trees)), importance_(std::move(importance)), oob_(oob_accuracy) {}

double ForestModel::predict_proba(std::span<const double> x) const {
    double s = 0.0;
    for (const auto& t : trees_) {
        s += t.predict_proba(x);
    }
    return s / static_cast<double>(trees_.size());
}

json ForestModel::to_json() const {
    json trees = json::array();
    for (const auto& t : trees_) {
        json f = json::array();
        json th = json::array();
        json l = json::array();
        json r = json::array();
        json p = json::array();
        for (const auto& nd : t.nodes) {
            f.push_back(nd.feature);
            th.push_back(nd.threshold);
            l.push_back(nd.left);
            r.push_back(nd.right);
            p.push_back(nd.p_positive);
        }
        trees.push_back(json{{"feature", f}, {"threshold", th}, {"left", l}, {"right", r}, {"p", p}});
    }
    return json{{"format_version", 1},
                {"kind", "forest"},
                {"params", params_},
                {"trees", trees},
                {"importance", importance_},
                {"oob_accuracy", oob_ ? json(*oob_) : json(nullptr)}};
}

std::shared_ptr<const ForestModel> train_forest(const Matrix& X, const Labels& y, const ForestParams& params) {
    params.validate();
    check_dataset(X, y);
    const std::size_t n = X.size();
    const std::size_t p = X.front().size();
    if (std::all_of(y.begin(), y.end(), [&](int v) { return v == y.front(); })) {
        throw DegenerateInput("forest: labels contain a single class");
    }
    std::vector<std::vector<double>> cols(p, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            cols[j][i] = X[i][j];
        }
    }
    const auto mtry = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(p)))));

    std::vector<DecisionTree> trees;
    std::vector<double> importance(p, 0.0);
    std::vector<double> oob_sum(n, 0.0);
    std::vector<std::size_t> oob_count(n, 0);
    std::vector<char> in_bag(n);
    for (int t = 0; t < params.n_estimators; ++t) {
        Rng rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> idx(n);
        std::fill(in_bag.begin(), in_bag.end(), 0);
        for (auto& i : idx) {
            i = static_cast<std::size_t>(uniform_index(rng, n));
            in_bag[i] = 1;
        }
        TreeBuilder b{cols, y, params, mtry, rng, importance, {}, {}};
        b.build(idx, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!in_bag[i]) {
                oob_sum[i] += b.tree.predict_proba(X[i]);
                ++oob_count[i];
            }
        }
        trees.push_back(std::move(b.tree));
    }
    std::optional<double> oob;
    if (std::all_of(oob_count.begin(), oob_count.end(), [](std::size_t c) { return c > 0; })) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const int pred = oob_sum[i] / static_cast<double>(oob_count[i]) > 0.5 ? 1 : -1;
            correct += pred == y[i];
        }
        oob = static_cast<double>(correct) / static_cast<double>(n);
    }
    return std::make_shared<ForestModel>(params, std::move(trees), std::move(importance), oob);
}

}  // namespace hrtrust
