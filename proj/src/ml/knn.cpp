#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include "hrtrust/core/error.hpp"
#include "hrtrust/ml/ml.hpp"

namespace hrtrust {
namespace {

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        const double d = a[j] - b[j];
        s += d * d;
    }
    return s;
}

using Candidate = std::pair<double, std::size_t>;  // (squared distance, row)

/// Bounded max-heap keeping the k lexicographically smallest candidates.
struct KBest {
    std::size_t k;
    std::priority_queue<Candidate> heap;

    void offer(const Candidate& c) {
        if (heap.size() < k) {
            heap.push(c);
        } else if (c < heap.top()) {
            heap.pop();
            heap.push(c);
        }
    }
    [[nodiscard]] bool full() const { return heap.size() == k; }
    [[nodiscard]] double worst() const { return heap.top().first; }
};

}  // namespace

void KnnParams::validate() const {
    if (n_neighbors < 1) {
        throw InvalidInput("knn: n_neighbors must be positive");
    }
    if (weights != "uniform" && weights != "distance") {
        throw InvalidInput("knn: weights must be uniform or distance, got " + weights);
    }
    if (algorithm != "auto" && algorithm != "ball_tree" && algorithm != "kd_tree" && algorithm != "brute") {
        throw InvalidInput("knn: unknown algorithm " + algorithm);
    }
}

NeighborIndex::Backend resolve_backend(const std::string& algorithm, std::size_t dims) {
    if (algorithm == "brute") {
        return NeighborIndex::Backend::brute;
    }
    if (algorithm == "kd_tree") {
        return NeighborIndex::Backend::kd_tree;
    }
    if (algorithm == "ball_tree") {
        return NeighborIndex::Backend::ball_tree;
    }
    if (algorithm == "auto") {
        return dims <= 8 ? NeighborIndex::Backend::kd_tree : NeighborIndex::Backend::brute;
    }
    throw InvalidInput("knn: unknown algorithm " + algorithm);
}

NeighborIndex::NeighborIndex(Matrix points, Backend backend, std::size_t leaf_size)
    : points_(std::move(points)), backend_(backend), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    if (backend_ != Backend::brute && !points_.empty()) {
        nodes_.emplace_back();
        build(0, 0, points_.size());
    }
}

void NeighborIndex::build(int node, std::size_t begin, std::size_t end) {
    const std::size_t dims = points_.front().size();
    {
        Node& nd = nodes_[static_cast<std::size_t>(node)];
        nd.begin = begin;
        nd.end = end;
        if (backend_ == Backend::ball_tree) {
            nd.center.assign(dims, 0.0);
            for (std::size_t i = begin; i < end; ++i) {
                for (std::size_t j = 0; j < dims; ++j) {
                    nd.center[j] += points_[order_[i]][j];
                }
            }
            for (double& c : nd.center) {
                c /= static_cast<double>(end - begin);
            }
            double r2 = 0.0;
            for (std::size_t i = begin; i < end; ++i) {
                r2 = std::max(r2, squared_distance(points_[order_[i]], nd.center));
            }
            nd.radius = std::sqrt(r2);
        }
    }
    if (end - begin <= leaf_size_) {
        return;
    }
    std::size_t best_dim = 0;
    double best_spread = -1.0;
    for (std::size_t j = 0; j < dims; ++j) {
        double lo = points_[order_[begin]][j];
        double hi = lo;
        for (std::size_t i = begin; i < end; ++i) {
            lo = std::min(lo, points_[order_[i]][j]);
            hi = std::max(hi, points_[order_[i]][j]);
        }
        if (hi - lo > best_spread) {
            best_spread = hi - lo;
            best_dim = j;
        }
    }
    if (!(best_spread > 0.0)) {
        return;
    }
    const std::size_t mid = begin + (end - begin) / 2;
    const auto first = order_.begin() + static_cast<std::ptrdiff_t>(begin);
    std::nth_element(first, order_.begin() + static_cast<std::ptrdiff_t>(mid),
                     order_.begin() + static_cast<std::ptrdiff_t>(end), [&](std::size_t a, std::size_t b) {
                         const double va = points_[a][best_dim];
                         const double vb = points_[b][best_dim];
                         return va < vb || (va == vb && a < b);
                     });
    const double split = points_[order_[mid]][best_dim];
    const int left = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const int right = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Node& nd = nodes_[static_cast<std::size_t>(node)];
    nd.dim = best_dim;
    nd.split = split;
    nd.left = left;
    nd.right = right;
    build(left, begin, mid);
    build(right, mid, end);
}

std::vector<std::pair<double, std::size_t>> NeighborIndex::query(std::span<const double> q, std::size_t k) const {
    if (k == 0 || k > points_.size()) {
        throw InvalidInput("neighbor query: k must be in [1, number of points]");
    }
    if (q.size() != points_.front().size()) {
        throw InvalidInput("neighbor query: dimension mismatch");
    }
    KBest best{k, {}};
    if (backend_ == Backend::brute) {
        for (std::size_t i = 0; i < points_.size(); ++i) {
            best.offer({squared_distance(q, points_[i]), i});
        }
    } else {
        const auto visit = [&](const auto& self, int id) -> void {
            const Node& nd = nodes_[static_cast<std::size_t>(id)];
            if (backend_ == Backend::ball_tree && best.full()) {
                const double dc = std::sqrt(squared_distance(q, nd.center));
                const double lb = dc - nd.radius;
                const double slack = 1e-9 * (1.0 + dc + nd.radius);
                if (lb - slack > std::sqrt(best.worst())) {
                    return;
                }
            }
            if (nd.left < 0) {
                for (std::size_t i = nd.begin; i < nd.end; ++i) {
                    best.offer({squared_distance(q, points_[order_[i]]), order_[i]});
                }
                return;
            }
            const double diff = q[nd.dim] - nd.split;
            const int near = diff < 0.0 ? nd.left : nd.right;
            const int far = diff < 0.0 ? nd.right : nd.left;
            self(self, near);
            if (backend_ == Backend::kd_tree && best.full() && diff * diff > best.worst()) {
                return;
            }
            self(self, far);
        };
        visit(visit, 0);
    }
    std::vector<std::pair<double, std::size_t>> out;
    out.reserve(k);
    while (!best.heap.empty()) {
        out.push_back(best.heap.top());
        best.heap.pop();
    }
    std::reverse(out.begin(), out.end());
    for (auto& c : out) {
        c.first = std::sqrt(c.first);
    }
    return out;
}

KnnModel::KnnModel(KnnParams params, Standardizer scaler, NeighborIndex index, Labels y)
    : params_(std::move(params)), scaler_(std::move(scaler)), index_(std::move(index)), y_(std::move(y)) {}

std::vector<std::pair<double, std::size_t>> KnnModel::neighbors(std::span<const double> x) const {
    const auto z = scaler_.apply(x);
    return index_.query(z, static_cast<std::size_t>(params_.n_neighbors));
}

double KnnModel::predict_proba(std::span<const double> x) const {
    const auto nb = neighbors(x);
    if (params_.weights == "distance") {
        double pos = 0.0;
        double total = 0.0;
        for (const auto& [d, i] : nb) {
            const double w = 1.0 / (d + 1e-9);
            total += w;
            if (y_[i] == 1) {
                pos += w;
            }
        }
        return pos / total;
    }
    std::size_t pos = 0;
    for (const auto& [d, i] : nb) {
        pos += y_[i] == 1;
    }
    return static_cast<double>(pos) / static_cast<double>(nb.size());
}

json KnnModel::to_json() const {
    return json{{"format_version", 1}, {"kind", "knn"}, {"params", params_}, {"scaler", scaler_},
                {"train_z", index_.points()}, {"y", y_}};
}

std::shared_ptr<const KnnModel> train_knn(const Matrix& X, const Labels& y, const KnnParams& params) {
    params.validate();
    check_dataset(X, y);
    if (static_cast<std::size_t>(params.n_neighbors) > X.size()) {
        throw InvalidInput("knn: n_neighbors exceeds the training size");
    }
    Standardizer scaler = Standardizer::fit(X);
    Matrix z = scaler.apply(X);
    const auto backend = resolve_backend(params.algorithm, X.front().size());
    return std::make_shared<KnnModel>(params, std::move(scaler), NeighborIndex(std::move(z), backend), y);
}

}  // namespace hrtrust
