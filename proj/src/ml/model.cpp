#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/ml/ml.hpp"

namespace hrtrust {
namespace {

double nan_or(const json& j) { return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>(); }

struct Split {
    Matrix X_train;
    Labels y_train;
    Matrix X_test;
    Labels y_test;
};

Split split_by(const Matrix& X, const Labels& y, const std::vector<std::size_t>& test) {
    std::vector<char> is_test(X.size(), 0);
    for (std::size_t i : test) {
        is_test[i] = 1;
    }
    Split s;
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (is_test[i]) {
            s.X_test.push_back(X[i]);
            s.y_test.push_back(y[i]);
        } else {
            s.X_train.push_back(X[i]);
            s.y_train.push_back(y[i]);
        }
    }
    return s;
}

double accuracy_of(const Model& m, const Matrix& X, const Labels& y) {
    std::size_t ok = 0;
    for (std::size_t i = 0; i < X.size(); ++i) {
        ok += m.predict(X[i]) == y[i];
    }
    return static_cast<double>(ok) / static_cast<double>(X.size());
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; rethrows the first failure.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F body) {
    const unsigned workers = std::max(1U, std::min<unsigned>(threads, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            body(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

}  // namespace

void check_dataset(const Matrix& X, const Labels& y) {
    if (X.empty()) {
        throw InvalidInput("dataset is empty");
    }
    if (X.size() != y.size()) {
        throw InvalidInput("dataset: " + std::to_string(X.size()) + " rows but " + std::to_string(y.size()) +
                           " labels");
    }
    const std::size_t p = X.front().size();
    if (p == 0) {
        throw InvalidInput("dataset has no features");
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
        if (X[i].size() != p) {
            throw InvalidInput("dataset: row " + std::to_string(i) + " has the wrong width");
        }
        for (double v : X[i]) {
            if (!std::isfinite(v)) {
                throw InvalidInput("dataset: non-finite value in row " + std::to_string(i));
            }
        }
        if (y[i] != 1 && y[i] != -1) {
            throw InvalidInput("dataset: labels must be -1 or +1");
        }
    }
}

Standardizer Standardizer::fit(const Matrix& X) {
    if (X.empty() || X.front().empty()) {
        throw InvalidInput("standardizer: empty matrix");
    }
    const std::size_t p = X.front().size();
    const auto n = static_cast<double>(X.size());
    Standardizer s;
    s.mean.assign(p, 0.0);
    s.scale.assign(p, 0.0);
    for (const auto& r : X) {
        for (std::size_t j = 0; j < p; ++j) {
            s.mean[j] += r[j];
        }
    }
    for (double& m : s.mean) {
        m /= n;
    }
    for (const auto& r : X) {
        for (std::size_t j = 0; j < p; ++j) {
            const double d = r[j] - s.mean[j];
            s.scale[j] += d * d;
        }
    }
    for (double& v : s.scale) {
        v = std::sqrt(v / n);
        if (!(v > 1e-12)) {
            v = 1.0;
        }
    }
    return s;
}

std::vector<double> Standardizer::apply(std::span<const double> row) const {
    if (row.size() != mean.size()) {
        throw InvalidInput("standardizer: expected " + std::to_string(mean.size()) + " features, got " +
                           std::to_string(row.size()));
    }
    std::vector<double> out(row.size());
    for (std::size_t j = 0; j < row.size(); ++j) {
        out[j] = (row[j] - mean[j]) / scale[j];
    }
    return out;
}

Matrix Standardizer::apply(const Matrix& X) const {
    Matrix out;
    out.reserve(X.size());
    for (const auto& r : X) {
        out.push_back(apply(r));
    }
    return out;
}

std::string to_string(ModelKind k) {
    switch (k) {
        case ModelKind::knn:
            return "knn";
        case ModelKind::forest:
            return "forest";
        case ModelKind::svm:
            return "svm";
        case ModelKind::voting:
            return "voting";
    }
    return "unknown";
}

ModelKind model_kind_from_string(const std::string& s) {
    if (s == "knn") {
        return ModelKind::knn;
    }
    if (s == "forest") {
        return ModelKind::forest;
    }
    if (s == "svm") {
        return ModelKind::svm;
    }
    if (s == "voting") {
        return ModelKind::voting;
    }
    throw InvalidInput("unknown model kind " + s);
}

std::vector<double> Model::predict_proba(const Matrix& X) const {
    std::vector<double> out;
    out.reserve(X.size());
    for (const auto& r : X) {
        out.push_back(predict_proba(std::span<const double>(r)));
    }
    return out;
}

Labels Model::predict(const Matrix& X) const {
    Labels out;
    out.reserve(X.size());
    for (const auto& r : X) {
        out.push_back(predict(std::span<const double>(r)));
    }
    return out;
}

// ---- Voting ----

VotingModel::VotingModel(std::vector<ModelPtr> members) : members_(std::move(members)) {
    if (members_.size() < 2) {
        throw InvalidInput("voting: at least two members are required");
    }
    for (const auto& m : members_) {
        if (!m) {
            throw InvalidInput("voting: null member");
        }
    }
}

double VotingModel::predict_proba(std::span<const double> x) const { return soft_vote(members_, x); }

json VotingModel::to_json() const {
    json members = json::array();
    for (const auto& m : members_) {
        members.push_back(m->to_json());
    }
    return json{{"format_version", 1}, {"kind", "voting"}, {"members", members}};
}

double soft_vote(const std::vector<ModelPtr>& models, std::span<const double> x) {
    if (models.empty()) {
        throw InvalidInput("soft vote over no models");
    }
    double s = 0.0;
    for (const auto& m : models) {
        s += m->predict_proba(x);
    }
    return s / static_cast<double>(models.size());
}

ModelPtr model_from_json(const json& j) {
    if (!j.is_object() || j.value("format_version", 0) != 1) {
        throw InvalidInput("model: unsupported or missing format_version");
    }
    const ModelKind kind = model_kind_from_string(j.at("kind").get<std::string>());
    switch (kind) {
        case ModelKind::knn: {
            const auto params = j.at("params").get<KnnParams>();
            auto z = j.at("train_z").get<Matrix>();
            const std::size_t dims = z.empty() ? 0 : z.front().size();
            return std::make_shared<KnnModel>(params, j.at("scaler").get<Standardizer>(),
                                              NeighborIndex(std::move(z), resolve_backend(params.algorithm, dims)),
                                              j.at("y").get<Labels>());
        }
        case ModelKind::forest: {
            std::vector<DecisionTree> trees;
            for (const auto& t : j.at("trees")) {
                const auto f = t.at("feature").get<std::vector<int>>();
                const auto th = t.at("threshold").get<std::vector<double>>();
                const auto l = t.at("left").get<std::vector<int>>();
                const auto r = t.at("right").get<std::vector<int>>();
                const auto p = t.at("p").get<std::vector<double>>();
                if (f.empty() || th.size() != f.size() || l.size() != f.size() || r.size() != f.size() ||
                    p.size() != f.size()) {
                    throw InvalidInput("forest: malformed tree");
                }
                DecisionTree tree;
                for (std::size_t i = 0; i < f.size(); ++i) {
                    const auto n = static_cast<int>(f.size());
                    if (f[i] >= 0 && (l[i] <= static_cast<int>(i) || r[i] <= static_cast<int>(i) || l[i] >= n ||
                                      r[i] >= n)) {
                        throw InvalidInput("forest: malformed tree links");
                    }
                    tree.nodes.push_back({f[i], th[i], l[i], r[i], p[i]});
                }
                trees.push_back(std::move(tree));
            }
            const json& oob = j.at("oob_accuracy");
            return std::make_shared<ForestModel>(j.at("params").get<ForestParams>(), std::move(trees),
                                                 j.at("importance").get<std::vector<double>>(),
                                                 oob.is_null() ? std::nullopt : std::optional<double>(oob.get<double>()));
        }
        case ModelKind::svm: {
            const json& k = j.at("kernel");
            KernelSpec kernel{k.at("kind").get<std::string>(), k.at("gamma").get<double>(), k.at("degree").get<int>(),
                              k.at("coef0").get<double>()};
            SvmSolution sol;
            sol.support = j.at("support").get<Matrix>();
            sol.coef = j.at("coef").get<std::vector<double>>();
            sol.bias = j.at("bias").get<double>();
            sol.converged = j.at("converged").get<bool>();
            sol.iterations = j.at("iterations").get<long>();
            if (sol.support.size() != sol.coef.size()) {
                throw InvalidInput("svm: support and coefficient counts differ");
            }
            const auto platt = j.at("platt").get<std::vector<double>>();
            if (platt.size() != 2) {
                throw InvalidInput("svm: platt must hold two numbers");
            }
            return std::make_shared<SvmModel>(j.at("params").get<SvmParams>(), j.at("scaler").get<Standardizer>(),
                                              kernel, std::move(sol), platt[0], platt[1]);
        }
        case ModelKind::voting: {
            std::vector<ModelPtr> members;
            for (const auto& m : j.at("members")) {
                members.push_back(model_from_json(m));
            }
            return std::make_shared<VotingModel>(std::move(members));
        }
    }
    throw InvalidInput("model: unknown kind");
}

// ---- Grids and training ----

void HyperGrid::validate() const {
    if (params.empty()) {
        throw InvalidInput("grid has no parameters");
    }
    std::set<std::string> names;
    for (const auto& [name, options] : params) {
        if (options.empty()) {
            throw InvalidInput("grid parameter " + name + " has no options");
        }
        if (!names.insert(name).second) {
            throw InvalidInput("grid parameter " + name + " is repeated");
        }
    }
}

std::size_t HyperGrid::size() const {
    std::size_t n = 1;
    for (const auto& p : params) {
        n *= p.second.size();
    }
    return params.empty() ? 0 : n;
}

std::vector<json> HyperGrid::enumerate() const {
    validate();
    std::vector<json> out{json::object()};
    for (const auto& [name, options] : params) {
        std::vector<json> next;
        next.reserve(out.size() * options.size());
        for (const auto& partial : out) {
            for (const auto& v : options) {
                json c = partial;
                c[name] = v;
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

HyperGrid default_grid(ModelKind kind) {
    switch (kind) {
        case ModelKind::forest:
            return {{{"max_depth", {nullptr, 10, 20}},
                     {"min_samples_leaf", {1, 2, 4}},
                     {"min_samples_split", {2, 5, 10}},
                     {"n_estimators", {50, 100, 150}}}};
        case ModelKind::knn:
            return {{{"n_neighbors", {3, 5, 7, 10}},
                     {"weights", {"uniform", "distance"}},
                     {"algorithm", {"auto", "ball_tree", "kd_tree", "brute"}}}};
        case ModelKind::svm:
            return {{{"C", {0.1, 1, 10, 100}}, {"kernel", {"linear", "rbf", "poly"}}, {"gamma", {"scale", "auto"}}}};
        case ModelKind::voting:
            break;
    }
    throw InvalidInput("voting has no hyperparameter grid");
}

json reference_params(ModelKind kind) {
    switch (kind) {
        case ModelKind::forest:
            return {{"max_depth", nullptr}, {"min_samples_leaf", 1}, {"min_samples_split", 2}, {"n_estimators", 150}};
        case ModelKind::knn:
            return {{"n_neighbors", 3}, {"weights", "distance"}, {"algorithm", "auto"}};
        case ModelKind::svm:
            return {{"C", 100}, {"kernel", "rbf"}, {"gamma", "scale"}};
        case ModelKind::voting:
            break;
    }
    throw InvalidInput("voting has no reference parameters");
}

ModelPtr train_model(ModelKind kind, const json& params, const Matrix& X, const Labels& y, std::uint64_t seed,
                     FitCounter* counter) {
    if (!params.is_object()) {
        throw InvalidInput("model parameters must be a JSON object");
    }
    ModelPtr out;
    switch (kind) {
        case ModelKind::knn:
            out = train_knn(X, y, params.get<KnnParams>());
            break;
        case ModelKind::forest: {
            auto p = params.get<ForestParams>();
            p.seed = seed;
            out = train_forest(X, y, p);
            break;
        }
        case ModelKind::svm: {
            auto p = params.get<SvmParams>();
            p.seed = seed;
            out = train_svm(X, y, p);
            break;
        }
        case ModelKind::voting:
            throw InvalidInput("use train_voting for the ensemble");
    }
    if (counter) {
        ++counter->fits;
    }
    return out;
}

std::shared_ptr<const VotingModel> train_voting(const json& knn, const json& forest, const json& svm, const Matrix& X,
                                                const Labels& y, std::uint64_t seed, FitCounter* counter) {
    return std::make_shared<VotingModel>(std::vector<ModelPtr>{
        train_model(ModelKind::knn, knn, X, y, derive_seed(seed, "knn"), counter),
        train_model(ModelKind::forest, forest, X, y, derive_seed(seed, "forest"), counter),
        train_model(ModelKind::svm, svm, X, y, derive_seed(seed, "svm"), counter)});
}

std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed) {
    if (k < 2) {
        throw InvalidInput("k-fold: k must be at least 2");
    }
    std::vector<std::vector<std::size_t>> folds(k);
    std::size_t offset = 0;
    for (int cls : {-1, 1}) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == cls) {
                idx.push_back(i);
            } else if (y[i] != -1 && y[i] != 1) {
                throw InvalidInput("k-fold: labels must be -1 or +1");
            }
        }
        if (idx.empty()) {
            continue;
        }
        if (idx.size() < k) {
            throw InvalidInput("k-fold: class " + std::to_string(cls) + " has " + std::to_string(idx.size()) +
                               " rows, fewer than k = " + std::to_string(k));
        }
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(cls + 1)));
        portable_shuffle(idx.begin(), idx.end(), rng);
        for (std::size_t i : idx) {
            folds[offset % k].push_back(i);
            ++offset;
        }
    }
    for (auto& f : folds) {
        std::sort(f.begin(), f.end());
    }
    return folds;
}

GridSearchResult grid_search(ModelKind kind, const HyperGrid& grid, const Matrix& X, const Labels& y,
                             const GridSearchOptions& opt) {
    check_dataset(X, y);
    GridSearchResult res;
    res.candidates = grid.enumerate();
    const auto folds = stratified_kfold(y, opt.folds, opt.seed);
    std::vector<Split> splits;
    splits.reserve(folds.size());
    for (const auto& f : folds) {
        splits.push_back(split_by(X, y, f));
    }
    res.mean_scores.assign(res.candidates.size(), 0.0);
    parallel_for(res.candidates.size(), opt.threads, [&](std::size_t c) {
        double total = 0.0;
        for (std::size_t f = 0; f < splits.size(); ++f) {
            const auto& s = splits[f];
            const auto m = train_model(kind, res.candidates[c], s.X_train, s.y_train, derive_seed(opt.seed, f),
                                       opt.counter);
            total += accuracy_of(*m, s.X_test, s.y_test);
        }
        res.mean_scores[c] = total / static_cast<double>(splits.size());
    });
    for (std::size_t c = 1; c < res.candidates.size(); ++c) {
        if (res.mean_scores[c] > res.mean_scores[res.best_index]) {
            res.best_index = c;
        }
    }
    res.best_params = res.candidates[res.best_index];
    return res;
}

// ---- Metrics ----

std::vector<RocPoint> roc_curve(const std::vector<double>& p, const Labels& y) {
    if (p.size() != y.size() || p.empty()) {
        throw InvalidInput("roc: scores and labels must be non-empty and aligned");
    }
    std::vector<std::size_t> order(p.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        order[i] = i;
    }
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] > p[b]; });
    double P = 0.0;
    double N = 0.0;
    for (int v : y) {
        (v == 1 ? P : N) += 1.0;
    }
    std::vector<RocPoint> roc{{0.0 / N, 0.0 / P, p[order.front()] + 1.0}};
    double tp = 0.0;
    double fp = 0.0;
    for (std::size_t k = 0; k < order.size();) {
        const double t = p[order[k]];
        while (k < order.size() && p[order[k]] == t) {
            (y[order[k]] == 1 ? tp : fp) += 1.0;
            ++k;
        }
        roc.push_back({fp / N, tp / P, t});
    }
    return roc;
}

double auc_trapezoid(const std::vector<RocPoint>& roc) {
    double a = 0.0;
    for (std::size_t i = 1; i < roc.size(); ++i) {
        a += (roc[i].fpr - roc[i - 1].fpr) * 0.5 * (roc[i].tpr + roc[i - 1].tpr);
    }
    return a;
}

EvalReport score_probabilities(const std::vector<double>& p, const Labels& y) {
    if (p.size() != y.size() || p.empty()) {
        throw InvalidInput("metrics: probabilities and labels must be non-empty and aligned");
    }
    EvalReport r;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const int pred = p[i] > 0.5 ? 1 : -1;
        ++r.confusion[y[i] == 1 ? 1 : 0][pred == 1 ? 1 : 0];
    }
    const auto& c = r.confusion;
    const auto n = static_cast<double>(p.size());
    r.accuracy = static_cast<double>(c[0][0] + c[1][1]) / n;
    double f1 = 0.0;
    for (int k = 0; k < 2; ++k) {
        const auto tp = static_cast<double>(c[k][k]);
        const auto predicted = static_cast<double>(c[0][k] + c[1][k]);
        const auto actual = static_cast<double>(c[k][0] + c[k][1]);
        const double prec = predicted > 0 ? tp / predicted : 0.0;
        const double rec = actual > 0 ? tp / actual : 0.0;
        r.precision += prec / 2.0;
        r.recall += rec / 2.0;
        f1 += (prec + rec > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0) / 2.0;
    }
    r.f1 = f1;
    r.roc = roc_curve(p, y);
    r.auc = auc_trapezoid(r.roc);
    return r;
}

EvalReport evaluate(const Model& model, const Matrix& X, const Labels& y) {
    check_dataset(X, y);
    return score_probabilities(model.predict_proba(X), y);
}

EvalReport nested_cv(ModelKind kind, const HyperGrid& grid, const Matrix& X, const Labels& y,
                     const NestedCvOptions& opt) {
    check_dataset(X, y);
    const auto outer = stratified_kfold(y, opt.outer, opt.seed);
    std::vector<double> pooled(X.size(), 0.0);
    std::vector<double> scores;
    std::vector<json> params;
    for (std::size_t o = 0; o < outer.size(); ++o) {
        const auto s = split_by(X, y, outer[o]);
        GridSearchOptions gs;
        gs.folds = opt.inner;
        gs.seed = derive_seed(opt.seed, o);
        gs.threads = opt.threads;
        gs.counter = opt.counter;
        const auto best = grid_search(kind, grid, s.X_train, s.y_train, gs);
        const auto m = train_model(kind, best.best_params, s.X_train, s.y_train, derive_seed(opt.seed, o),
                                   opt.counter);
        for (std::size_t i : outer[o]) {
            pooled[i] = m->predict_proba(std::span<const double>(X[i]));
        }
        scores.push_back(accuracy_of(*m, s.X_test, s.y_test));
        params.push_back(best.best_params);
    }
    EvalReport r = score_probabilities(pooled, y);
    r.fold_scores = scores;
    r.fold_params = params;
    double mean = 0.0;
    for (double v : scores) {
        mean += v;
    }
    mean /= static_cast<double>(scores.size());
    double var = 0.0;
    for (double v : scores) {
        var += (v - mean) * (v - mean);
    }
    r.fold_mean = mean;
    r.fold_std = std::sqrt(var / static_cast<double>(scores.size()));
    return r;
}

std::size_t nested_cv_fit_count(std::size_t grid_size, std::size_t outer, std::size_t inner) {
    return outer * (grid_size * inner + 1);
}

// ---- JSON ----

void to_json(json& j, const EvalReport& r) {
    json roc = json::array();
    for (const auto& pt : r.roc) {
        roc.push_back({pt.fpr, pt.tpr, pt.threshold});
    }
    const auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
    j = json{{"accuracy", r.accuracy},
             {"precision", r.precision},
             {"recall", r.recall},
             {"f1", r.f1},
             {"auc", num(r.auc)},
             {"confusion", r.confusion},
             {"roc", roc},
             {"fold_scores", r.fold_scores},
             {"fold_mean", r.fold_mean},
             {"fold_std", r.fold_std},
             {"fold_params", r.fold_params}};
}

void from_json(const json& j, EvalReport& r) {
    r.accuracy = j.at("accuracy").get<double>();
    r.precision = j.at("precision").get<double>();
    r.recall = j.at("recall").get<double>();
    r.f1 = j.at("f1").get<double>();
    r.auc = nan_or(j.at("auc"));
    r.confusion = j.at("confusion").get<std::array<std::array<std::size_t, 2>, 2>>();
    r.roc.clear();
    for (const auto& pt : j.at("roc")) {
        r.roc.push_back({nan_or(pt.at(0)), nan_or(pt.at(1)), pt.at(2).get<double>()});
    }
    r.fold_scores = j.value("fold_scores", std::vector<double>{});
    r.fold_mean = j.value("fold_mean", 0.0);
    r.fold_std = j.value("fold_std", 0.0);
    r.fold_params = j.value("fold_params", std::vector<json>{});
}

void to_json(json& j, const KnnParams& p) {
    j = json{{"n_neighbors", p.n_neighbors}, {"weights", p.weights}, {"algorithm", p.algorithm}};
}

void from_json(const json& j, KnnParams& p) {
    const KnnParams d;
    p.n_neighbors = j.value("n_neighbors", d.n_neighbors);
    p.weights = j.value("weights", d.weights);
    p.algorithm = j.value("algorithm", d.algorithm);
}

void to_json(json& j, const ForestParams& p) {
    j = json{{"n_estimators", p.n_estimators},
             {"max_depth", p.max_depth ? json(*p.max_depth) : json(nullptr)},
             {"min_samples_split", p.min_samples_split},
             {"min_samples_leaf", p.min_samples_leaf},
             {"seed", p.seed}};
}

void from_json(const json& j, ForestParams& p) {
    const ForestParams d;
    p.n_estimators = j.value("n_estimators", d.n_estimators);
    p.max_depth = std::nullopt;
    if (j.contains("max_depth") && !j.at("max_depth").is_null()) {
        p.max_depth = j.at("max_depth").get<int>();
    }
    p.min_samples_split = j.value("min_samples_split", d.min_samples_split);
    p.min_samples_leaf = j.value("min_samples_leaf", d.min_samples_leaf);
    p.seed = j.value("seed", d.seed);
}

void to_json(json& j, const SvmParams& p) {
    j = json{{"C", p.C},           {"kernel", p.kernel}, {"gamma", p.gamma},       {"degree", p.degree},
             {"coef0", p.coef0},   {"tol", p.tol},       {"max_iter", p.max_iter}, {"seed", p.seed}};
}

void from_json(const json& j, SvmParams& p) {
    const SvmParams d;
    p.C = j.value("C", d.C);
    p.kernel = j.value("kernel", d.kernel);
    p.gamma = j.value("gamma", d.gamma);
    p.degree = j.value("degree", d.degree);
    p.coef0 = j.value("coef0", d.coef0);
    p.tol = j.value("tol", d.tol);
    p.max_iter = j.value("max_iter", d.max_iter);
    p.seed = j.value("seed", d.seed);
}

void to_json(json& j, const Standardizer& s) { j = json{{"mean", s.mean}, {"scale", s.scale}}; }

void from_json(const json& j, Standardizer& s) {
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    if (s.mean.size() != s.scale.size()) {
        throw InvalidInput("standardizer: mean and scale lengths differ");
    }
}

}  // namespace hrtrust
