#pragma once

#include <array>
#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrtrust/core/json.hpp"

namespace hrtrust {

/// Row-major feature matrix.
using Matrix = std::vector<std::vector<double>>;
/// Class labels in {-1, +1}.
using Labels = std::vector<int>;

void check_dataset(const Matrix& X, const Labels& y);

/// z-score per column; zero-variance columns get scale 1.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const Matrix& X);
    [[nodiscard]] std::vector<double> apply(std::span<const double> row) const;
    [[nodiscard]] Matrix apply(const Matrix& X) const;

    friend bool operator==(const Standardizer&, const Standardizer&) = default;
};

enum class ModelKind { knn, forest, svm, voting };
std::string to_string(ModelKind k);
ModelKind model_kind_from_string(const std::string& s);

/// Counts top-level model fits (calibration refits inside an SVM are not counted).
struct FitCounter {
    std::atomic<std::size_t> fits{0};
};

class Model {
public:
    virtual ~Model() = default;
    [[nodiscard]] virtual ModelKind kind() const = 0;
    /// P(y = +1 | x) for a raw (unstandardised) row.
    [[nodiscard]] virtual double predict_proba(std::span<const double> x) const = 0;
    [[nodiscard]] virtual json to_json() const = 0;

    [[nodiscard]] std::vector<double> predict_proba(const Matrix& X) const;
    /// +1 when P(+1) > 0.5; ties go to -1.
    [[nodiscard]] int predict(std::span<const double> x) const { return predict_proba(x) > 0.5 ? 1 : -1; }
    [[nodiscard]] Labels predict(const Matrix& X) const;
};

using ModelPtr = std::shared_ptr<const Model>;

// ---- k-NN ----

struct KnnParams {
    int n_neighbors = 5;
    std::string weights = "uniform";  ///< uniform | distance
    std::string algorithm = "auto";   ///< auto | ball_tree | kd_tree | brute

    void validate() const;
    friend bool operator==(const KnnParams&, const KnnParams&) = default;
};

/// Exact k nearest rows of `points` to q by Euclidean distance, ordered by (distance, row index).
struct NeighborIndex {
    enum class Backend { brute, kd_tree, ball_tree };

    NeighborIndex() = default;
    NeighborIndex(Matrix points, Backend backend, std::size_t leaf_size = 16);

    [[nodiscard]] std::vector<std::pair<double, std::size_t>> query(std::span<const double> q, std::size_t k) const;
    [[nodiscard]] Backend backend() const { return backend_; }
    [[nodiscard]] const Matrix& points() const { return points_; }

private:
    struct Node {
        std::size_t begin = 0;
        std::size_t end = 0;
        int left = -1;
        int right = -1;
        std::size_t dim = 0;
        double split = 0.0;
        std::vector<double> center;
        double radius = 0.0;
    };
    void build(int node, std::size_t begin, std::size_t end);
    Matrix points_;
    Backend backend_ = Backend::brute;
    std::size_t leaf_size_ = 16;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
};

NeighborIndex::Backend resolve_backend(const std::string& algorithm, std::size_t dims);

class KnnModel final : public Model {
public:
    KnnModel(KnnParams params, Standardizer scaler, NeighborIndex index, Labels y);
    using Model::predict_proba;
    [[nodiscard]] ModelKind kind() const override { return ModelKind::knn; }
    [[nodiscard]] double predict_proba(std::span<const double> x) const override;
    [[nodiscard]] json to_json() const override;
    [[nodiscard]] const KnnParams& params() const { return params_; }
    /// Neighbours of a raw row in standardised space.
    [[nodiscard]] std::vector<std::pair<double, std::size_t>> neighbors(std::span<const double> x) const;

private:
    KnnParams params_;
    Standardizer scaler_;
    NeighborIndex index_;
    Labels y_;
};

std::shared_ptr<const KnnModel> train_knn(const Matrix& X, const Labels& y, const KnnParams& params);

// ---- Random forest ----

struct ForestParams {
    int n_estimators = 100;
    std::optional<int> max_depth;  ///< nullopt: unbounded
    int min_samples_split = 2;
    int min_samples_leaf = 1;
    std::uint64_t seed = 0;

    void validate() const;
    friend bool operator==(const ForestParams&, const ForestParams&) = default;
};

struct TreeNode {
    int feature = -1;  ///< -1 for a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double p_positive = 0.0;

    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    [[nodiscard]] double predict_proba(std::span<const double> x) const;
    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

class ForestModel final : public Model {
public:
    ForestModel(ForestParams params, std::vector<DecisionTree> trees, std::vector<double> importance,
                std::optional<double> oob_accuracy);
    using Model::predict_proba;
    [[nodiscard]] ModelKind kind() const override { return ModelKind::forest; }
    [[nodiscard]] double predict_proba(std::span<const double> x) const override;
    [[nodiscard]] json to_json() const override;
    [[nodiscard]] const ForestParams& params() const { return params_; }
    [[nodiscard]] const std::vector<DecisionTree>& trees() const { return trees_; }
    /// Total impurity decrease (weighted by node sample count) per feature, unnormalised.
    [[nodiscard]] const std::vector<double>& gain_importance() const { return importance_; }
    /// Out-of-bag accuracy; empty when some row was never out of bag.
    [[nodiscard]] std::optional<double> oob_accuracy() const { return oob_; }

private:
    ForestParams params_;
    std::vector<DecisionTree> trees_;
    std::vector<double> importance_;
    std::optional<double> oob_;
};

std::shared_ptr<const ForestModel> train_forest(const Matrix& X, const Labels& y, const ForestParams& params);

// ---- SVM ----

struct SvmParams {
    double C = 1.0;
    std::string kernel = "rbf";  ///< linear | rbf | poly
    std::string gamma = "scale";  ///< scale | auto
    int degree = 3;
    double coef0 = 0.0;
    double tol = 1e-3;
    long max_iter = 200000;
    std::uint64_t seed = 0;  ///< calibration split

    void validate() const;
    friend bool operator==(const SvmParams&, const SvmParams&) = default;
};

struct KernelSpec {
    std::string kind = "rbf";
    double gamma = 1.0;
    int degree = 3;
    double coef0 = 0.0;

    [[nodiscard]] double operator()(std::span<const double> a, std::span<const double> b) const;
    friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// Dual solution of the soft-margin problem on standardised rows.
struct SvmSolution {
    std::vector<std::vector<double>> support;
    std::vector<double> coef;  ///< alpha_i y_i
    double bias = 0.0;
    bool converged = true;
    long iterations = 0;

    friend bool operator==(const SvmSolution&, const SvmSolution&) = default;
};

/// SMO with second-order working-set selection; stops when the maximal KKT violation < tol.
SvmSolution solve_svm(const Matrix& Z, const Labels& y, const KernelSpec& kernel, double C, double tol, long max_iter);

/// Platt sigmoid P(+1 | f) = 1 / (1 + exp(A f + B)) by regularised maximum likelihood.
std::pair<double, double> fit_platt(const std::vector<double>& decision, const Labels& y);

class SvmModel final : public Model {
public:
    SvmModel(SvmParams params, Standardizer scaler, KernelSpec kernel, SvmSolution solution, double platt_a,
             double platt_b);
    using Model::predict_proba;
    [[nodiscard]] ModelKind kind() const override { return ModelKind::svm; }
    [[nodiscard]] double predict_proba(std::span<const double> x) const override;
    [[nodiscard]] json to_json() const override;
    [[nodiscard]] double decision_function(std::span<const double> x) const;
    [[nodiscard]] const SvmParams& params() const { return params_; }
    [[nodiscard]] bool converged() const { return solution_.converged; }
    [[nodiscard]] const KernelSpec& kernel() const { return kernel_; }

private:
    SvmParams params_;
    Standardizer scaler_;
    KernelSpec kernel_;
    SvmSolution solution_;
    double a_ = 0.0;
    double b_ = 0.0;
};

std::shared_ptr<const SvmModel> train_svm(const Matrix& X, const Labels& y, const SvmParams& params);

// ---- Soft voting ----

class VotingModel final : public Model {
public:
    explicit VotingModel(std::vector<ModelPtr> members);
    using Model::predict_proba;
    [[nodiscard]] ModelKind kind() const override { return ModelKind::voting; }
    /// Unweighted mean of member probabilities.
    [[nodiscard]] double predict_proba(std::span<const double> x) const override;
    [[nodiscard]] json to_json() const override;
    [[nodiscard]] const std::vector<ModelPtr>& members() const { return members_; }

private:
    std::vector<ModelPtr> members_;
};

double soft_vote(const std::vector<ModelPtr>& models, std::span<const double> x);

ModelPtr model_from_json(const json& j);

// ---- Hyperparameter grids ----

/// Ordered parameter name -> option list.
struct HyperGrid {
    std::vector<std::pair<std::string, std::vector<json>>> params;

    void validate() const;
    [[nodiscard]] std::size_t size() const;
    /// Cartesian product; the first parameter varies slowest.
    [[nodiscard]] std::vector<json> enumerate() const;
};

HyperGrid default_grid(ModelKind kind);
/// The optimised values reported alongside the default grids.
json reference_params(ModelKind kind);

/// Fits kind with parameters given as a JSON object; `seed` seeds forests and SVM calibration.
ModelPtr train_model(ModelKind kind, const json& params, const Matrix& X, const Labels& y, std::uint64_t seed,
                     FitCounter* counter = nullptr);

/// Voting over knn, forest and svm fitted with the given parameter objects.
std::shared_ptr<const VotingModel> train_voting(const json& knn, const json& forest, const json& svm, const Matrix& X,
                                                const Labels& y, std::uint64_t seed, FitCounter* counter = nullptr);

/// Stratified k-fold test-index sets; per-class counts in each fold are within one row of
/// the global proportion.
std::vector<std::vector<std::size_t>> stratified_kfold(const Labels& y, std::size_t k, std::uint64_t seed);

struct GridSearchResult {
    json best_params;
    std::size_t best_index = 0;
    std::vector<json> candidates;
    std::vector<double> mean_scores;
};

struct GridSearchOptions {
    std::size_t folds = 5;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    FitCounter* counter = nullptr;
};

GridSearchResult grid_search(ModelKind kind, const HyperGrid& grid, const Matrix& X, const Labels& y,
                             const GridSearchOptions& opt = {});

// ---- Metrics ----

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;

    friend bool operator==(const RocPoint&, const RocPoint&) = default;
};

struct EvalReport {
    double accuracy = 0.0;
    double precision = 0.0;  ///< macro over both classes
    double recall = 0.0;
    double f1 = 0.0;
    double auc = 0.0;
    /// [[TN, FP], [FN, TP]] with rows = truth (-1, +1), columns = prediction.
    std::array<std::array<std::size_t, 2>, 2> confusion{};
    std::vector<RocPoint> roc;
    std::vector<double> fold_scores;
    double fold_mean = 0.0;
    double fold_std = 0.0;
    std::vector<json> fold_params;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Metrics of probabilities p against labels; threshold 0.5 with ties to -1.
EvalReport score_probabilities(const std::vector<double>& p, const Labels& y);
EvalReport evaluate(const Model& model, const Matrix& X, const Labels& y);

/// ROC by threshold sweep over the unique scores, descending; starts at (0, 0), ends at (1, 1).
std::vector<RocPoint> roc_curve(const std::vector<double>& p, const Labels& y);
double auc_trapezoid(const std::vector<RocPoint>& roc);

struct NestedCvOptions {
    std::size_t outer = 5;
    std::size_t inner = 5;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    FitCounter* counter = nullptr;
};

/// Outer stratified folds; grid search on each outer-train, refit of the winner, scoring on the
/// outer-test fold. Metrics pool the outer-test predictions; fold_scores are per-fold accuracies.
EvalReport nested_cv(ModelKind kind, const HyperGrid& grid, const Matrix& X, const Labels& y,
                     const NestedCvOptions& opt = {});

/// outer * (|grid| * inner + 1).
std::size_t nested_cv_fit_count(std::size_t grid_size, std::size_t outer, std::size_t inner);

void to_json(json& j, const EvalReport& r);
void from_json(const json& j, EvalReport& r);
void to_json(json& j, const KnnParams& p);
void from_json(const json& j, KnnParams& p);
void to_json(json& j, const ForestParams& p);
void from_json(const json& j, ForestParams& p);
void to_json(json& j, const SvmParams& p);
void from_json(const json& j, SvmParams& p);
void to_json(json& j, const Standardizer& s);
void from_json(const json& j, Standardizer& s);

}  // namespace hrtrust
