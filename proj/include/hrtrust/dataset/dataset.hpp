#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hrtrust/core/json.hpp"
#include "hrtrust/indicators/indicators.hpp"
#include "hrtrust/ml/ml.hpp"
#include "hrtrust/simulator/simulator.hpp"

namespace hrtrust {

enum class Provenance { original, gaussian, smote };
std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

struct FeatureRow {
    std::vector<double> diffs;
    int label = -1;
    std::string operator_id;
    int iteration = 0;
    Provenance provenance = Provenance::original;

    friend bool operator==(const FeatureRow&, const FeatureRow&) = default;
};

struct FeatureMatrix {
    std::vector<std::string> names;
    std::vector<FeatureRow> rows;

    /// Throws on duplicate names, width mismatches, non-finite values or labels outside {-1, +1}.
    void validate() const;
    [[nodiscard]] Matrix X() const;
    [[nodiscard]] Labels y() const;
    [[nodiscard]] std::size_t count(Provenance p) const;
    /// Keeps the columns whose mask entry is true.
    [[nodiscard]] FeatureMatrix select(const std::vector<bool>& mask) const;
    [[nodiscard]] FeatureMatrix subset(const std::vector<std::size_t>& rows) const;

    friend bool operator==(const FeatureMatrix&, const FeatureMatrix&) = default;
};

/// current - prev_best, element-wise, named after IndicatorVector::names.
FeatureRow pairwise_diff(const IndicatorVector& current, const IndicatorVector& prev_best, int pi);
std::vector<double> pairwise_diff(std::span<const double> current, std::span<const double> prev_best);

/// Sample correlation coefficient. Throws DegenerateInput when either series is constant.
double pearson(std::span<const double> a, std::span<const double> b);
/// |features| x |features| matrix of pearson over columns of X.
std::vector<std::vector<double>> correlation_matrix(const Matrix& X);

struct ImportanceConfig {
    int n_estimators = 200;
    std::uint64_t seed = 0;
};

/// Total Gini split gain per column from a seeded forest, scaled so the maximum is 1.
std::vector<double> gain_importance(const Matrix& X, const Labels& y, const ImportanceConfig& cfg = {});

struct SelectionConfig {
    double corr_threshold = 0.6;
    double importance_floor = 0.05;
    bool prune_first = true;  ///< correlation pruning before the importance floor
};

struct FeatureSelection {
    std::vector<bool> mask;
    std::vector<std::string> reasons;  ///< "" for kept features
};

/// For every pair with |r| >= corr_threshold the lower-importance member is dropped (equal importance:
/// the lexicographically larger name); then features below importance_floor are dropped.
/// Each stage only looks at features the earlier stage kept.
FeatureSelection select_features(const Matrix& X, const std::vector<std::string>& names,
                                 const std::vector<double>& importance, const SelectionConfig& cfg = {});

/// factor * |X| rows; column j drawn independently from N(mean_j, var_j) of X.
Matrix augment_gaussian(const Matrix& X, std::size_t factor, std::uint64_t seed);

/// Majority label of the k nearest originals, Euclidean on columns standardised with the
/// originals' statistics; distance ties go to the lower row index.
Labels nn_label(const Matrix& synthetic, const Matrix& originals, const Labels& y, std::size_t k = 5);

struct SmoteResult {
    Matrix X;  ///< input rows followed by the synthetic minority rows
    Labels y;
    std::size_t added = 0;
};

/// Oversamples the minority class to exact balance by interpolating towards one of its k nearest
/// minority neighbours (neighbours found in `scaler` space, interpolation in raw space).
SmoteResult smote_balance(const Matrix& X, const Labels& y, std::size_t k, std::uint64_t seed,
                          const Standardizer* scaler = nullptr);

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Per class, round(test_fraction * n_c) rows (at least one, never all) go to the test side.
SplitIndices stratified_split(const Labels& y, double test_fraction, std::uint64_t seed);

// ---- Study to features ----

/// Indicator settings for a study: attention centred on its pouring location, bounds calibrated by simulation.
IndicatorConfig study_indicator_config(const Study& study, std::uint64_t seed);

/// One original row per labelled comparison: candidate cycle minus best cycle.
FeatureMatrix study_features(const Study& study, const IndicatorConfig& cfg);

struct PipelineConfig {
    SelectionConfig selection;
    ImportanceConfig importance;
    std::size_t augment_factor = 3;
    std::size_t label_k = 5;
    std::size_t smote_k = 5;
    double test_fraction = 0.2;
    std::uint64_t seed = 0;

    void validate() const;
};

struct PreparedDataset {
    FeatureMatrix matrix;  ///< selected columns; originals, then Gaussian, then SMOTE rows
    std::vector<std::string> all_names;
    std::vector<double> importance;  ///< over all_names
    FeatureSelection selection;
    SplitIndices split;
    std::uint64_t seed = 0;
};

/// select -> augment -> nn_label -> SMOTE -> split. The split happens after augmentation, so
/// synthetic neighbours of test rows can sit in the training set.
PreparedDataset prepare_dataset(const FeatureMatrix& originals, const PipelineConfig& cfg);

/// CSV (operator_id, iteration, provenance, label, features...) plus `<path>.json` with names,
/// provenance counts and `extra`.
void write_feature_matrix(const std::filesystem::path& csv, const FeatureMatrix& m, const json& extra = json::object());
FeatureMatrix read_feature_matrix(const std::filesystem::path& csv);
json read_feature_manifest(const std::filesystem::path& csv);

void to_json(json& j, const SelectionConfig& c);
void from_json(const json& j, SelectionConfig& c);
void to_json(json& j, const PipelineConfig& c);
void from_json(const json& j, PipelineConfig& c);

}  // namespace hrtrust
