#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "hrtrust/core/json.hpp"
#include "hrtrust/dataset/dataset.hpp"
#include "hrtrust/ml/ml.hpp"

namespace hrtrust {

inline constexpr std::size_t kMaxShapFeatures = 12;

using ValueFunction = std::function<double(std::span<const double>)>;

struct ShapExplanation {
    std::vector<double> phi;
    double base = 0.0;        ///< v(empty set): mean model output over the background
    double prediction = 0.0;  ///< model output at x
    std::size_t coalitions = 0;

    friend bool operator==(const ShapExplanation&, const ShapExplanation&) = default;
};

/// Exact interventional Shapley values by enumerating all 2^M coalitions.
ShapExplanation shap_exact(const ValueFunction& f, std::span<const double> x, const Matrix& background);
ShapExplanation shap_exact(const Model& model, std::span<const double> x, const Matrix& background);

/// Explains every row of X; rows are independent and may run on several threads.
std::vector<ShapExplanation> shap_rows(const Model& model, const Matrix& X, const Matrix& background,
                                       unsigned threads = 1);

/// Up to n rows of X drawn without replacement.
Matrix sample_background(const Matrix& X, std::size_t n, std::uint64_t seed);

struct FeatureRank {
    std::string name;
    double mean_abs_phi = 0.0;

    friend bool operator==(const FeatureRank&, const FeatureRank&) = default;
};

/// Features by mean |phi| descending; ties by name.
std::vector<FeatureRank> global_summary(const std::vector<ShapExplanation>& explanations,
                                        const std::vector<std::string>& names);

inline constexpr double kNoTrend = 0.2;

struct ParticipantSummary {
    std::string operator_id;
    std::size_t rows = 0;
    std::vector<FeatureRank> ranking;
    /// Per feature in `names` order: +1, -1, or 0 when |corr| < kNoTrend or undefined.
    std::vector<int> trend;
    std::vector<double> trend_corr;  ///< NaN when the feature or its phi is constant

    friend bool operator==(const ParticipantSummary&, const ParticipantSummary&) = default;
};

/// Groups explanations by operator id; trend = sign of pearson(feature value, phi) over the group.
std::vector<ParticipantSummary> per_participant_summary(const std::vector<ShapExplanation>& explanations,
                                                        const Matrix& values, const std::vector<std::string>& ids,
                                                        const std::vector<std::string>& names,
                                                        double no_trend = kNoTrend);

struct TrustScoreWeights {
    std::vector<std::string> names;
    std::vector<double> weights;  ///< mean |phi|, normalised to sum 1
    std::vector<int> signs;       ///< +1 / -1

    void validate() const;
    friend bool operator==(const TrustScoreWeights&, const TrustScoreWeights&) = default;
};

/// Weights from mean |phi|; signs from the value-phi correlation over all rows (+1 when undefined).
TrustScoreWeights trust_score_weights(const std::vector<ShapExplanation>& explanations, const Matrix& values,
                                      const std::vector<std::string>& names);

/// sum_i sign_i * weight_i * clamp(diff_i, -1, 1).
double trust_score(std::span<const double> diffs, const TrustScoreWeights& weights);

/// {"features": [...], "points": [{"feature", "phi", "value"}...]} with values min-max scaled per feature.
json beeswarm_json(const std::vector<ShapExplanation>& explanations, const Matrix& values,
                   const std::vector<std::string>& names);
/// One circle per point: features on rows, phi on x, colour by scaled value.
std::string beeswarm_svg(const json& beeswarm);

struct PersonalizedConfig {
    std::size_t augment_factor = 3;
    std::size_t label_k = 5;
    int n_estimators = 100;
    std::uint64_t seed = 0;
};

/// One forest per operator trained on that operator's original rows plus Gaussian/nn-labelled
/// synthetics, explained on the operator's own rows with those rows as background. Returns the
/// explanations in the order of `originals.rows`.
std::vector<ShapExplanation> personalized_explanations(const FeatureMatrix& originals, const PersonalizedConfig& cfg);

void to_json(json& j, const ShapExplanation& e);
void from_json(const json& j, ShapExplanation& e);
void to_json(json& j, const FeatureRank& r);
void to_json(json& j, const ParticipantSummary& s);
void to_json(json& j, const TrustScoreWeights& w);
void from_json(const json& j, TrustScoreWeights& w);
void to_json(json& j, const PersonalizedConfig& c);
/// The seed is not serialised.
void from_json(const json& j, PersonalizedConfig& c);

}  // namespace hrtrust
