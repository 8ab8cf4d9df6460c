#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hrtrust/core/json.hpp"
#include "hrtrust/dataset/dataset.hpp"
#include "hrtrust/explain/explain.hpp"
#include "hrtrust/ml/ml.hpp"
#include "hrtrust/simulator/simulator.hpp"

namespace hrtrust {

/// Everything a batch run needs. Stage seeds derive from `seed`.
struct RunConfig {
    std::uint64_t seed = 0;
    std::size_t n_operators = 14;
    int n_evals = 15;
    SimulatorConfig simulator;
    PipelineConfig dataset;  ///< its seed is replaced by the derived stage seed
    json knn = reference_params(ModelKind::knn);
    json forest = reference_params(ModelKind::forest);
    json svm = reference_params(ModelKind::svm);
    /// Grid-search each member on the training split before fitting the ensemble.
    bool tune = false;
    std::size_t tune_folds = 3;
    std::size_t background = 30;
    bool personalized = true;
    PersonalizedConfig personal;  ///< its seed is replaced by the derived stage seed
    unsigned threads = 1;

    void validate() const;
};

/// `threads` is left out: it never changes results, so it must not change hashes.
void to_json(json& j, const RunConfig& c);
/// Missing keys keep their defaults; unknown keys are rejected.
void from_json(const json& j, RunConfig& c);

/// Stage seed: derive_seed(seed, stage name).
std::uint64_t stage_seed(const RunConfig& cfg, const std::string& stage);

/// Canonical stage order.
const std::vector<std::string>& stage_names();

/// Run-directory layout.
namespace run_paths {
inline const std::filesystem::path kConfig = "run_config.json";
inline const std::filesystem::path kManifest = "manifest.json";
inline const std::filesystem::path kStudy = "study";
inline const std::filesystem::path kCycles = "indicators/cycles.jsonl";
inline const std::filesystem::path kIndicatorConfig = "indicators/config.json";
inline const std::filesystem::path kOriginals = "indicators/features.csv";
inline const std::filesystem::path kDataset = "dataset/dataset.csv";
inline const std::filesystem::path kDatasetInfo = "dataset/preparation.json";
inline const std::filesystem::path kModel = "model/voting.json";
inline const std::filesystem::path kTuning = "model/tuning.json";
inline const std::filesystem::path kEval = "evaluate/eval.json";
inline const std::filesystem::path kShap = "explain/shap.json";
inline const std::filesystem::path kBeeswarm = "explain/beeswarm.json";
inline const std::filesystem::path kPersonalized = "explain/personalized.json";
inline const std::filesystem::path kReport = "report";
inline const std::filesystem::path kOptimize = "optimize";
}  // namespace run_paths

/// Writes the study bundle.
void run_simulate(const std::filesystem::path& dir, const RunConfig& cfg);
/// Per-cycle indicator vectors and the original feature matrix.
void run_indicators(const std::filesystem::path& dir, const RunConfig& cfg);
/// Dataset preparation and the voting ensemble fitted on the training split.
void run_train(const std::filesystem::path& dir, const RunConfig& cfg);
/// Held-out EvalReports for the ensemble and each member.
void run_evaluate(const std::filesystem::path& dir, const RunConfig& cfg);
/// SHAP explanations of the original rows, summaries and trust-score weights.
void run_explain(const std::filesystem::path& dir, const RunConfig& cfg);
/// HTML/SVG bundle: metrics, ROC, confusion matrix, SHAP summaries.
void run_report(const std::filesystem::path& dir, const RunConfig& cfg);

struct OptimizeRequest {
    std::size_t operator_index = 0;
    int iters = 15;
    bool noiseless = false;
};

/// Parses "sim:<index>".
std::size_t parse_operator_spec(const std::string& spec);

/// PBO session against a simulated operator; writes optimize/<id>.jsonl and optimize/<id>.json.
/// The operator matches the study's operator with the same index and seed.
SessionState run_optimize(const std::filesystem::path& dir, const RunConfig& cfg, const OptimizeRequest& req);

/// Runs one stage by name.
void run_stage(const std::string& stage, const std::filesystem::path& dir, const RunConfig& cfg);

struct RunManifest {
    std::uint64_t seed = 0;
    std::vector<std::string> config_paths;
    std::vector<std::string> stages;  ///< in first-run order
    std::string output_dir;
    std::map<std::string, std::string> hashes;  ///< relative path -> SHA-256 of every file except the manifest

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

void to_json(json& j, const RunManifest& m);
void from_json(const json& j, RunManifest& m);

/// Records `stage`, rehashes the run directory and rewrites manifest.json.
RunManifest update_manifest(const std::filesystem::path& dir, const RunConfig& cfg, const std::string& stage,
                            const std::vector<std::string>& config_paths = {});

/// Relative path -> SHA-256 for every regular file under dir except manifest.json.
std::map<std::string, std::string> hash_tree(const std::filesystem::path& dir);

/// Throws NotFound naming the missing artifact and the stage that produces it.
void require_artifact(const std::filesystem::path& dir, const std::filesystem::path& rel, const std::string& producer);

}  // namespace hrtrust
