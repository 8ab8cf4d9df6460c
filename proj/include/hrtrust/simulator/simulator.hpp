#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "hrtrust/core/json.hpp"
#include "hrtrust/core/recording.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/indicators/indicators.hpp"
#include "hrtrust/pbo/pbo.hpp"
#include "hrtrust/trajectory/trajectory.hpp"

namespace hrtrust {

/// Linear links from the trust drive 1 - sqrt(1 - T) to behaviour, T the normalised
/// utility. Reaction delays are fractions of tau. Noise terms are per-cycle standard deviations.
struct BehaviorCoeffs {
    double reaction_min = 0.04;  ///< delay at T = 1
    double reaction_gain = 0.10;  ///< extra delay at T = 0
    double reaction_noise = 0.002;
    double coupling_offset = 0.25;  ///< hand/EE speed coupling at T = 0
    double coupling_gain = 0.70;
    double coupling_noise = 0.005;
    double ee_dwell_offset = 0.50;  ///< fraction of time watching the end effector
    double ee_dwell_gain = -0.25;
    double task_dwell_offset = 0.25;  ///< fraction of time watching the task area
    double task_dwell_gain = 0.25;
    double dwell_noise = 0.004;
    double head_base = 0.03;  ///< lean amplitude, m
    double head_gain = 0.08;
    double head_noise = 0.0015;

    /// Copy with every noise term zeroed.
    [[nodiscard]] BehaviorCoeffs noiseless() const;

    friend bool operator==(const BehaviorCoeffs&, const BehaviorCoeffs&) = default;
};

struct SyntheticOperator {
    std::string id;
    ParamBox box;
    InteractionParams x_star;
    std::array<double, 3> w{1.0, 1.0, 1.0};
    double preference_noise = 15.0;  ///< logistic scale; infinity means noiseless
    BehaviorCoeffs behavior;
    std::uint64_t rng_seed = 0;

    void validate() const;
    friend bool operator==(const SyntheticOperator&, const SyntheticOperator&) = default;
};

/// -sum_i w_i ((x_i - x*_i) / range_i)^2.
double latent_utility(const SyntheticOperator& op, const InteractionParams& x);

/// Largest drop of the utility below its maximum over the box.
double utility_range(const SyntheticOperator& op);

/// 1 + u(x) / utility_range, in [0, 1].
double normalized_trust(const SyntheticOperator& op, const InteractionParams& x);

/// +1 when x2 is preferred, with probability logistic(beta (u(x2) - u(x1))).
int answer_preference(const SyntheticOperator& op, const InteractionParams& x1, const InteractionParams& x2,
                      Rng& rng);

struct SimulatorConfig {
    WorkspaceLayout layout;
    ParamBox box;
    double dt = kDefaultDt;
    double t_robot = 0.5;  ///< robot start, s
    double tail = 0.5;     ///< recording continues after the robot stops, s
    double sensor_sigma = 0.002;
    double head_height = 0.45;
    Vec3 away_target{-0.2, -1.0, 0.45};
    double gaze_block = 1.0;   ///< gaze allocation period, s
    Vec3 hand_rest{0.05, 0.30, 0.20};  ///< the hand reaches from here to the beaker at C
    double hand_rush = 1.6;    ///< uncoupled hand move duration as a fraction of tau

    void validate() const;
    friend bool operator==(const SimulatorConfig&, const SimulatorConfig&) = default;
};

/// Behaviour drawn for one cycle before streams are rendered.
struct CycleBehavior {
    double trust = 0.0;
    double drive = 0.0;
    double reaction_delay = 0.0;  ///< s
    double coupling = 0.0;
    double ee_dwell = 0.0;
    double task_dwell = 0.0;
    double head_lean = 0.0;
};

CycleBehavior draw_behavior(const SyntheticOperator& op, const InteractionParams& x, Rng& rng);

/// Head, hand and EE streams for one cycle of traj executed for x. Pure function of its inputs.
CycleRecording simulate_cycle(const SyntheticOperator& op, const Trajectory& traj, const InteractionParams& x,
                              std::uint64_t seed, const SimulatorConfig& cfg = {});

/// Heterogeneous operator: interior x*, jittered weights and coefficients. The sign of the
/// task-attention gain alternates with the index.
SyntheticOperator sample_operator(std::size_t index, std::uint64_t seed, const ParamBox& box = {});

/// Speed bounds from the 1st/99th percentiles of pilot cycles, j_max from the fastest
/// admissible trajectories and tau bounds from the box.
NormalizationBounds calibrate_bounds(const SimulatorConfig& cfg, std::uint64_t seed, std::size_t n_cycles = 40,
                                     std::size_t speed_window = 5);

/// One labelled comparison: best (x1) against the new candidate (x2).
struct StudyRow {
    std::string operator_id;
    int iteration = 0;
    std::string best_ref;
    std::string candidate_ref;
    InteractionParams x1;
    InteractionParams x2;
    int pi = -1;

    friend bool operator==(const StudyRow&, const StudyRow&) = default;
};

struct Study {
    std::uint64_t seed = 0;
    SimulatorConfig config;
    std::vector<SyntheticOperator> operators;
    std::vector<SessionState> sessions;
    std::map<std::string, CycleRecording> recordings;
    std::map<std::string, Trajectory> trajectories;
    std::vector<StudyRow> rows;

    friend bool operator==(const Study&, const Study&) = default;
};

/// Runs one PBO session per operator against its simulated preferences and records every
/// evaluated point once.
Study generate_study(std::size_t n_ops = 14, int n_evals = 15, std::uint64_t seed = 0,
                     const SimulatorConfig& cfg = {});

/// SHA-256 over the serialised bundle contents.
std::string study_hash(const Study& study);

/// Directory with operators.json, labels.csv, recordings/, trajectories/ and sessions/.
void write_study(const std::filesystem::path& dir, const Study& study);
Study read_study(const std::filesystem::path& dir);

void to_json(json& j, const BehaviorCoeffs& c);
void from_json(const json& j, BehaviorCoeffs& c);
void to_json(json& j, const SyntheticOperator& op);
void from_json(const json& j, SyntheticOperator& op);
void to_json(json& j, const SimulatorConfig& c);
void from_json(const json& j, SimulatorConfig& c);

}  // namespace hrtrust
