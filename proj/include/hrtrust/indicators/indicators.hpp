#pragma once

#include <array>
#include <string_view>
#include <vector>

#include "hrtrust/core/geometry.hpp"
#include "hrtrust/core/json.hpp"
#include "hrtrust/core/recording.hpp"
#include "hrtrust/trajectory/trajectory.hpp"

namespace hrtrust {

struct AttentionConfig {
    double r_ee = 0.10;    ///< end-effector containment radius, m
    double r_task = 0.15;  ///< task-area radius, m
    double delta = 0.4;
    Vec3 task_center{0.66, -0.20, 0.05};

    void validate() const;
    friend bool operator==(const AttentionConfig&, const AttentionConfig&) = default;
};

struct NormalizationBounds {
    double d_max = 0.5;  ///< m
    double v_min_hand = 0.0;
    double v_max_hand = 0.6;  ///< m/s
    double v_min_ee = 0.0;
    double v_max_ee = 0.4;  ///< m/s
    double j_min = 0.0;
    double j_max = 1.0;  ///< m/s^3
    double tau_min = 5.0;
    double tau_max = 10.0;

    void validate() const;
    friend bool operator==(const NormalizationBounds&, const NormalizationBounds&) = default;
};

inline constexpr std::size_t kIndicatorCount = 7;

/// Per-cycle averages of the trust indicators, each in [0, 1].
struct IndicatorVector {
    double attention_ee = 0.0;
    double attention_task = 0.0;
    double displacement = 0.0;
    double speed_sync = 0.0;
    double reaction_time = 0.0;
    double predictability = 0.0;
    double legibility = 0.0;

    static constexpr std::array<std::string_view, kIndicatorCount> names = {
        "attention_ee", "attention_task", "displacement", "speed_sync",
        "reaction_time", "predictability", "legibility"};

    [[nodiscard]] std::array<double, kIndicatorCount> values() const {
        return {attention_ee, attention_task, displacement, speed_sync, reaction_time, predictability, legibility};
    }
    static IndicatorVector from_values(const std::array<double, kIndicatorCount>& v);

    friend bool operator==(const IndicatorVector&, const IndicatorVector&) = default;
};

struct IndicatorConfig {
    AttentionConfig attention;
    NormalizationBounds bounds;
    CurvatureConfig curvature;
    std::size_t speed_window = 5;  ///< moving-average length for hand/EE speeds
    double dt = kDefaultDt;

    friend bool operator==(const IndicatorConfig&, const IndicatorConfig&) = default;
};

/// Fuzzy attention membership: 1 inside alpha_min, raised-cosine roll-off to 0 at alpha_max.
double raised_cosine(double alpha, double alpha_min, double alpha_max);

struct AttentionThresholds {
    double alpha_min;
    double alpha_max;
};

/// Distance-dependent angular thresholds for a target region of radius r seen from distance d.
AttentionThresholds attention_thresholds(double d, double r, double delta);

/// lambda(azimuth) * lambda(elevation) of the target seen from the gaze frame.
double attention_level(const Pose& gaze, const Vec3& target, double r, double delta);

double spatial_displacement(const Vec3& head, const Vec3& init, double d_max);

/// 1 - |n_hand - n_ee| with inputs clamped into their bounds before min-max normalisation.
double speed_sync(double v_hand, double v_ee, const NormalizationBounds& bounds);

double reaction_time(double t_human, double t_robot, double tau);

/// Normalised squared-jerk score from a precomputed integral.
double predictability_from_integral(double jerk_integral, const NormalizationBounds& bounds);
double predictability(const Trajectory& traj, const NormalizationBounds& bounds);

/// min(r, r_max) / r_max per sample.
Stream<double> legibility(const Trajectory& traj, const CurvatureConfig& cfg = {});

/// Speed magnitudes from central differences, smoothed by a centered moving average.
std::vector<double> smoothed_speed(const Stream<Vec3>& positions, std::size_t window);

/// Per-cycle averages. Time-varying indicators are averaged over the recording
/// (resampled to cfg.dt); reaction time, predictability and legibility come from the
/// cycle timing and the planned trajectory.
IndicatorVector cycle_summary(const CycleRecording& rec, const Trajectory& traj, const IndicatorConfig& cfg);

void to_json(json& j, const IndicatorVector& v);
void from_json(const json& j, IndicatorVector& v);
void to_json(json& j, const AttentionConfig& c);
void from_json(const json& j, AttentionConfig& c);
void to_json(json& j, const NormalizationBounds& b);
void from_json(const json& j, NormalizationBounds& b);
void to_json(json& j, const IndicatorConfig& c);
void from_json(const json& j, IndicatorConfig& c);

}  // namespace hrtrust
