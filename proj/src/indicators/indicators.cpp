#include "hrtrust/indicators/indicators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hrtrust/core/error.hpp"

namespace hrtrust {

namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double mean(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) {
        acc += x;
    }
    return acc / static_cast<double>(v.size());
}

}  // namespace

void AttentionConfig::validate() const {
    if (!(r_ee > 0.0) || !(r_task > 0.0)) {
        throw InvalidInput("attention: radii must be positive");
    }
    if (!(delta > 0.0 && delta < 1.0)) {
        throw InvalidInput("attention: delta must lie in (0, 1)");
    }
}

void NormalizationBounds::validate() const {
    auto check = [](double lo, double hi, const char* name) {
        if (!(lo >= 0.0) || !(hi > lo)) {
            throw InvalidInput(std::string("bounds: '") + name + "' needs 0 <= min < max");
        }
    };
    if (!(d_max > 0.0)) {
        throw InvalidInput("bounds: d_max must be positive");
    }
    check(v_min_hand, v_max_hand, "v_hand");
    check(v_min_ee, v_max_ee, "v_ee");
    check(j_min, j_max, "j");
    check(tau_min, tau_max, "tau");
}

IndicatorVector IndicatorVector::from_values(const std::array<double, kIndicatorCount>& v) {
    return {v[0], v[1], v[2], v[3], v[4], v[5], v[6]};
}

double raised_cosine(double alpha, double alpha_min, double alpha_max) {
    if (!(alpha_min < alpha_max)) {
        throw InvalidInput("raised_cosine: need alpha_min < alpha_max");
    }
    const double a = std::abs(alpha);
    if (a <= alpha_min) {
        return 1.0;
    }
    if (a > alpha_max) {
        return 0.0;
    }
    // Same curve as 0.5 * (1 + cos(pi * (a - min) / (max - min))), centred on the midpoint
    // so that the midpoint evaluates to exactly 0.5.
    const double s = (2.0 * a - (alpha_min + alpha_max)) / (alpha_max - alpha_min);
    return 0.5 * (1.0 - std::sin(0.5 * std::numbers::pi * s));
}

AttentionThresholds attention_thresholds(double d, double r, double delta) {
    if (!(d > 0.0)) {
        throw InvalidInput("attention_thresholds: distance must be positive");
    }
    if (!(r > 0.0)) {
        throw InvalidInput("attention_thresholds: radius must be positive");
    }
    return {std::atan((1.0 - delta) * r / d), std::atan((1.0 + delta) * r / d)};
}

double attention_level(const Pose& gaze, const Vec3& target, double r, double delta) {
    const SphericalCoord s = to_spherical(gaze.to_local(target));
    const auto th = attention_thresholds(s.radius, r, delta);
    return raised_cosine(s.azimuth, th.alpha_min, th.alpha_max) *
           raised_cosine(s.elevation, th.alpha_min, th.alpha_max);
}

double spatial_displacement(const Vec3& head, const Vec3& init, double d_max) {
    if (!(d_max > 0.0)) {
        throw InvalidInput("spatial_displacement: d_max must be positive");
    }
    return clamp01(norm(head - init) / d_max);
}

double speed_sync(double v_hand, double v_ee, const NormalizationBounds& b) {
    const double vh = std::clamp(v_hand, b.v_min_hand, b.v_max_hand);
    const double ve = std::clamp(v_ee, b.v_min_ee, b.v_max_ee);
    const double nh = (vh - b.v_min_hand) / (b.v_max_hand - b.v_min_hand);
    const double ne = (ve - b.v_min_ee) / (b.v_max_ee - b.v_min_ee);
    return 1.0 - std::abs(nh - ne);
}

double reaction_time(double t_human, double t_robot, double tau) {
    if (!(tau > 0.0)) {
        throw InvalidInput("reaction_time: tau must be positive");
    }
    return clamp01(std::abs(t_human - t_robot) / tau);
}

double predictability_from_integral(double jerk_integral, const NormalizationBounds& b) {
    const double lo = b.j_min * b.j_min * b.tau_min;
    const double denom = b.j_max * b.j_max * b.tau_max - lo;
    if (!(std::abs(denom) > 0.0)) {
        throw InvalidInput("predictability: j_max^2 tau_max equals j_min^2 tau_min");
    }
    return clamp01(1.0 - (jerk_integral - lo) / denom);
}

double predictability(const Trajectory& traj, const NormalizationBounds& b) {
    return predictability_from_integral(squared_jerk_integral(traj), b);
}

Stream<double> legibility(const Trajectory& traj, const CurvatureConfig& cfg) {
    if (!(cfg.r_max > 0.0)) {
        throw InvalidInput("legibility: r_max must be positive");
    }
    auto r = curvature_radius(traj, cfg);
    for (auto& s : r) {
        s.value = std::min(s.value, cfg.r_max) / cfg.r_max;
    }
    return r;
}

std::vector<double> smoothed_speed(const Stream<Vec3>& positions, std::size_t window) {
    const auto vel = finite_diff(positions, 1);
    std::vector<double> speed(vel.size());
    for (std::size_t i = 0; i < vel.size(); ++i) {
        speed[i] = norm(vel[i].value);
    }
    return moving_average(speed, window);
}

IndicatorVector cycle_summary(const CycleRecording& raw, const Trajectory& traj, const IndicatorConfig& cfg) {
    cfg.attention.validate();
    cfg.bounds.validate();
    if (raw.head.empty() || raw.hand.empty() || raw.ee.empty() || traj.samples.empty()) {
        throw InvalidInput("cycle_summary: empty streams");
    }
    const CycleRecording rec = resample(raw, cfg.dt);
    const std::size_t n = rec.head.size();
    if (rec.hand.size() != n || rec.ee.size() != n) {
        throw InvalidInput("cycle_summary: streams are not time-aligned");
    }

    const auto v_hand = smoothed_speed(rec.hand, cfg.speed_window);
    const auto v_ee = smoothed_speed(rec.ee, cfg.speed_window);
    const Vec3 init = rec.head.front().value.position;
    const auto& att = cfg.attention;

    std::vector<double> lam_ee(n);
    std::vector<double> lam_task(n);
    std::vector<double> disp(n);
    std::vector<double> sync(n);
    for (std::size_t i = 0; i < n; ++i) {
        const Pose gaze = gaze_frame(rec.head[i].value);
        lam_ee[i] = attention_level(gaze, rec.ee[i].value, att.r_ee, att.delta);
        lam_task[i] = attention_level(gaze, att.task_center, att.r_task, att.delta);
        disp[i] = spatial_displacement(rec.head[i].value.position, init, cfg.bounds.d_max);
        sync[i] = speed_sync(v_hand[i], v_ee[i], cfg.bounds);
    }

    IndicatorVector out;
    out.attention_ee = mean(lam_ee);
    out.attention_task = mean(lam_task);
    out.displacement = mean(disp);
    out.speed_sync = mean(sync);
    out.reaction_time = reaction_time(rec.t_human, rec.t_robot, traj.duration());
    out.predictability = predictability(traj, cfg.bounds);
    out.legibility = mean(values_of(legibility(traj, cfg.curvature)));
    return out;
}

void to_json(json& j, const IndicatorVector& v) {
    j = json::object();
    const auto vals = v.values();
    for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        j[std::string(IndicatorVector::names[i])] = vals[i];
    }
}

void from_json(const json& j, IndicatorVector& v) {
    std::array<double, kIndicatorCount> vals{};
    for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        vals[i] = j.at(std::string(IndicatorVector::names[i])).get<double>();
    }
    v = IndicatorVector::from_values(vals);
}

void to_json(json& j, const AttentionConfig& c) {
    j = json{{"r_ee", c.r_ee}, {"r_task", c.r_task}, {"delta", c.delta}, {"task_center", c.task_center}};
}

void from_json(const json& j, AttentionConfig& c) {
    AttentionConfig d;
    c.r_ee = j.value("r_ee", d.r_ee);
    c.r_task = j.value("r_task", d.r_task);
    c.delta = j.value("delta", d.delta);
    c.task_center = j.contains("task_center") ? j.at("task_center").get<Vec3>() : d.task_center;
}

void to_json(json& j, const NormalizationBounds& b) {
    j = json{{"d_max", b.d_max},           {"v_min_hand", b.v_min_hand}, {"v_max_hand", b.v_max_hand},
             {"v_min_ee", b.v_min_ee},     {"v_max_ee", b.v_max_ee},     {"j_min", b.j_min},
             {"j_max", b.j_max},           {"tau_min", b.tau_min},       {"tau_max", b.tau_max}};
}

void from_json(const json& j, NormalizationBounds& b) {
    NormalizationBounds d;
    b.d_max = j.value("d_max", d.d_max);
    b.v_min_hand = j.value("v_min_hand", d.v_min_hand);
    b.v_max_hand = j.value("v_max_hand", d.v_max_hand);
    b.v_min_ee = j.value("v_min_ee", d.v_min_ee);
    b.v_max_ee = j.value("v_max_ee", d.v_max_ee);
    b.j_min = j.value("j_min", d.j_min);
    b.j_max = j.value("j_max", d.j_max);
    b.tau_min = j.value("tau_min", d.tau_min);
    b.tau_max = j.value("tau_max", d.tau_max);
}

void to_json(json& j, const IndicatorConfig& c) {
    j = json{{"attention", c.attention},
             {"bounds", c.bounds},
             {"curvature", {{"eps_velocity", c.curvature.eps_velocity},
                            {"eps_cross", c.curvature.eps_cross},
                            {"r_max", c.curvature.r_max}}},
             {"speed_window", c.speed_window},
             {"dt", c.dt}};
}

void from_json(const json& j, IndicatorConfig& c) {
    IndicatorConfig d;
    c.attention = j.contains("attention") ? j.at("attention").get<AttentionConfig>() : d.attention;
    c.bounds = j.contains("bounds") ? j.at("bounds").get<NormalizationBounds>() : d.bounds;
    c.curvature = d.curvature;
    if (j.contains("curvature")) {
        const auto& cj = j.at("curvature");
        c.curvature.eps_velocity = cj.value("eps_velocity", d.curvature.eps_velocity);
        c.curvature.eps_cross = cj.value("eps_cross", d.curvature.eps_cross);
        c.curvature.r_max = cj.value("r_max", d.curvature.r_max);
    }
    c.speed_window = j.value("speed_window", d.speed_window);
    c.dt = j.value("dt", d.dt);
}

}  // namespace hrtrust
