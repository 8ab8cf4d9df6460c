#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "../oracles/indicator_oracle.hpp"
#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/indicators/indicators.hpp"

using namespace hrtrust;

namespace {

/// Head pose at `pos` whose gaze axis points at `target`.
Pose look_at(const Vec3& pos, const Vec3& target) {
    const Vec3 d = target - pos;
    const double yaw = std::atan2(d.y, d.x);
    const double pitch = std::atan2(-d.z, std::hypot(d.x, d.y));
    const Quat q = Quat::from_axis_angle({0, 0, 1}, yaw) * Quat::from_axis_angle({0, 1, 0}, pitch - kGazeTilt);
    return {pos, q};
}

Trajectory circle(double radius, double omega, double duration) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, duration, 0.01)) {
        traj.samples.push_back({t, {radius * std::cos(omega * t), radius * std::sin(omega * t), 0.0}});
    }
    return traj;
}

CycleRecording random_recording(Rng& rng, const Trajectory& traj) {
    CycleRecording rec;
    rec.cycle_id = "synthetic";
    const double duration = traj.duration() + 1.0;
    rec.t_robot = 0.5;
    rec.t_human = 0.5 + 2.0 * uniform01(rng);
    const Vec3 head0{0.0, 0.0, 0.45};
    const double f1 = 0.2 + uniform01(rng);
    const double f2 = 0.2 + uniform01(rng);
    for (double t : uniform_grid(0.0, duration, 0.01)) {
        const Vec3 ee = sample_at(traj.samples, t - rec.t_robot);
        const Vec3 noise{0.002 * standard_normal(rng), 0.002 * standard_normal(rng), 0.002 * standard_normal(rng)};
        const Vec3 head = head0 + Vec3{0.03 * std::sin(f1 * t), 0.02 * std::cos(f2 * t), 0.01 * std::sin(t)} + noise;
        const Vec3 target = t < duration / 2 ? ee : Vec3{0.66, -0.2, 0.05};
        Pose p = look_at(head, target + Vec3{0.05 * std::sin(3 * t), 0.05 * std::cos(2 * t), 0.0});
        rec.head.push_back({t, p});
        rec.hand.push_back({t, Vec3{0.42, -0.42 + 0.1 * std::sin(f2 * t), 0.05} + noise});
        rec.ee.push_back({t, ee + noise});
    }
    return rec;
}

void expect_vectors_near(const IndicatorVector& a, const IndicatorVector& b, double tol) {
    const auto va = a.values();
    const auto vb = b.values();
    for (std::size_t i = 0; i < kIndicatorCount; ++i) {
        EXPECT_NEAR(va[i], vb[i], tol) << IndicatorVector::names[i];
    }
}

}  // namespace

TEST(RaisedCosine, Landmarks) {
    EXPECT_EQ(raised_cosine(0.1, 0.1, 0.3), 1.0);
    EXPECT_EQ(raised_cosine(-0.1, 0.1, 0.3), 1.0);
    EXPECT_EQ(raised_cosine(0.2, 0.1, 0.3), 0.5);
    EXPECT_NEAR(raised_cosine(0.3, 0.1, 0.3), 0.0, 1e-16);
    EXPECT_EQ(raised_cosine(0.31, 0.1, 0.3), 0.0);
    EXPECT_THROW(raised_cosine(0.0, 0.3, 0.3), InvalidInput);
}

TEST(RaisedCosine, MidpointIsExactlyHalf) {
    Rng rng(11);
    for (int i = 0; i < 1000; ++i) {
        const double lo = 0.01 + uniform01(rng);
        const double hi = lo + 0.01 + uniform01(rng);
        EXPECT_EQ(raised_cosine(0.5 * (lo + hi), lo, hi), 0.5);
    }
}

TEST(RaisedCosine, ContinuousAndMonotone) {
    const double lo = 0.2;
    const double hi = 0.5;
    double prev = raised_cosine(-0.8, lo, hi);
    double prev_abs = 1.0;
    for (double a = -0.8; a <= 0.8; a += 1e-4) {
        const double v = raised_cosine(a, lo, hi);
        EXPECT_LT(std::abs(v - prev), 1e-3);
        prev = v;
    }
    // Narrow roll-offs: jumps stay within the slope bound pi / (2 (hi - lo)) per radian.
    const double nlo = std::atan(0.06);
    const double nhi = std::atan(0.14);
    const double bound = std::numbers::pi / (2.0 * (nhi - nlo)) * 1e-4 * (1.0 + 1e-9);
    prev = raised_cosine(-0.3, nlo, nhi);
    for (double a = -0.3; a <= 0.3; a += 1e-4) {
        const double v = raised_cosine(a, nlo, nhi);
        EXPECT_LE(std::abs(v - prev), bound);
        prev = v;
    }
    for (double a = 0.0; a <= 0.8; a += 1e-4) {
        const double v = raised_cosine(a, lo, hi);
        EXPECT_LE(v, prev_abs);
        prev_abs = v;
    }
}

TEST(AttentionThresholds, Example) {
    const auto th = attention_thresholds(1.0, 0.1, 0.4);
    // Independent Taylor series for atan on |x| < 1.
    auto series = [](double x) {
        double acc = 0.0;
        double p = x;
        for (int k = 0; k < 40; ++k) {
            acc += (k % 2 == 0 ? 1.0 : -1.0) * p / (2 * k + 1);
            p *= x * x;
        }
        return acc;
    };
    EXPECT_NEAR(th.alpha_min, series(0.06), 1e-15);
    EXPECT_NEAR(th.alpha_max, series(0.14), 1e-15);
    EXPECT_NEAR(th.alpha_min, 0.05993, 1e-5);
    EXPECT_NEAR(th.alpha_max, 0.13909, 1e-5);
    EXPECT_DOUBLE_EQ(th.alpha_min, std::atan(0.06));
    EXPECT_DOUBLE_EQ(th.alpha_max, std::atan(0.14));
}

TEST(AttentionThresholds, LimitsAndMonotonicity) {
    const auto z = attention_thresholds(1.0, 0.1, 0.0);
    EXPECT_EQ(z.alpha_min, z.alpha_max);
    EXPECT_DOUBLE_EQ(z.alpha_min, std::atan(0.1));
    const auto near = attention_thresholds(0.5, 0.1, 0.4);
    const auto far = attention_thresholds(1.0, 0.1, 0.4);
    EXPECT_GT(near.alpha_min, far.alpha_min);
    EXPECT_GT(near.alpha_max, far.alpha_max);
    EXPECT_THROW(attention_thresholds(0.0, 0.1, 0.4), InvalidInput);
}

TEST(AttentionLevel, DirectGazeIsOne) {
    const Vec3 target{0.5, -0.3, 0.1};
    EXPECT_NEAR(attention_level(gaze_frame(look_at({0, 0, 0.5}, target)), target, 0.1, 0.4), 1.0, 1e-12);
}

TEST(AttentionLevel, BeyondAlphaMaxIsZero) {
    const Pose gaze{{0, 0, 0}, Quat::identity()};
    const double th = std::atan(0.14);
    EXPECT_EQ(attention_level(gaze, from_spherical({th + 0.01, 0.0, 1.0}), 0.1, 0.4), 0.0);
    EXPECT_EQ(attention_level(gaze, from_spherical({th + 0.01, 0.03, 1.0}), 0.1, 0.4), 0.0);
}

TEST(AttentionLevel, BothMidpointsGiveQuarter) {
    // With r/d fixed the thresholds stay fixed, so put the target at distance 1 in spherical form.
    const Pose gaze{{0.2, 0.1, 0.3}, Quat::from_axis_angle({0, 0, 1}, 0.4)};
    const double mid = 0.5 * (std::atan(0.06) + std::atan(0.14));
    const Vec3 local = from_spherical({mid, mid, 1.0});
    const Vec3 world = gaze.position + gaze.orientation.rotate(local);
    EXPECT_NEAR(attention_level(gaze, world, 0.1, 0.4), 0.25, 1e-12);
}

TEST(AttentionLevel, InvariantUnderWorldRotation) {
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        const Quat q = Quat{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)}.normalized();
        const Quat g = Quat{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)}.normalized();
        const Pose gaze{{0.1 * standard_normal(rng), 0.1 * standard_normal(rng), 0.5}, g};
        const Vec3 target = gaze.position + gaze.orientation.rotate(Vec3{1.0, 0.08 * standard_normal(rng), 0.08 * standard_normal(rng)});
        const Pose rotated{q.rotate(gaze.position), (q * g).normalized()};
        EXPECT_NEAR(attention_level(gaze, target, 0.1, 0.4), attention_level(rotated, q.rotate(target), 0.1, 0.4), 1e-9);
    }
}

TEST(AttentionLevel, CoincidentTargetIsDegenerate) {
    const Pose gaze{{0.1, 0.2, 0.3}, Quat::identity()};
    EXPECT_THROW(attention_level(gaze, gaze.position, 0.1, 0.4), DegenerateInput);
}

TEST(Displacement, Examples) {
    EXPECT_EQ(spatial_displacement({1, 2, 3}, {1, 2, 3}, 0.5), 0.0);
    EXPECT_DOUBLE_EQ(spatial_displacement({0.5, 0, 0}, {}, 0.5), 1.0);
    EXPECT_DOUBLE_EQ(spatial_displacement({0, 0.25, 0}, {}, 0.5), 0.5);
    EXPECT_EQ(spatial_displacement({0, 3, 0}, {}, 0.5), 1.0);
}

TEST(SpeedSync, Examples) {
    const NormalizationBounds b;
    EXPECT_EQ(speed_sync(0.0, 0.0, b), 1.0);
    EXPECT_EQ(speed_sync(0.6, 0.0, b), 0.0);
    EXPECT_DOUBLE_EQ(speed_sync(0.3, 0.2, b), 1.0);
    EXPECT_EQ(speed_sync(5.0, -1.0, b), 0.0);
}

TEST(ReactionTime, Examples) {
    EXPECT_EQ(reaction_time(1.0, 1.0, 5.0), 0.0);
    EXPECT_EQ(reaction_time(6.0, 1.0, 5.0), 1.0);
    EXPECT_DOUBLE_EQ(reaction_time(2.25, 1.0, 5.0), 0.25);
    EXPECT_EQ(reaction_time(20.0, 1.0, 5.0), 1.0);
}

TEST(Predictability, Extremes) {
    NormalizationBounds b;
    b.j_min = 0.2;
    b.j_max = 1.5;
    EXPECT_EQ(predictability_from_integral(b.j_max * b.j_max * b.tau_max, b), 0.0);
    EXPECT_EQ(predictability_from_integral(b.j_min * b.j_min * b.tau_min, b), 1.0);
    NormalizationBounds z;
    EXPECT_DOUBLE_EQ(predictability_from_integral(0.5 * z.j_max * z.j_max * z.tau_max, z), 0.5);
    b.j_max = b.j_min;
    b.tau_max = b.tau_min;
    EXPECT_THROW(predictability_from_integral(1.0, b), InvalidInput);
}

TEST(Predictability, ConstantJerkTrajectories) {
    // Cubic x = j t^3 / 6 has constant jerk j; integral j^2 tau.
    NormalizationBounds b;
    b.j_min = 0.1;
    b.j_max = 0.4;
    auto cubic = [](double j, double tau) {
        Trajectory traj;
        for (double t : uniform_grid(0.0, tau, 0.01)) {
            traj.samples.push_back({t, {j * t * t * t / 6.0, 0.0, 0.0}});
        }
        return traj;
    };
    EXPECT_NEAR(predictability(cubic(b.j_max, b.tau_max), b), 0.0, 1e-6);
    EXPECT_NEAR(predictability(cubic(b.j_min, b.tau_min), b), 1.0, 1e-6);
}

TEST(Predictability, MonotoneInIntegral) {
    const NormalizationBounds b;
    double prev = 2.0;
    for (double s = 0.0; s < 20.0; s += 0.05) {
        const double v = predictability_from_integral(s, b);
        EXPECT_LE(v, prev);
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
        prev = v;
    }
}

TEST(Legibility, CircleCases) {
    CurvatureConfig cfg;
    cfg.r_max = 0.6;
    const auto full = legibility(circle(0.6, 0.5, 12.0), cfg);
    const auto half = legibility(circle(0.3, 1.0, 6.0), cfg);
    for (std::size_t i = 1; i + 1 < full.size(); ++i) {
        EXPECT_NEAR(full[i].value, 1.0, 1e-4);
    }
    for (std::size_t i = 1; i + 1 < half.size(); ++i) {
        EXPECT_NEAR(half[i].value, 0.5, 1e-4);
    }
}

TEST(Legibility, StraightSegmentIsOne) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, 2.0, 0.01)) {
        traj.samples.push_back({t, {0.3 * t, 0.0, 0.1}});
    }
    for (const auto& s : legibility(traj)) {
        EXPECT_EQ(s.value, 1.0);
    }
}

TEST(CycleSummary, GazeFixedOnEndEffector) {
    const auto traj = planned_trajectory({}, {});
    CycleRecording rec;
    rec.t_robot = 0.0;
    rec.t_human = 0.6;
    for (const auto& s : traj.samples) {
        const Vec3 head{0.0, 0.0, 0.5};
        rec.head.push_back({s.t, look_at(head, s.value)});
        rec.hand.push_back({s.t, {0.42, -0.42, 0.05}});
        rec.ee.push_back({s.t, s.value});
    }
    const auto v = cycle_summary(rec, traj, {});
    EXPECT_NEAR(v.attention_ee, 1.0, 1e-12);
    EXPECT_EQ(v.displacement, 0.0);
    EXPECT_NEAR(v.reaction_time, 0.6 / 7.5, 1e-12);
}

TEST(CycleSummary, FrozenOperatorSyncUsesZeroHandSpeed) {
    const auto traj = planned_trajectory({6.0, 0.6, 0.3}, {});
    const IndicatorConfig cfg;
    CycleRecording rec;
    const Pose head = look_at({0, 0, 0.5}, {0.5, 0, 0});
    for (const auto& s : traj.samples) {
        rec.head.push_back({s.t, head});
        rec.hand.push_back({s.t, {0.42, -0.42, 0.05}});
        rec.ee.push_back({s.t, s.value});
    }
    const auto v = cycle_summary(rec, traj, cfg);
    EXPECT_EQ(v.displacement, 0.0);

    // Brute force: per-sample 1 - n_ee with n_hand = 0, then mean.
    std::vector<double> speed;
    const std::size_t n = rec.ee.size();
    const double h = traj.samples[1].t - traj.samples[0].t;
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 v1;
        if (i == 0) {
            v1 = (rec.ee[0].value * -3.0 + rec.ee[1].value * 4.0 - rec.ee[2].value) / (2 * h);
        } else if (i == n - 1) {
            v1 = (rec.ee[n - 1].value * 3.0 - rec.ee[n - 2].value * 4.0 + rec.ee[n - 3].value) / (2 * h);
        } else {
            v1 = (rec.ee[i + 1].value - rec.ee[i - 1].value) / (2 * h);
        }
        speed.push_back(norm(v1));
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        int c = 0;
        for (std::size_t k = (i < 2 ? 0 : i - 2); k <= std::min(n - 1, i + 2); ++k, ++c) {
            s += speed[k];
        }
        const double ne = std::clamp(s / c, 0.0, cfg.bounds.v_max_ee) / cfg.bounds.v_max_ee;
        acc += 1.0 - ne;
    }
    EXPECT_NEAR(v.speed_sync, acc / static_cast<double>(n), 1e-12);
}

TEST(CycleSummary, MatchesIndependentOracle) {
    Rng rng(42);
    const ParamBox box;
    const WorkspaceLayout layout;
    for (int i = 0; i < 20; ++i) {
        const auto x = box.from_unit({uniform01(rng), uniform01(rng), uniform01(rng)});
        const auto traj = planned_trajectory(x, layout);
        const auto rec = random_recording(rng, traj);
        IndicatorConfig cfg;
        cfg.bounds.j_max = 0.3;
        const auto got = cycle_summary(rec, traj, cfg);
        const auto want = oracle::cycle_summary(rec, traj, cfg);
        expect_vectors_near(got, want, 1e-9);
        for (double v : got.values()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(CycleSummary, OutputsStayInUnitIntervalForWildInputs) {
    Rng rng(1234);
    for (int i = 0; i < 10; ++i) {
        const auto traj = planned_trajectory({5.0, 0.52, 0.4}, {});
        auto rec = random_recording(rng, traj);
        for (auto& s : rec.hand) {
            s.value = s.value + Vec3{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
        }
        for (auto& s : rec.head) {
            s.value.position = s.value.position + Vec3{standard_normal(rng), standard_normal(rng), 0.0} * 0.5;
        }
        for (double v : cycle_summary(rec, traj, {}).values()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(CycleSummary, EmptyStreamsRejected) {
    EXPECT_THROW(cycle_summary({}, planned_trajectory({}, {}), {}), InvalidInput);
}

TEST(IndicatorJson, RoundTrip) {
    const IndicatorVector v{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7};
    const json j = v;
    EXPECT_EQ(j.get<IndicatorVector>(), v);
    IndicatorConfig cfg;
    cfg.bounds.j_max = 0.25;
    cfg.attention.r_ee = 0.12;
    const json c = cfg;
    EXPECT_EQ(c.get<IndicatorConfig>(), cfg);
    EXPECT_EQ(json::object().get<IndicatorConfig>(), IndicatorConfig{});
}
