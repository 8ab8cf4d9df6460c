#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/trajectory/trajectory.hpp"

using namespace hrtrust;

namespace {

// Simpson integral of the analytic squared jerk of the 1-D quintic from a to b over tau.
double quintic_jerk_oracle(double a, double b, double tau) {
    auto jerk = [&](double t) {
        const double u = t / tau;
        return (b - a) / (tau * tau * tau) * (60.0 - 360.0 * u + 360.0 * u * u);
    };
    const int n = 20000;
    const double h = tau / n;
    double acc = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
        const double j = jerk(i * h);
        acc += w * j * j;
    }
    return acc * h / 3.0;
}

Trajectory circle(double radius, double omega, double duration, double dt = 0.01) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, duration, dt)) {
        traj.samples.push_back({t, {radius * std::cos(omega * t), radius * std::sin(omega * t), 0.2}});
    }
    return traj;
}

Trajectory parabola(double speed, double dt = 0.01) {
    Trajectory traj;
    const double duration = 2.0 / speed;
    for (double t : uniform_grid(0.0, duration, dt)) {
        const double s = -1.0 + speed * t;
        traj.samples.push_back({t, {s, 0.5 * s * s, 0.0}});
    }
    return traj;
}

double max_z(const Trajectory& t) {
    double m = -1e300;
    for (const auto& s : t.samples) {
        m = std::max(m, s.value.z);
    }
    return m;
}

}  // namespace

TEST(MinJerk, BoundaryConditions) {
    const Vec3 a{0.4, 0.62, 0.05};
    const Vec3 b{0.66, -0.2, 0.05};
    const auto traj = min_jerk_base(a, b, 7.5, 0.001);
    EXPECT_EQ(traj.samples.front().value, a);
    EXPECT_EQ(traj.samples.back().value, b);
    EXPECT_DOUBLE_EQ(traj.duration(), 7.5);
    const auto v = finite_diff(traj.samples, 1);
    const auto acc = finite_diff(traj.samples, 2);
    EXPECT_LT(norm(v.front().value), 1e-6);
    EXPECT_LT(norm(v.back().value), 1e-6);
    EXPECT_LT(norm(acc.front().value), 1e-6);
    EXPECT_LT(norm(acc.back().value), 1e-6);
    const auto mid = sample_at(traj.samples, 3.75);
    EXPECT_LT(norm(mid - (a + b) * 0.5), 1e-12);
}

TEST(MinJerk, AnalyticBoundaryDerivativesVanish) {
    // Quintic 10u^3 - 15u^4 + 6u^5: derivative 30u^2 - 60u^3 + 30u^4, second 60u - 180u^2 + 120u^3.
    for (double u : {0.0, 1.0}) {
        EXPECT_NEAR(30 * u * u - 60 * u * u * u + 30 * u * u * u * u, 0.0, 1e-12);
        EXPECT_NEAR(60 * u - 180 * u * u + 120 * u * u * u, 0.0, 1e-12);
    }
}

TEST(MinJerk, SamePointIsConstant) {
    const Vec3 a{0.3, 0.1, 0.05};
    const auto traj = min_jerk_base(a, a, 5.0);
    for (const auto& s : traj.samples) {
        EXPECT_EQ(s.value, a);
    }
    EXPECT_NEAR(squared_jerk_integral(traj), 0.0, 1e-15);
}

TEST(MinJerk, RejectsBadTiming) {
    EXPECT_THROW(min_jerk_base({}, {1, 0, 0}, 1.0, 1.0), InvalidInput);
    EXPECT_THROW(min_jerk_base({}, {1, 0, 0}, 0.0, 0.01), InvalidInput);
}

TEST(SquaredJerk, QuinticUnitMatchesAnalyticIntegral) {
    const double oracle = quintic_jerk_oracle(0.0, 1.0, 1.0);
    EXPECT_NEAR(oracle, 720.0, 1e-6);
    const auto traj = min_jerk_base({0, 0, 0}, {1, 0, 0}, 1.0, 0.001);
    EXPECT_NEAR(squared_jerk_integral(traj) / oracle, 1.0, 0.01);
}

TEST(SquaredJerk, QuinticScalesWithDistanceAndDuration) {
    for (double tau : {5.0, 7.5, 10.0}) {
        const double oracle = quintic_jerk_oracle(0.0, 0.8, tau);
        const auto traj = min_jerk_base({0, 0, 0}, {0.8, 0, 0}, tau, 0.01);
        EXPECT_NEAR(squared_jerk_integral(traj) / oracle, 1.0, 0.01);
        EXPECT_NEAR(oracle, 720.0 * 0.64 / std::pow(tau, 5), 1e-9);
    }
}

TEST(SquaredJerk, ConstantVelocityIsZero) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, 2.0, 0.01)) {
        traj.samples.push_back({t, {0.1 * t, -0.2 * t, 0.05}});
    }
    EXPECT_NEAR(squared_jerk_integral(traj), 0.0, 1e-9);
}

TEST(SquaredJerk, HomogeneousOfDegreeTwo) {
    const auto traj = planned_trajectory({}, {});
    Trajectory scaled = traj;
    for (auto& s : scaled.samples) {
        s.value = s.value * 3.0;
    }
    EXPECT_NEAR(squared_jerk_integral(scaled), 9.0 * squared_jerk_integral(traj),
                1e-9 * squared_jerk_integral(scaled));
}

TEST(SquaredJerk, RotationInvariant) {
    Rng rng(17);
    const auto traj = planned_trajectory({6.0, 0.6, 0.35}, {});
    const double base = squared_jerk_integral(traj);
    for (int i = 0; i < 10; ++i) {
        const Quat q = Quat{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)}.normalized();
        Trajectory r = traj;
        for (auto& s : r.samples) {
            s.value = q.rotate(s.value);
        }
        EXPECT_NEAR(squared_jerk_integral(r), base, 1e-9 * base);
    }
}

TEST(SquaredJerk, TooShort) {
    Trajectory traj;
    for (int i = 0; i < 4; ++i) {
        traj.samples.push_back({0.1 * i, {}});
    }
    EXPECT_THROW(squared_jerk_integral(traj), InvalidInput);
}

TEST(Curvature, CircleRadius) {
    const auto r = curvature_radius(circle(0.3, 1.0, 6.0));
    for (std::size_t i = 1; i + 1 < r.size(); ++i) {
        EXPECT_NEAR(r[i].value, 0.3, 1e-4);
    }
}

TEST(Curvature, StraightLineClampsToMax) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, 1.0, 0.01)) {
        traj.samples.push_back({t, {0.2 * t, 0.1 * t, 0.0}});
    }
    for (const auto& s : curvature_radius(traj)) {
        EXPECT_EQ(s.value, 2.0);
    }
    CurvatureConfig cfg;
    cfg.r_max = 5.0;
    EXPECT_EQ(curvature_radius(traj, cfg)[10].value, 5.0);
}

TEST(Curvature, StationaryClampsToMax) {
    Trajectory traj;
    for (double t : uniform_grid(0.0, 1.0, 0.01)) {
        traj.samples.push_back({t, {0.2, 0.1, 0.0}});
    }
    for (const auto& s : curvature_radius(traj)) {
        EXPECT_EQ(s.value, 2.0);
    }
}

TEST(Curvature, SpeedDoublingLeavesRadiusUnchanged) {
    // Parabola y = x^2/2 at constant parameter speed: central differences are exact.
    const auto slow = curvature_radius(parabola(1.0, 0.01));
    const auto fast = curvature_radius(parabola(2.0, 0.005));
    ASSERT_EQ(slow.size(), fast.size());
    for (std::size_t i = 0; i < slow.size(); ++i) {
        EXPECT_NEAR(slow[i].value, fast[i].value, 1e-6);
    }
    // Analytic radius (1 + x^2)^{3/2} at x = 0.
    EXPECT_NEAR(slow[slow.size() / 2].value, 1.0, 1e-9);
}

TEST(Curvature, ReparameterisationInvariance) {
    const auto a = curvature_radius(circle(0.5, 0.5, 8.0));
    const auto b = curvature_radius(circle(0.5, 0.25, 16.0, 0.02));
    for (std::size_t i = 1; i + 1 < a.size(); i += 7) {
        EXPECT_NEAR(a[i].value, b[i].value, 1e-4);
    }
}

TEST(Adapt, DurationAndBounds) {
    const WorkspaceLayout layout;
    const auto base = min_jerk_base(layout.a, layout.b, 7.5);
    for (const InteractionParams x : {InteractionParams{5.0, 0.52, 0.26}, InteractionParams{10.0, 0.65, 0.40},
                                      InteractionParams{7.3, 0.58, 0.31}}) {
        const auto out = adapt(base, x, layout);
        EXPECT_NEAR(out.duration(), x.tau, 1e-12);
        EXPECT_NEAR(out.dt(), 0.01, 1e-3);
        for (const auto& s : out.samples) {
            EXPECT_GE(horizontal_distance(s.value, layout.human_center), x.d - 1e-6);
        }
        EXPECT_NEAR(max_z(out), x.h, 1e-6);
        EXPECT_EQ(out.samples.front().value, layout.a);
        EXPECT_EQ(out.samples.back().value, layout.b);
    }
}

TEST(Adapt, ProjectionIsNoOpForSmallD) {
    const WorkspaceLayout layout;
    const auto base = min_jerk_base(layout.a, layout.b, 7.5);
    const auto out = adapt(base, {7.5, 0.1, 0.3}, layout);
    ASSERT_EQ(out.samples.size(), base.samples.size());
    for (std::size_t i = 0; i < out.samples.size(); ++i) {
        EXPECT_NEAR(out.samples[i].value.x, base.samples[i].value.x, 1e-15);
        EXPECT_NEAR(out.samples[i].value.y, base.samples[i].value.y, 1e-15);
    }
}

TEST(Adapt, SegmentAtFortyCentimetresIsPushedToRadius) {
    WorkspaceLayout layout;
    layout.a = {0.40, 0.70, 0.05};
    layout.b = {0.40, -0.70, 0.05};
    const auto base = min_jerk_base(layout.a, layout.b, 7.0);
    const auto out = adapt(base, {7.0, 0.52, 0.3}, layout);
    std::size_t violating = 0;
    for (std::size_t i = 0; i < base.samples.size(); ++i) {
        const double before = horizontal_distance(base.samples[i].value, layout.human_center);
        const double after = horizontal_distance(out.samples[i].value, layout.human_center);
        if (before < 0.52) {
            ++violating;
            EXPECT_NEAR(after, 0.52, 1e-12);
            // Radial: the angle around the centre is kept.
            EXPECT_NEAR(std::atan2(out.samples[i].value.y, out.samples[i].value.x),
                        std::atan2(base.samples[i].value.y, base.samples[i].value.x), 1e-12);
        } else {
            EXPECT_NEAR(after, before, 1e-15);
        }
    }
    EXPECT_GT(violating, 100u);
}

TEST(Adapt, DoublingTauHalvesSpeeds) {
    const WorkspaceLayout layout;
    const auto base = min_jerk_base(layout.a, layout.b, 5.0);
    const auto a = adapt(base, {5.0, 0.55, 0.3}, layout);
    const auto b = adapt(base, {10.0, 0.55, 0.3}, layout);
    const auto va = finite_diff(a.samples, 1);
    const auto vb = finite_diff(b.samples, 1);
    for (std::size_t i = 10; i + 10 < va.size(); i += 10) {
        const double speed_a = norm(va[i].value);
        const auto p = sample_at(b.samples, 2.0 * va[i].t);
        EXPECT_LT(norm(p - a.samples[i].value), 1e-3);
        const double speed_b = norm(sample_at(vb, 2.0 * va[i].t));
        EXPECT_NEAR(speed_b, 0.5 * speed_a, 2e-3 * speed_a + 1e-6);
    }
}

TEST(Adapt, Idempotent) {
    const WorkspaceLayout layout;
    Rng rng(3);
    const ParamBox box;
    for (int i = 0; i < 20; ++i) {
        const auto x = box.from_unit({uniform01(rng), uniform01(rng), uniform01(rng)});
        const auto once = adapt(min_jerk_base(layout.a, layout.b, 7.5), x, layout);
        const auto twice = adapt(once, x, layout);
        ASSERT_EQ(once.samples.size(), twice.samples.size());
        for (std::size_t k = 0; k < once.samples.size(); ++k) {
            EXPECT_LT(norm(once.samples[k].value - twice.samples[k].value), 1e-6);
            EXPECT_NEAR(once.samples[k].t, twice.samples[k].t, 1e-12);
        }
    }
}

TEST(Adapt, EndpointInsideCircleIsInfeasible) {
    WorkspaceLayout layout;
    layout.a = {0.3, 0.2, 0.05};
    EXPECT_THROW(adapt(min_jerk_base(layout.a, layout.b, 7.5), {7.5, 0.55, 0.3}, layout), InfeasibleLayout);
    EXPECT_THROW(planned_trajectory({7.5, 0.55, 0.3}, layout), InfeasibleLayout);
}

TEST(Adapt, HeightBelowEndpointsIsInfeasible) {
    const WorkspaceLayout layout;
    EXPECT_THROW(adapt(min_jerk_base(layout.a, layout.b, 7.5), {7.5, 0.55, 0.01}, layout), InfeasibleLayout);
}

TEST(Adapt, ExistingBumpIsScaled) {
    WorkspaceLayout layout;
    Trajectory base;
    for (double t : uniform_grid(0.0, 4.0, 0.01)) {
        const double u = t / 4.0;
        base.samples.push_back({t, {0.6 + 0.1 * u, 0.1 * u, 0.05 + 0.2 * u * (1 - u)}});
    }
    const auto out = adapt(base, {4.0, 0.5, 0.35}, layout);
    EXPECT_NEAR(max_z(out), 0.35, 1e-9);
    const double factor = (out.samples[100].value.z - 0.05) / (base.samples[100].value.z - 0.05);
    for (std::size_t k = 20; k + 20 < out.samples.size(); k += 20) {
        EXPECT_NEAR((out.samples[k].value.z - 0.05) / (base.samples[k].value.z - 0.05), factor, 1e-9);
    }
}

TEST(ParamBox, ValidateNamesField) {
    ParamBox box;
    box.lower.d = 0.7;
    try {
        box.validate();
        FAIL();
    } catch (const InvalidInput& e) {
        EXPECT_NE(std::string(e.what()).find("'d'"), std::string::npos);
    }
}

TEST(ParamBox, UnitRoundTrip) {
    const ParamBox box;
    const InteractionParams x{6.1, 0.6, 0.3};
    const auto back = box.from_unit(box.to_unit(x));
    EXPECT_NEAR(back.tau, x.tau, 1e-12);
    EXPECT_NEAR(back.d, x.d, 1e-12);
    EXPECT_NEAR(back.h, x.h, 1e-12);
    EXPECT_TRUE(box.contains(x));
    EXPECT_FALSE(box.contains({11.0, 0.6, 0.3}));
}

TEST(TrajectoryIo, CsvAndJsonRoundTrip) {
    const auto traj = planned_trajectory({6.0, 0.6, 0.35}, {});
    std::stringstream ss;
    write_trajectory_csv(ss, traj);
    EXPECT_EQ(read_trajectory_csv(ss), traj);
    const json j = traj;
    EXPECT_EQ(j.get<Trajectory>(), traj);
    const json l = WorkspaceLayout{};
    EXPECT_EQ(l.get<WorkspaceLayout>(), WorkspaceLayout{});
    const json b = ParamBox{};
    EXPECT_EQ(b.get<ParamBox>(), ParamBox{});
}

TEST(TrajectoryIo, RejectsMalformedCsv) {
    std::stringstream bad("x,y\n1,2\n");
    EXPECT_THROW(read_trajectory_csv(bad), InvalidInput);
    std::stringstream rows("t,x,y,z\n0,0,0,0\n0,1,1,1\n");
    EXPECT_THROW(read_trajectory_csv(rows), InvalidInput);
}
