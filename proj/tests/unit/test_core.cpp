#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/geometry.hpp"
#include "hrtrust/core/hash.hpp"
#include "hrtrust/core/recording.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/core/stream.hpp"

using namespace hrtrust;

namespace {

Stream<double> sampled(double t0, double t1, double dt, auto f) {
    Stream<double> s;
    for (double t : uniform_grid(t0, t1, dt)) {
        s.push_back({t, f(t)});
    }
    return s;
}

}  // namespace

TEST(Spherical, AxisAligned) {
    const auto s = to_spherical({1, 0, 0});
    EXPECT_DOUBLE_EQ(s.azimuth, 0.0);
    EXPECT_DOUBLE_EQ(s.elevation, 0.0);
    EXPECT_DOUBLE_EQ(s.radius, 1.0);
}

TEST(Spherical, Pole) {
    const auto s = to_spherical({0, 0, 1});
    EXPECT_DOUBLE_EQ(s.azimuth, 0.0);
    EXPECT_DOUBLE_EQ(s.elevation, std::numbers::pi / 2);
    EXPECT_DOUBLE_EQ(s.radius, 1.0);
}

TEST(Spherical, Diagonal) {
    const auto s = to_spherical({1, 1, 0});
    EXPECT_DOUBLE_EQ(s.azimuth, std::numbers::pi / 4);
    EXPECT_DOUBLE_EQ(s.elevation, 0.0);
    EXPECT_DOUBLE_EQ(s.radius, std::sqrt(2.0));
}

TEST(Spherical, AzimuthRangeExcludesMinusPi) {
    EXPECT_DOUBLE_EQ(to_spherical({-1, -0.0, 0}).azimuth, std::numbers::pi);
    EXPECT_DOUBLE_EQ(to_spherical({-1, 0.0, 0}).azimuth, std::numbers::pi);
}

TEST(Spherical, ZeroVectorIsDegenerate) { EXPECT_THROW(to_spherical({0, 0, 0}), DegenerateInput); }

TEST(Spherical, RoundTripProperty) {
    Rng rng(2024);
    for (int i = 0; i < 2000; ++i) {
        const Vec3 v{standard_normal(rng), standard_normal(rng), standard_normal(rng)};
        const Vec3 back = from_spherical(to_spherical(v));
        EXPECT_LE(norm(back - v), 1e-9 * norm(v));
        const auto s = to_spherical(v);
        EXPECT_GT(s.azimuth, -std::numbers::pi);
        EXPECT_LE(s.azimuth, std::numbers::pi);
        EXPECT_LE(std::abs(s.elevation), std::numbers::pi / 2);
    }
}

TEST(GazeFrame, IdentityHeadPitchesDownTenDegrees) {
    const Pose head{{0.1, 0.2, 1.5}, Quat::identity()};
    const Pose gaze = gaze_frame(head);
    const Vec3 f = gaze.forward();
    const double pitch_down = std::atan2(-f.z, std::hypot(f.x, f.y));
    EXPECT_NEAR(pitch_down, 0.174533, 1e-6);
    EXPECT_NEAR(pitch_down, deg2rad(10.0), 1e-12);
    EXPECT_NEAR(f.y, 0.0, 1e-15);
}

TEST(GazeFrame, NotIdempotent) {
    const Pose head{{0, 0, 0}, Quat::identity()};
    const Vec3 f = gaze_frame(gaze_frame(head)).forward();
    EXPECT_NEAR(std::atan2(-f.z, f.x), deg2rad(20.0), 1e-12);
}

TEST(GazeFrame, SharesPosition) {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Quat q = Quat{standard_normal(rng), standard_normal(rng), standard_normal(rng), standard_normal(rng)}.normalized();
        const Pose head{{standard_normal(rng), standard_normal(rng), standard_normal(rng)}, q};
        const Pose g = gaze_frame(head);
        EXPECT_EQ(g.position, head.position);
        EXPECT_NEAR(g.orientation.norm(), 1.0, 1e-12);
    }
}

TEST(Resample, UniformStreamIsUnchanged) {
    const auto s = sampled(0.0, 2.0, 0.01, [](double t) { return std::sin(t); });
    const auto r = resample_uniform(s, 0.01);
    ASSERT_EQ(r.size(), s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        EXPECT_EQ(r[i].t, s[i].t);
        EXPECT_EQ(r[i].value, s[i].value);
    }
}

TEST(Resample, LinearMidpoint) {
    const Stream<double> s{{0.0, 0.0}, {1.0, 10.0}};
    const auto r = resample_uniform(s, 0.5);
    ASSERT_EQ(r.size(), 3u);
    EXPECT_DOUBLE_EQ(r[1].t, 0.5);
    EXPECT_DOUBLE_EQ(r[1].value, 5.0);
    EXPECT_DOUBLE_EQ(r.front().t, 0.0);
    EXPECT_DOUBLE_EQ(r.back().t, 1.0);
}

TEST(Resample, ConstantStream) {
    const Stream<double> s{{0.0, 3.0}, {0.37, 3.0}, {1.1, 3.0}, {2.05, 3.0}};
    for (const auto& x : resample_uniform(s, 0.01)) {
        EXPECT_EQ(x.value, 3.0);
    }
}

TEST(Resample, ErrorsOnShortStreamsAndBadDt) {
    EXPECT_THROW(resample_uniform(Stream<double>{}, 0.01), InvalidInput);
    EXPECT_THROW(resample_uniform(Stream<double>{{0.0, 1.0}}, 0.01), InvalidInput);
    EXPECT_THROW(resample_uniform(Stream<double>{{0.0, 1.0}, {1.0, 2.0}}, 0.0), InvalidInput);
    EXPECT_THROW(resample_uniform(Stream<double>{{0.0, 1.0}, {0.0, 2.0}}, 0.1), InvalidInput);
}

TEST(Resample, NoOvershootOnIrregularMonotoneStreams) {
    Rng rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        Stream<double> s;
        double t = 0.0;
        double v = 0.0;
        for (int i = 0; i < 40; ++i) {
            s.push_back({t, v});
            t += 0.001 + 0.05 * uniform01(rng);
            v += uniform01(rng);
        }
        const auto r = resample_uniform(s, 0.01);
        EXPECT_EQ(r.front().t, s.front().t);
        EXPECT_EQ(r.back().t, s.back().t);
        for (std::size_t i = 1; i < r.size(); ++i) {
            EXPECT_GE(r[i].value, r[i - 1].value);
        }
        EXPECT_GE(r.front().value, s.front().value);
        EXPECT_LE(r.back().value, s.back().value);
    }
}

TEST(Resample, PoseOrientationStaysUnit) {
    const Stream<Pose> s{{0.0, {{0, 0, 0}, Quat::identity()}},
                         {1.0, {{1, 0, 0}, Quat::from_axis_angle({0, 0, 1}, 1.0)}}};
    for (const auto& p : resample_uniform(s, 0.1)) {
        EXPECT_TRUE(p.value.is_valid());
    }
    const auto mid = sample_at(s, 0.5);
    EXPECT_NEAR(mid.position.x, 0.5, 1e-12);
    const Vec3 f = mid.orientation.rotate({1, 0, 0});
    EXPECT_NEAR(std::atan2(f.y, f.x), 0.5, 1e-12);
}

TEST(FiniteDiff, LinearRampOrderOne) {
    const auto s = sampled(0.0, 1.0, 0.01, [](double t) { return 2.0 * t + 1.0; });
    for (const auto& d : finite_diff(s, 1)) {
        EXPECT_NEAR(d.value, 2.0, 1e-9);
    }
}

TEST(FiniteDiff, QuadraticOrderTwo) {
    const auto s = sampled(0.0, 1.0, 0.01, [](double t) { return t * t; });
    const auto d = finite_diff(s, 2);
    for (std::size_t i = 1; i + 1 < d.size(); ++i) {
        EXPECT_NEAR(d[i].value, 2.0, 1e-9);
    }
}

TEST(FiniteDiff, CubicOrderThreeAgainstAnalytic) {
    // Oracle: the analytic third derivative of t^3 is 6 everywhere. Grid offset is seeded.
    Rng rng(31);
    for (int trial = 0; trial < 5; ++trial) {
        const double t0 = uniform01(rng);
        const auto s = sampled(t0, t0 + 1.0, 0.01, [](double t) { return t * t * t; });
        const auto d = finite_diff(s, 3);
        for (std::size_t i = 2; i + 2 < d.size(); ++i) {
            EXPECT_NEAR(d[i].value, 6.0, 1e-6);
        }
    }
}

TEST(FiniteDiff, PolynomialExactnessProperty) {
    // Degree-k polynomial, k-th derivative: constant k! * lead at interior points.
    Rng rng(5);
    for (int k = 1; k <= 3; ++k) {
        for (int trial = 0; trial < 10; ++trial) {
            std::array<double, 4> c{};
            for (auto& x : c) {
                x = standard_normal(rng);
            }
            auto p = [&](double t) {
                double v = 0.0;
                for (int e = k; e >= 0; --e) {
                    v = v * t + c[static_cast<std::size_t>(e)];
                }
                return v;
            };
            const double expected = c[static_cast<std::size_t>(k)] * std::tgamma(k + 1.0);
            const auto d = finite_diff(sampled(0.0, 1.0, 0.01, p), k);
            const std::size_t half = k == 3 ? 2 : 1;
            for (std::size_t i = half; i + half < d.size(); ++i) {
                EXPECT_NEAR(d[i].value, expected, 1e-6);
            }
        }
    }
}

TEST(FiniteDiff, BoundaryStencilsAreExactForLowDegree) {
    const auto s = sampled(0.0, 0.05, 0.01, [](double t) { return t * t; });
    const auto d1 = finite_diff(s, 1);
    EXPECT_NEAR(d1.front().value, 0.0, 1e-9);
    EXPECT_NEAR(d1.back().value, 0.1, 1e-9);
}

TEST(FiniteDiff, RejectsNonUniformAndShortStreams) {
    const Stream<double> irregular{{0.0, 0.0}, {0.1, 1.0}, {0.3, 2.0}, {0.4, 3.0}, {0.5, 4.0}};
    EXPECT_THROW(finite_diff(irregular, 1), InvalidInput);
    const auto s = sampled(0.0, 0.03, 0.01, [](double t) { return t; });
    EXPECT_THROW(finite_diff(s, 3), InvalidInput);
    EXPECT_THROW(finite_diff(s, 4), InvalidInput);
}

TEST(FdWeights, MatchKnownStencils) {
    const std::array<double, 5> off{0, 1, 2, 3, 4};
    const auto w = fd_weights(off, 3);
    const std::array<double, 5> expect{-2.5, 9.0, -12.0, 7.0, -1.5};
    for (std::size_t i = 0; i < 5; ++i) {
        EXPECT_NEAR(w[i], expect[i], 1e-12);
    }
}

TEST(MovingAverage, ShrinksAtEnds) {
    const std::vector<double> v{1, 2, 3, 4, 5, 6};
    const auto m = moving_average(v, 5);
    EXPECT_DOUBLE_EQ(m[0], 2.0);
    EXPECT_DOUBLE_EQ(m[2], 3.0);
    EXPECT_DOUBLE_EQ(m[5], 5.0);
}

TEST(Recording, JsonlRoundTrip) {
    CycleRecording rec;
    rec.cycle_id = "c1";
    rec.operator_id = "op0";
    rec.t_human = 0.7;
    rec.t_robot = 0.5;
    for (double t : uniform_grid(0.0, 1.0, 0.1)) {
        rec.head.push_back({t, {{t, 0.1, 0.6}, Quat::from_axis_angle({0, 0, 1}, t)}});
        rec.hand.push_back({t, {0.4, -0.4 + t / 3.0, 0.05}});
        rec.ee.push_back({t, {0.4 + 0.1 / 3.0, 0.62 - t, 0.05 + 1.0 / 7.0}});
    }
    std::stringstream ss;
    write_recording_jsonl(ss, rec);
    const auto back = read_recording_jsonl(ss);
    EXPECT_EQ(back, rec);
    EXPECT_NO_THROW(validate(back));
}

TEST(Recording, ValidationCatchesOutOfRangeTimes) {
    CycleRecording rec;
    for (double t : {0.0, 1.0}) {
        rec.head.push_back({t, {}});
        rec.hand.push_back({t, {}});
        rec.ee.push_back({t, {}});
    }
    rec.t_human = 2.0;
    EXPECT_THROW(validate(rec), InvalidInput);
    rec.t_human = 0.5;
    rec.head[1].value.orientation = {2, 0, 0, 0};
    EXPECT_THROW(validate(rec), InvalidInput);
}

TEST(Rng, DerivedSeedsDiffer) {
    EXPECT_NE(derive_seed(1, "a"), derive_seed(1, "b"));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
    EXPECT_EQ(derive_seed(9, "sim"), derive_seed(9, "sim"));
}

TEST(Hash, KnownDigest) {
    EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
