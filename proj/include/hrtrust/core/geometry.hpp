#pragma once

#include <array>
#include <cmath>
#include <numbers>

namespace hrtrust {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3& operator+=(const Vec3& o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    constexpr Vec3& operator-=(const Vec3& o) {
        x -= o.x;
        y -= o.y;
        z -= o.z;
        return *this;
    }
    constexpr Vec3& operator*=(double s) {
        x *= s;
        y *= s;
        z *= s;
        return *this;
    }

    friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
    friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
    friend constexpr Vec3 operator-(const Vec3& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr Vec3 operator*(Vec3 a, double s) { return a *= s; }
    friend constexpr Vec3 operator*(double s, Vec3 a) { return a *= s; }
    friend constexpr Vec3 operator/(const Vec3& a, double s) { return {a.x / s, a.y / s, a.z / s}; }
    friend constexpr bool operator==(const Vec3&, const Vec3&) = default;

    [[nodiscard]] bool is_finite() const {
        return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
    }
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

constexpr Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

/// Horizontal (x–y) distance between two points, ignoring z.
inline double horizontal_distance(const Vec3& a, const Vec3& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

/// Unit quaternion (w, x, y, z) with Hamilton product convention.
struct Quat {
    double w = 1.0;
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    static Quat from_axis_angle(const Vec3& axis, double angle);
    static Quat identity() { return {}; }

    [[nodiscard]] double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }
    [[nodiscard]] Quat normalized() const;
    [[nodiscard]] Quat conjugate() const { return {w, -x, -y, -z}; }
    [[nodiscard]] Vec3 rotate(const Vec3& v) const;

    friend Quat operator*(const Quat& a, const Quat& b);
    friend constexpr bool operator==(const Quat&, const Quat&) = default;
};

Quat slerp(const Quat& a, const Quat& b, double s);

/// Frame pose relative to the world frame. Local axes: x forward, y left, z up.
struct Pose {
    Vec3 position;
    Quat orientation;

    [[nodiscard]] bool is_valid() const {
        return position.is_finite() && std::abs(orientation.norm() - 1.0) <= 1e-9;
    }
    /// Express a world-frame point in this frame.
    [[nodiscard]] Vec3 to_local(const Vec3& world_point) const {
        return orientation.conjugate().rotate(world_point - position);
    }
    [[nodiscard]] Vec3 forward() const { return orientation.rotate({1.0, 0.0, 0.0}); }

    friend constexpr bool operator==(const Pose&, const Pose&) = default;
};

struct SphericalCoord {
    double azimuth = 0.0;    ///< (-pi, pi]
    double elevation = 0.0;  ///< [-pi/2, pi/2]
    double radius = 0.0;
};

/// Azimuth in the x–y plane from +x, elevation from that plane towards +z.
/// Throws DegenerateInput for the zero vector.
SphericalCoord to_spherical(const Vec3& rel);
Vec3 from_spherical(const SphericalCoord& s);

/// Pitch of the approximate gaze direction below the head's forward axis.
inline constexpr double kGazeTilt = 10.0 * std::numbers::pi / 180.0;

/// Head pose composed with a fixed downward pitch about the head's lateral (y) axis.
Pose gaze_frame(const Pose& head);

inline constexpr double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline constexpr double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

}  // namespace hrtrust
