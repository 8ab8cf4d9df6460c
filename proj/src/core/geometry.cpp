#include "hrtrust/core/geometry.hpp"

#include "hrtrust/core/error.hpp"

namespace hrtrust {

Quat Quat::from_axis_angle(const Vec3& axis, double angle) {
    const double n = hrtrust::norm(axis);
    if (n == 0.0) {
        throw DegenerateInput("rotation axis must be non-zero");
    }
    const double s = std::sin(angle / 2.0) / n;
    return {std::cos(angle / 2.0), axis.x * s, axis.y * s, axis.z * s};
}

Quat Quat::normalized() const {
    const double n = norm();
    if (n == 0.0) {
        throw DegenerateInput("cannot normalize a zero quaternion");
    }
    return {w / n, x / n, y / n, z / n};
}

Quat operator*(const Quat& a, const Quat& b) {
    return {
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    };
}

Vec3 Quat::rotate(const Vec3& v) const {
    // v' = v + 2w (u x v) + 2 u x (u x v), u = (x, y, z)
    const Vec3 u{x, y, z};
    const Vec3 t = 2.0 * cross(u, v);
    return v + w * t + cross(u, t);
}

Quat slerp(const Quat& a, const Quat& b_in, double s) {
    Quat b = b_in;
    double c = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
    if (c < 0.0) {
        b = {-b.w, -b.x, -b.y, -b.z};
        c = -c;
    }
    double ka = 1.0 - s;
    double kb = s;
    if (c < 1.0 - 1e-12) {
        const double theta = std::acos(c);
        const double sn = std::sin(theta);
        ka = std::sin((1.0 - s) * theta) / sn;
        kb = std::sin(s * theta) / sn;
    }
    const Quat q{ka * a.w + kb * b.w, ka * a.x + kb * b.x, ka * a.y + kb * b.y, ka * a.z + kb * b.z};
    return q.normalized();
}

SphericalCoord to_spherical(const Vec3& rel) {
    const double d = norm(rel);
    if (!(d > 0.0) || !rel.is_finite()) {
        throw DegenerateInput("to_spherical: relative position must be finite and non-zero");
    }
    double azimuth = std::atan2(rel.y, rel.x);
    if (azimuth <= -std::numbers::pi) {
        azimuth = std::numbers::pi;
    }
    const double elevation = std::atan2(rel.z, std::hypot(rel.x, rel.y));
    return {azimuth, elevation, d};
}

Vec3 from_spherical(const SphericalCoord& s) {
    const double ce = std::cos(s.elevation);
    return {s.radius * ce * std::cos(s.azimuth), s.radius * ce * std::sin(s.azimuth),
            s.radius * std::sin(s.elevation)};
}

Pose gaze_frame(const Pose& head) {
    // A positive rotation about +y turns +x towards -z, i.e. pitches the view down.
    static const Quat tilt = Quat::from_axis_angle({0.0, 1.0, 0.0}, kGazeTilt);
    return {head.position, (head.orientation * tilt).normalized()};
}

}  // namespace hrtrust
