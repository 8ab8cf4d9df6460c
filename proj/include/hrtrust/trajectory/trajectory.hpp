#pragma once

#include <array>
#include <filesystem>
#include <iosfwd>

#include "hrtrust/core/geometry.hpp"
#include "hrtrust/core/json.hpp"
#include "hrtrust/core/stream.hpp"

namespace hrtrust {

/// Decision vector shaping a robot trajectory.
struct InteractionParams {
    double tau = 7.5;  ///< total execution time, s
    double d = 0.585;  ///< separation distance, m
    double h = 0.33;   ///< maximum end-effector height, m

    [[nodiscard]] std::array<double, 3> as_array() const { return {tau, d, h}; }
    static InteractionParams from_array(const std::array<double, 3>& a) { return {a[0], a[1], a[2]}; }

    friend bool operator==(const InteractionParams&, const InteractionParams&) = default;
};

/// Admissible box for InteractionParams.
struct ParamBox {
    InteractionParams lower{5.0, 0.52, 0.26};
    InteractionParams upper{10.0, 0.65, 0.40};

    /// Throws InvalidInput naming the first offending field.
    void validate() const;
    [[nodiscard]] bool contains(const InteractionParams& x, double tol = 1e-12) const;
    [[nodiscard]] double range(std::size_t dim) const;
    /// Affine map onto [0, 1]^3.
    [[nodiscard]] std::array<double, 3> to_unit(const InteractionParams& x) const;
    [[nodiscard]] InteractionParams from_unit(const std::array<double, 3>& u) const;

    friend bool operator==(const ParamBox&, const ParamBox&) = default;
};

/// Task geometry. z = 0 is the table surface; human_center is the operator's
/// position projected onto the horizontal plane.
struct WorkspaceLayout {
    Vec3 a{0.40, 0.62, 0.05};   ///< robot pick location
    Vec3 b{0.66, -0.20, 0.05};  ///< pouring location
    Vec3 c{0.42, -0.42, 0.05};  ///< operator beaker location
    Vec3 human_center{0.0, 0.0, 0.0};

    void validate() const;
    friend bool operator==(const WorkspaceLayout&, const WorkspaceLayout&) = default;
};

/// End-effector positions on a uniform time grid starting at t = 0.
struct Trajectory {
    Stream<Vec3> samples;

    [[nodiscard]] double duration() const { return samples.empty() ? 0.0 : samples.back().t; }
    [[nodiscard]] double dt() const;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

/// Rest-to-rest quintic (minimum-jerk) profile from a to b over tau seconds.
Trajectory min_jerk_base(const Vec3& a, const Vec3& b, double tau, double dt = kDefaultDt);

/// Re-times the path to x.tau, pushes samples inside the protected cylinder of radius
/// x.d (around layout.human_center) radially onto its boundary, and rescales the
/// vertical profile so the maximum height is x.h.
///
/// The vertical profile is split into the straight line between the end heights and a
/// residual bump; the bump is scaled so the peak equals h. A path with no bump above
/// that line gets a raised-sine bump peaking mid-path. End points are never moved.
Trajectory adapt(const Trajectory& base, const InteractionParams& x, const WorkspaceLayout& layout);

/// Base path A -> B adapted to x; the trajectory the robot executes for x.
Trajectory planned_trajectory(const InteractionParams& x, const WorkspaceLayout& layout,
                              double dt = kDefaultDt);

/// Trapezoidal integral of the squared jerk magnitude, m^2/s^5.
double squared_jerk_integral(const Trajectory& traj);

struct CurvatureConfig {
    double eps_velocity = 1e-4;  ///< m/s
    double eps_cross = 1e-9;
    double r_max = 2.0;  ///< m

    friend bool operator==(const CurvatureConfig&, const CurvatureConfig&) = default;
};

/// Radius of curvature |v|^3 / |v x a| per sample; degenerate samples report r_max.
Stream<double> curvature_radius(const Trajectory& traj, const CurvatureConfig& cfg = {});

void write_trajectory_csv(std::ostream& out, const Trajectory& traj);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
Trajectory read_trajectory_csv(std::istream& in);
Trajectory read_trajectory_csv(const std::filesystem::path& path);

void to_json(json& j, const InteractionParams& x);
void from_json(const json& j, InteractionParams& x);
void to_json(json& j, const ParamBox& box);
void from_json(const json& j, ParamBox& box);
void to_json(json& j, const WorkspaceLayout& layout);
void from_json(const json& j, WorkspaceLayout& layout);
void to_json(json& j, const Trajectory& traj);
void from_json(const json& j, Trajectory& traj);

}  // namespace hrtrust
