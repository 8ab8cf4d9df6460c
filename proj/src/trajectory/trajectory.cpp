#include "hrtrust/trajectory/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "hrtrust/core/error.hpp"

namespace hrtrust {

namespace {

constexpr const char* kParamNames[3] = {"tau", "d", "h"};

double quintic(double u) { return u * u * u * (10.0 + u * (-15.0 + 6.0 * u)); }

}  // namespace

void ParamBox::validate() const {
    const auto lo = lower.as_array();
    const auto hi = upper.as_array();
    for (std::size_t i = 0; i < 3; ++i) {
        if (!std::isfinite(lo[i]) || !std::isfinite(hi[i]) || !(hi[i] > lo[i])) {
            throw InvalidInput(std::string("parameter box: '") + kParamNames[i] +
                               "' needs finite bounds with min < max");
        }
        if (lo[i] <= 0.0) {
            throw InvalidInput(std::string("parameter box: '") + kParamNames[i] + "' must be positive");
        }
    }
}

bool ParamBox::contains(const InteractionParams& x, double tol) const {
    const auto v = x.as_array();
    const auto lo = lower.as_array();
    const auto hi = upper.as_array();
    for (std::size_t i = 0; i < 3; ++i) {
        const double slack = tol * (hi[i] - lo[i]);
        if (!(v[i] >= lo[i] - slack && v[i] <= hi[i] + slack)) {
            return false;
        }
    }
    return true;
}

double ParamBox::range(std::size_t dim) const { return upper.as_array().at(dim) - lower.as_array().at(dim); }

std::array<double, 3> ParamBox::to_unit(const InteractionParams& x) const {
    const auto v = x.as_array();
    const auto lo = lower.as_array();
    std::array<double, 3> u{};
    for (std::size_t i = 0; i < 3; ++i) {
        u[i] = (v[i] - lo[i]) / range(i);
    }
    return u;
}

InteractionParams ParamBox::from_unit(const std::array<double, 3>& u) const {
    const auto lo = lower.as_array();
    std::array<double, 3> v{};
    for (std::size_t i = 0; i < 3; ++i) {
        v[i] = lo[i] + u[i] * range(i);
    }
    return InteractionParams::from_array(v);
}

void WorkspaceLayout::validate() const {
    if (!a.is_finite() || !b.is_finite() || !c.is_finite() || !human_center.is_finite()) {
        throw InvalidInput("layout: positions must be finite");
    }
    if (norm(a - b) < 1e-9) {
        throw InvalidInput("layout: pick (A) and pour (B) locations must differ");
    }
    if (horizontal_distance(human_center, a) < 1e-9 || horizontal_distance(human_center, b) < 1e-9) {
        throw InvalidInput("layout: human_center must differ from A and B");
    }
}

double Trajectory::dt() const {
    double h = 0.0;
    if (!is_uniform(samples, &h)) {
        throw InvalidInput("trajectory is not uniformly sampled");
    }
    return h;
}

Trajectory min_jerk_base(const Vec3& a, const Vec3& b, double tau, double dt) {
    if (!(tau > 0.0)) {
        throw InvalidInput("min_jerk_base: tau must be positive");
    }
    if (!(dt > 0.0) || dt >= tau) {
        throw InvalidInput("min_jerk_base: need 0 < dt < tau");
    }
    Trajectory traj;
    for (double t : uniform_grid(0.0, tau, dt)) {
        traj.samples.push_back({t, a + (b - a) * quintic(t / tau)});
    }
    traj.samples.back().value = b;
    return traj;
}

Trajectory adapt(const Trajectory& base, const InteractionParams& x, const WorkspaceLayout& layout) {
    if (base.samples.size() < 2) {
        throw InvalidInput("adapt: base trajectory needs at least two samples");
    }
    if (!(x.tau > 0.0) || !(x.d >= 0.0) || !std::isfinite(x.h)) {
        throw InvalidInput("adapt: interaction parameters out of range");
    }
    const double dt = base.dt();
    const double base_duration = base.duration();
    const Vec3 start = base.samples.front().value;
    const Vec3 end = base.samples.back().value;
    const Vec3& center = layout.human_center;

    if (horizontal_distance(start, center) < x.d - 1e-12 || horizontal_distance(end, center) < x.d - 1e-12) {
        throw InfeasibleLayout("adapt: trajectory end point lies inside the protected zone of radius " +
                               std::to_string(x.d));
    }
    if (x.h < std::max(start.z, end.z) - 1e-12) {
        throw InfeasibleLayout("adapt: maximum height below the trajectory end points");
    }

    // (i) time re-parameterisation onto [0, tau] at the base sampling period.
    const std::vector<double> grid = uniform_grid(0.0, x.tau, dt);
    const bool same_timing = std::abs(x.tau - base_duration) <= 1e-12 && grid.size() == base.samples.size();
    Trajectory out;
    out.samples.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const Vec3 p = same_timing ? base.samples[k].value : sample_at(base.samples, grid[k] * base_duration / x.tau);
        out.samples.push_back({grid[k], p});
    }
    out.samples.front().value = start;
    out.samples.back().value = end;

    // (ii) radial projection of the horizontal component onto the protected circle.
    for (auto& s : out.samples) {
        const double r = horizontal_distance(s.value, center);
        if (r >= x.d) {
            continue;
        }
        if (r < 1e-12) {
            throw InfeasibleLayout("adapt: trajectory passes through the human centre");
        }
        const double k = x.d / r;
        s.value.x = center.x + (s.value.x - center.x) * k;
        s.value.y = center.y + (s.value.y - center.y) * k;
    }

    // (iii) vertical shaping: z = line(u) + c * bump(u), with max z = h.
    const std::size_t n = out.samples.size();
    std::vector<double> line(n);
    std::vector<double> bump(n);
    double bump_max = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        const double u = out.samples[k].t / x.tau;
        line[k] = start.z + (end.z - start.z) * u;
        bump[k] = out.samples[k].value.z - line[k];
        bump_max = std::max(bump_max, bump[k]);
    }
    if (bump_max <= 1e-9) {
        for (std::size_t k = 0; k < n; ++k) {
            const double s = std::sin(std::numbers::pi * out.samples[k].t / x.tau);
            bump[k] = s * s;
        }
    }
    auto peak = [&](double c) {
        double m = -std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            m = std::max(m, line[k] + c * bump[k]);
        }
        return m;
    };
    // peak(c) is convex with peak(0) <= h, so it crosses h exactly once for c >= 0.
    double lo = 0.0;
    double hi = 1.0;
    while (peak(hi) < x.h) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw InfeasibleLayout("adapt: cannot reach the requested maximum height");
        }
    }
    if (peak(0.0) >= x.h) {
        hi = 0.0;
    } else {
        for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
            const double mid = 0.5 * (lo + hi);
            (peak(mid) < x.h ? lo : hi) = mid;
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        out.samples[k].value.z = line[k] + hi * bump[k];
    }
    out.samples.front().value.z = start.z;
    out.samples.back().value.z = end.z;
    return out;
}

Trajectory planned_trajectory(const InteractionParams& x, const WorkspaceLayout& layout, double dt) {
    layout.validate();
    return adapt(min_jerk_base(layout.a, layout.b, x.tau, dt), x, layout);
}

double squared_jerk_integral(const Trajectory& traj) {
    if (traj.samples.size() < 5) {
        throw InvalidInput("squared_jerk_integral: trajectory too short for a third derivative");
    }
    const auto jerk = finite_diff(traj.samples, 3);
    double total = 0.0;
    for (std::size_t i = 1; i < jerk.size(); ++i) {
        const double f0 = dot(jerk[i - 1].value, jerk[i - 1].value);
        const double f1 = dot(jerk[i].value, jerk[i].value);
        total += 0.5 * (f0 + f1) * (jerk[i].t - jerk[i - 1].t);
    }
    return total;
}

Stream<double> curvature_radius(const Trajectory& traj, const CurvatureConfig& cfg) {
    const auto vel = finite_diff(traj.samples, 1);
    const auto acc = finite_diff(traj.samples, 2);
    Stream<double> out(vel.size());
    for (std::size_t i = 0; i < vel.size(); ++i) {
        const double speed = norm(vel[i].value);
        const double c = norm(cross(vel[i].value, acc[i].value));
        double r = cfg.r_max;
        if (speed > cfg.eps_velocity && c > cfg.eps_cross) {
            r = speed * speed * speed / c;
        }
        out[i] = {vel[i].t, r};
    }
    return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
    out << "t,x,y,z\n" << std::setprecision(17);
    for (const auto& s : traj.samples) {
        out << s.t << ',' << s.value.x << ',' << s.value.y << ',' << s.value.z << '\n';
    }
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ostringstream ss;
    write_trajectory_csv(ss, traj);
    write_text_file(path, ss.str());
}

Trajectory read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("t,x,y,z", 0) != 0) {
        throw InvalidInput("trajectory CSV must start with the header 't,x,y,z'");
    }
    Trajectory traj;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::istringstream row(line);
        std::array<double, 4> v{};
        char sep = 0;
        row >> v[0] >> sep >> v[1] >> sep >> v[2] >> sep >> v[3];
        if (!row) {
            throw InvalidInput("malformed trajectory CSV row: " + line);
        }
        traj.samples.push_back({v[0], {v[1], v[2], v[3]}});
    }
    check_increasing(traj.samples);
    return traj;
}

Trajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::istringstream ss(read_text_file(path));
    return read_trajectory_csv(ss);
}

void to_json(json& j, const InteractionParams& x) { j = json{{"tau", x.tau}, {"d", x.d}, {"h", x.h}}; }

void from_json(const json& j, InteractionParams& x) {
    x.tau = j.at("tau").get<double>();
    x.d = j.at("d").get<double>();
    x.h = j.at("h").get<double>();
}

void to_json(json& j, const ParamBox& box) { j = json{{"min", box.lower}, {"max", box.upper}}; }

void from_json(const json& j, ParamBox& box) {
    box.lower = j.at("min").get<InteractionParams>();
    box.upper = j.at("max").get<InteractionParams>();
}

void to_json(json& j, const WorkspaceLayout& l) {
    j = json{{"A", l.a}, {"B", l.b}, {"C", l.c}, {"human_center", l.human_center}};
}

void from_json(const json& j, WorkspaceLayout& l) {
    l.a = j.at("A").get<Vec3>();
    l.b = j.at("B").get<Vec3>();
    l.c = j.at("C").get<Vec3>();
    l.human_center = j.at("human_center").get<Vec3>();
}

void to_json(json& j, const Trajectory& traj) {
    json samples = json::array();
    for (const auto& s : traj.samples) {
        samples.push_back(json::array({s.t, s.value.x, s.value.y, s.value.z}));
    }
    j = json{{"duration", traj.duration()}, {"samples", std::move(samples)}};
}

void from_json(const json& j, Trajectory& traj) {
    traj.samples.clear();
    for (const auto& row : j.at("samples")) {
        traj.samples.push_back({row.at(0).get<double>(), {row.at(1).get<double>(), row.at(2).get<double>(), row.at(3).get<double>()}});
    }
    check_increasing(traj.samples);
}

}  // namespace hrtrust
