#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/geometry.hpp"

namespace hrtrust {

/// Default internal sampling period (100 Hz).
inline constexpr double kDefaultDt = 0.01;

template <class T>
struct TimedSample {
    double t = 0.0;  ///< seconds since cycle start
    T value{};

    friend bool operator==(const TimedSample&, const TimedSample&) = default;
};

/// Samples ordered by strictly increasing time.
template <class T>
using Stream = std::vector<TimedSample<T>>;

inline double lerp_value(double a, double b, double s) { return a + (b - a) * s; }
inline Vec3 lerp_value(const Vec3& a, const Vec3& b, double s) { return a + (b - a) * s; }
inline Pose lerp_value(const Pose& a, const Pose& b, double s) {
    return {lerp_value(a.position, b.position, s), slerp(a.orientation, b.orientation, s)};
}

template <class T>
void check_increasing(const Stream<T>& s) {
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!std::isfinite(s[i].t) || s[i].t < 0.0) {
            throw InvalidInput("stream timestamps must be finite and non-negative");
        }
        if (i > 0 && !(s[i].t > s[i - 1].t)) {
            throw InvalidInput("stream timestamps must be strictly increasing");
        }
    }
}

/// Linear interpolation at time t, clamped to the stream's end values.
template <class T>
T sample_at(const Stream<T>& s, double t) {
    if (s.empty()) {
        throw InvalidInput("sample_at: empty stream");
    }
    if (t <= s.front().t) {
        return s.front().value;
    }
    if (t >= s.back().t) {
        return s.back().value;
    }
    const auto hi = std::upper_bound(s.begin(), s.end(), t,
                                     [](double v, const TimedSample<T>& x) { return v < x.t; });
    const auto lo = hi - 1;
    if (lo->t == t) {
        return lo->value;
    }
    return lerp_value(lo->value, hi->value, (t - lo->t) / (hi->t - lo->t));
}

/// Grid of n+1 equally spaced times covering [t0, t1], where n = round((t1-t0)/dt).
/// Both end points are reproduced exactly; the realised step is (t1-t0)/n.
std::vector<double> uniform_grid(double t0, double t1, double dt);

/// Linear resampling onto a uniform grid that keeps the first and last timestamps.
template <class T>
Stream<T> resample_uniform(const Stream<T>& s, double dt) {
    if (s.size() < 2) {
        throw InvalidInput("resample_uniform: need at least two samples");
    }
    if (!(dt > 0.0)) {
        throw InvalidInput("resample_uniform: dt must be positive");
    }
    check_increasing(s);
    const std::vector<double> grid = uniform_grid(s.front().t, s.back().t, dt);
    Stream<T> out;
    out.reserve(grid.size());
    std::size_t j = 0;
    for (double t : grid) {
        while (j + 2 < s.size() && s[j + 1].t <= t) {
            ++j;
        }
        const auto& a = s[j];
        const auto& b = s[j + 1];
        if (t <= a.t) {
            out.push_back({t, a.value});
        } else if (t >= b.t) {
            out.push_back({t, b.value});
        } else {
            out.push_back({t, lerp_value(a.value, b.value, (t - a.t) / (b.t - a.t))});
        }
    }
    return out;
}

/// Returns the realised step if the stream is uniformly sampled (relative tolerance 1e-6).
template <class T>
bool is_uniform(const Stream<T>& s, double* step = nullptr) {
    if (s.size() < 2) {
        return false;
    }
    const double h = (s.back().t - s.front().t) / static_cast<double>(s.size() - 1);
    for (std::size_t i = 1; i < s.size(); ++i) {
        if (std::abs((s[i].t - s[i - 1].t) - h) > 1e-6 * h) {
            return false;
        }
    }
    if (step != nullptr) {
        *step = h;
    }
    return true;
}

/// Finite-difference weights (Fornberg) for the derivative of the given order at 0,
/// using samples at the given offsets (unit spacing).
std::vector<double> fd_weights(std::span<const double> offsets, int order);

namespace detail {
/// Window [start, start + width) used to differentiate sample i of an n-sample stream.
struct FdWindow {
    std::size_t start;
    std::size_t width;
};
FdWindow fd_window(std::size_t i, std::size_t n, int order);
}  // namespace detail

/// Derivative of order 1..3 on a uniform stream: central stencils in the interior
/// (3, 3 and 5 points), one-sided stencils of width order+2 near the boundaries.
template <class T>
Stream<T> finite_diff(const Stream<T>& s, int order) {
    if (order < 1 || order > 3) {
        throw InvalidInput("finite_diff: order must be 1, 2 or 3");
    }
    if (s.size() <= static_cast<std::size_t>(order + 1)) {
        throw InvalidInput("finite_diff: stream too short for the requested order");
    }
    double h = 0.0;
    if (!is_uniform(s, &h)) {
        throw InvalidInput("finite_diff: stream is not uniformly sampled");
    }
    const double scale = std::pow(h, order);
    const std::size_t n = s.size();
    Stream<T> out(n);
    std::vector<double> offsets;
    for (std::size_t i = 0; i < n; ++i) {
        const auto win = detail::fd_window(i, n, order);
        offsets.clear();
        for (std::size_t k = 0; k < win.width; ++k) {
            offsets.push_back(static_cast<double>(win.start + k) - static_cast<double>(i));
        }
        const auto w = fd_weights(offsets, order);
        T acc{};
        for (std::size_t k = 0; k < win.width; ++k) {
            acc += s[win.start + k].value * (w[k] / scale);
        }
        out[i] = {s[i].t, acc};
    }
    return out;
}

/// Centered moving average; the window shrinks at the ends.
std::vector<double> moving_average(std::span<const double> v, std::size_t window);

template <class T>
std::vector<T> values_of(const Stream<T>& s) {
    std::vector<T> out;
    out.reserve(s.size());
    for (const auto& x : s) {
        out.push_back(x.value);
    }
    return out;
}

}  // namespace hrtrust
