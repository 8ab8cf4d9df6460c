#include "hrtrust/core/stream.hpp"

namespace hrtrust {

std::vector<double> uniform_grid(double t0, double t1, double dt) {
    if (!(dt > 0.0) || !(t1 > t0)) {
        throw InvalidInput("uniform_grid: need dt > 0 and t1 > t0");
    }
    const auto n = std::max<long long>(1, std::llround((t1 - t0) / dt));
    const double step = (t1 - t0) / static_cast<double>(n);
    std::vector<double> grid(static_cast<std::size_t>(n) + 1);
    for (long long k = 0; k < n; ++k) {
        grid[static_cast<std::size_t>(k)] = t0 + static_cast<double>(k) * step;
    }
    grid.back() = t1;
    return grid;
}

std::vector<double> fd_weights(std::span<const double> offsets, int order) {
    // Fornberg (1988), evaluated at x0 = 0.
    const std::size_t n = offsets.size();
    const auto m = static_cast<std::size_t>(order);
    std::vector<std::vector<double>> c(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = offsets[0];
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const std::size_t mn = std::min(i, m);
        double c2 = 1.0;
        const double c5 = c4;
        c4 = offsets[i];
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if (j == i - 1) {
                for (std::size_t k = mn; k >= 1; --k) {
                    c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (std::size_t k = mn; k >= 1; --k) {
                c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = c[i][m];
    }
    return w;
}

namespace detail {

FdWindow fd_window(std::size_t i, std::size_t n, int order) {
    const std::size_t half = order == 3 ? 2 : 1;
    if (i >= half && i + half < n) {
        return {i - half, 2 * half + 1};
    }
    const auto width = static_cast<std::size_t>(order + 2);
    std::size_t start = i >= half ? i - half : 0;
    start = std::min(start, n - width);
    return {start, width};
}

}  // namespace detail

std::vector<double> moving_average(std::span<const double> v, std::size_t window) {
    if (window == 0) {
        throw InvalidInput("moving_average: window must be positive");
    }
    const std::size_t half = window / 2;
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(v.size() - 1, i + half);
        double acc = 0.0;
        for (std::size_t k = lo; k <= hi; ++k) {
            acc += v[k];
        }
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

}  // namespace hrtrust
