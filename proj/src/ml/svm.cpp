#include <algorithm>
#include <cmath>
#include <limits>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/rng.hpp"
#include "hrtrust/ml/ml.hpp"

namespace hrtrust {
namespace {

constexpr double kTau = 1e-12;

Matrix subset(const Matrix& X, const std::vector<std::size_t>& idx) {
    Matrix out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(X[i]);
    }
    return out;
}

Labels subset(const Labels& y, const std::vector<std::size_t>& idx) {
    Labels out;
    out.reserve(idx.size());
    for (std::size_t i : idx) {
        out.push_back(y[i]);
    }
    return out;
}

double decision(const SvmSolution& s, const KernelSpec& k, std::span<const double> z) {
    double f = s.bias;
    for (std::size_t i = 0; i < s.support.size(); ++i) {
        f += s.coef[i] * k(s.support[i], z);
    }
    return f;
}

}  // namespace

void SvmParams::validate() const {
    if (!(C > 0.0)) {
        throw InvalidInput("svm: C must be positive");
    }
    if (kernel != "linear" && kernel != "rbf" && kernel != "poly") {
        throw InvalidInput("svm: unknown kernel " + kernel);
    }
    if (gamma != "scale" && gamma != "auto") {
        throw InvalidInput("svm: gamma must be scale or auto, got " + gamma);
    }
    if (degree < 1 || !(tol > 0.0) || max_iter < 1) {
        throw InvalidInput("svm: degree, tol and max_iter must be positive");
    }
}

double KernelSpec::operator()(std::span<const double> a, std::span<const double> b) const {
    if (kind == "rbf") {
        double s = 0.0;
        for (std::size_t j = 0; j < a.size(); ++j) {
            const double d = a[j] - b[j];
            s += d * d;
        }
        return std::exp(-gamma * s);
    }
    double dot = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        dot += a[j] * b[j];
    }
    if (kind == "linear") {
        return dot;
    }
    return std::pow(gamma * dot + coef0, degree);
}

SvmSolution solve_svm(const Matrix& Z, const Labels& y, const KernelSpec& kernel, double C, double tol, long max_iter) {
    check_dataset(Z, y);
    const std::size_t n = Z.size();
    std::vector<double> K(n * n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const double v = kernel(Z[i], Z[j]);
            K[i * n + j] = v;
            K[j * n + i] = v;
        }
    }
    const auto Q = [&](std::size_t i, std::size_t j) { return static_cast<double>(y[i] * y[j]) * K[i * n + j]; };

    std::vector<double> alpha(n, 0.0);
    std::vector<double> G(n, -1.0);
    const auto upper = [&](std::size_t t) { return alpha[t] >= C; };
    const auto lower = [&](std::size_t t) { return alpha[t] <= 0.0; };

    SvmSolution sol;
    sol.converged = false;
    long iter = 0;
    for (; iter < max_iter; ++iter) {
        double gmax = -std::numeric_limits<double>::infinity();
        std::size_t i = n;
        for (std::size_t t = 0; t < n; ++t) {
            if (y[t] == 1) {
                if (!upper(t) && -G[t] >= gmax) {
                    gmax = -G[t];
                    i = t;
                }
            } else if (!lower(t) && G[t] >= gmax) {
                gmax = G[t];
                i = t;
            }
        }
        double gmax2 = -std::numeric_limits<double>::infinity();
        std::size_t j = n;
        double obj_min = std::numeric_limits<double>::infinity();
        for (std::size_t t = 0; t < n && i < n; ++t) {
            if (y[t] == 1) {
                if (!lower(t)) {
                    const double grad_diff = gmax + G[t];
                    gmax2 = std::max(gmax2, G[t]);
                    if (grad_diff > 0.0) {
                        double quad = K[i * n + i] + K[t * n + t] - 2.0 * y[i] * Q(i, t);
                        quad = quad > 0.0 ? quad : kTau;
                        const double obj = -(grad_diff * grad_diff) / quad;
                        if (obj <= obj_min) {
                            obj_min = obj;
                            j = t;
                        }
                    }
                }
            } else if (!upper(t)) {
                const double grad_diff = gmax - G[t];
                gmax2 = std::max(gmax2, -G[t]);
                if (grad_diff > 0.0) {
                    double quad = K[i * n + i] + K[t * n + t] + 2.0 * y[i] * Q(i, t);
                    quad = quad > 0.0 ? quad : kTau;
                    const double obj = -(grad_diff * grad_diff) / quad;
                    if (obj <= obj_min) {
                        obj_min = obj;
                        j = t;
                    }
                }
            }
        }
        if (i == n || j == n || gmax + gmax2 < tol) {
            sol.converged = true;
            break;
        }

        const double ai = alpha[i];
        const double aj = alpha[j];
        if (y[i] != y[j]) {
            double quad = K[i * n + i] + K[j * n + j] + 2.0 * Q(i, j);
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (-G[i] - G[j]) / quad;
            const double diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if (diff > 0.0) {
                if (alpha[j] < 0.0) {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if (diff > 0.0) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = C - diff;
                }
            } else if (alpha[j] > C) {
                alpha[j] = C;
                alpha[i] = C + diff;
            }
        } else {
            double quad = K[i * n + i] + K[j * n + j] - 2.0 * Q(i, j);
            quad = quad > 0.0 ? quad : kTau;
            const double delta = (G[i] - G[j]) / quad;
            const double sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if (sum > C) {
                if (alpha[i] > C) {
                    alpha[i] = C;
                    alpha[j] = sum - C;
                }
            } else if (alpha[j] < 0.0) {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if (sum > C) {
                if (alpha[j] > C) {
                    alpha[j] = C;
                    alpha[i] = sum - C;
                }
            } else if (alpha[i] < 0.0) {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        const double dai = alpha[i] - ai;
        const double daj = alpha[j] - aj;
        for (std::size_t t = 0; t < n; ++t) {
            G[t] += Q(i, t) * dai + Q(j, t) * daj;
        }
    }
    sol.iterations = iter;

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    std::size_t n_free = 0;
    for (std::size_t t = 0; t < n; ++t) {
        const double yg = y[t] * G[t];
        if (upper(t)) {
            if (y[t] == -1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (lower(t)) {
            if (y[t] == 1) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / static_cast<double>(n_free) : 0.5 * (ub + lb);
    sol.bias = -rho;
    for (std::size_t t = 0; t < n; ++t) {
        if (alpha[t] > 0.0) {
            sol.support.push_back(Z[t]);
            sol.coef.push_back(alpha[t] * y[t]);
        }
    }
    return sol;
}

std::pair<double, double> fit_platt(const std::vector<double>& dec, const Labels& y) {
    if (dec.size() != y.size() || dec.empty()) {
        throw InvalidInput("platt: decision values and labels must be non-empty and aligned");
    }
    double prior1 = 0.0;
    double prior0 = 0.0;
    for (int v : y) {
        (v == 1 ? prior1 : prior0) += 1.0;
    }
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);
    const std::size_t n = dec.size();
    std::vector<double> t(n);
    for (std::size_t i = 0; i < n; ++i) {
        t[i] = y[i] == 1 ? hi : lo;
    }
    const auto objective = [&](double A, double B) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fa = dec[i] * A + B;
            f += fa >= 0.0 ? t[i] * fa + std::log1p(std::exp(-fa)) : (t[i] - 1.0) * fa + std::log1p(std::exp(fa));
        }
        return f;
    };
    double A = 0.0;
    double B = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(A, B);
    constexpr double kSigma = 1e-12;
    constexpr double kEps = 1e-5;
    constexpr double kMinStep = 1e-10;
    for (int it = 0; it < 100; ++it) {
        double h11 = kSigma;
        double h22 = kSigma;
        double h21 = 0.0;
        double g1 = 0.0;
        double g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fa = dec[i] * A + B;
            double p = 0.0;
            double q = 0.0;
            if (fa >= 0.0) {
                p = std::exp(-fa) / (1.0 + std::exp(-fa));
                q = 1.0 / (1.0 + std::exp(-fa));
            } else {
                p = 1.0 / (1.0 + std::exp(fa));
                q = std::exp(fa) / (1.0 + std::exp(fa));
            }
            const double d2 = p * q;
            h11 += dec[i] * dec[i] * d2;
            h22 += d2;
            h21 += dec[i] * d2;
            const double d1 = t[i] - p;
            g1 += dec[i] * d1;
            g2 += d1;
        }
        if (std::abs(g1) < kEps && std::abs(g2) < kEps) {
            break;
        }
        const double det = h11 * h22 - h21 * h21;
        const double dA = -(h22 * g1 - h21 * g2) / det;
        const double dB = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * dA + g2 * dB;
        double step = 1.0;
        while (step >= kMinStep) {
            const double nA = A + step * dA;
            const double nB = B + step * dB;
            const double nf = objective(nA, nB);
            if (nf < fval + 1e-4 * step * gd) {
                A = nA;
                B = nB;
                fval = nf;
                break;
            }
            step /= 2.0;
        }
        if (step < kMinStep) {
            break;
        }
    }
    return {A, B};
}

SvmModel::SvmModel(SvmParams params, Standardizer scaler, KernelSpec kernel, SvmSolution solution, double platt_a,
                   double platt_b)
    : params_(std::move(params)),
      scaler_(std::move(scaler)),
      kernel_(std::move(kernel)),
      solution_(std::move(solution)),
      a_(platt_a),
      b_(platt_b) {}

double SvmModel::decision_function(std::span<const double> x) const {
    const auto z = scaler_.apply(x);
    return decision(solution_, kernel_, z);
}

double SvmModel::predict_proba(std::span<const double> x) const {
    const double fa = decision_function(x) * a_ + b_;
    return fa >= 0.0 ? std::exp(-fa) / (1.0 + std::exp(-fa)) : 1.0 / (1.0 + std::exp(fa));
}

json SvmModel::to_json() const {
    return json{{"format_version", 1},
                {"kind", "svm"},
                {"params", params_},
                {"scaler", scaler_},
                {"kernel", {{"kind", kernel_.kind}, {"gamma", kernel_.gamma}, {"degree", kernel_.degree},
                            {"coef0", kernel_.coef0}}},
                {"support", solution_.support},
                {"coef", solution_.coef},
                {"bias", solution_.bias},
                {"converged", solution_.converged},
                {"iterations", solution_.iterations},
                {"platt", {a_, b_}}};
}

std::shared_ptr<const SvmModel> train_svm(const Matrix& X, const Labels& y, const SvmParams& params) {
    params.validate();
    check_dataset(X, y);
    Standardizer scaler = Standardizer::fit(X);
    const Matrix Z = scaler.apply(X);
    const std::size_t p = X.front().size();

    KernelSpec kernel;
    kernel.kind = params.kernel;
    kernel.degree = params.degree;
    kernel.coef0 = params.coef0;
    if (params.gamma == "auto") {
        kernel.gamma = 1.0 / static_cast<double>(p);
    } else {
        double mean = 0.0;
        for (const auto& r : Z) {
            for (double v : r) {
                mean += v;
            }
        }
        const double count = static_cast<double>(Z.size() * p);
        mean /= count;
        double var = 0.0;
        for (const auto& r : Z) {
            for (double v : r) {
                var += (v - mean) * (v - mean);
            }
        }
        var /= count;
        kernel.gamma = var > 0.0 ? 1.0 / (static_cast<double>(p) * var) : 1.0;
    }

    SvmSolution sol = solve_svm(Z, y, kernel, params.C, params.tol, params.max_iter);

    std::vector<double> oof(Z.size(), 0.0);
    const auto folds = stratified_kfold(y, 3, derive_seed(params.seed, "platt"));
    bool calibrated = true;
    for (const auto& test : folds) {
        std::vector<char> is_test(Z.size(), 0);
        for (std::size_t i : test) {
            is_test[i] = 1;
        }
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < Z.size(); ++i) {
            if (!is_test[i]) {
                train.push_back(i);
            }
        }
        const Labels yt = subset(y, train);
        if (std::all_of(yt.begin(), yt.end(), [&](int v) { return v == yt.front(); })) {
            calibrated = false;
            break;
        }
        const SvmSolution part = solve_svm(subset(Z, train), yt, kernel, params.C, params.tol, params.max_iter);
        for (std::size_t i : test) {
            oof[i] = decision(part, kernel, Z[i]);
        }
    }
    if (!calibrated) {
        for (std::size_t i = 0; i < Z.size(); ++i) {
            oof[i] = decision(sol, kernel, Z[i]);
        }
    }
    const auto [a, b] = fit_platt(oof, y);
    return std::make_shared<SvmModel>(params, std::move(scaler), kernel, std::move(sol), a, b);
}

}  // namespace hrtrust
