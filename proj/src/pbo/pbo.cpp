#include "hrtrust/pbo/pbo.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>

#include <Eigen/Dense>

#include "hrtrust/core/rng.hpp"

namespace hrtrust {

namespace {

double dist2(const UnitPoint& a, const UnitPoint& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return s;
}

double inverse_quadratic(double eps, const UnitPoint& a, const UnitPoint& b) { return 1.0 / (1.0 + eps * eps * dist2(a, b)); }

std::vector<UnitPoint> to_unit_all(const ParamBox& box, const std::vector<InteractionParams>& xs) {
    std::vector<UnitPoint> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        out.push_back(box.to_unit(x));
    }
    return out;
}

std::size_t index_of(std::vector<InteractionParams>& centers, const InteractionParams& x) {
    const auto it = std::find(centers.begin(), centers.end(), x);
    if (it != centers.end()) {
        return static_cast<std::size_t>(it - centers.begin());
    }
    centers.push_back(x);
    return centers.size() - 1;
}

struct DualProblem {
    Eigen::MatrixXd a;  ///< one row per preference: phi(loser) - phi(winner)
    Eigen::MatrixXd g;  ///< a a^T
    double sigma;
    double lambda;

    [[nodiscard]] Eigen::VectorXd beta(const Eigen::VectorXd& mu) const { return a.transpose() * mu / (2.0 * lambda); }
    [[nodiscard]] double dual(const Eigen::VectorXd& mu) const {
        return sigma * mu.sum() - mu.dot(g * mu) / (4.0 * lambda);
    }
    [[nodiscard]] double primal(const Eigen::VectorXd& b) const {
        const Eigen::VectorXd m = a * b;
        double hinge = 0.0;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            hinge += std::max(0.0, sigma - m[i]);
        }
        return hinge + lambda * b.squaredNorm();
    }
    [[nodiscard]] double gap(const Eigen::VectorXd& mu) const { return primal(beta(mu)) - dual(mu); }

    /// Exact solve on the face where the free multipliers make their constraints tight.
    [[nodiscard]] std::optional<Eigen::VectorXd> polish(const Eigen::VectorXd& mu) const {
        const Eigen::Index n = mu.size();
        std::vector<Eigen::Index> free;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mu[i] > 1e-12 && mu[i] < 1.0 - 1e-12) {
                free.push_back(i);
            }
        }
        Eigen::VectorXd out = mu;
        for (Eigen::Index i = 0; i < n; ++i) {
            if (mu[i] <= 1e-12) {
                out[i] = 0.0;
            } else if (mu[i] >= 1.0 - 1e-12) {
                out[i] = 1.0;
            }
        }
        if (!free.empty()) {
            const auto f = static_cast<Eigen::Index>(free.size());
            Eigen::MatrixXd gff(f, f);
            Eigen::VectorXd rhs(f);
            for (Eigen::Index r = 0; r < f; ++r) {
                double fixed = 0.0;
                for (Eigen::Index k = 0; k < n; ++k) {
                    const bool is_free = std::find(free.begin(), free.end(), k) != free.end();
                    if (!is_free) {
                        fixed += g(free[static_cast<std::size_t>(r)], k) * out[k];
                    }
                }
                rhs[r] = 2.0 * lambda * sigma - fixed;
                for (Eigen::Index c = 0; c < f; ++c) {
                    gff(r, c) = g(free[static_cast<std::size_t>(r)], free[static_cast<std::size_t>(c)]);
                }
            }
            const Eigen::VectorXd sol = gff.completeOrthogonalDecomposition().solve(rhs);
            for (Eigen::Index r = 0; r < f; ++r) {
                if (!(sol[r] >= 0.0 && sol[r] <= 1.0)) {
                    return std::nullopt;
                }
                out[free[static_cast<std::size_t>(r)]] = sol[r];
            }
        }
        return out;
    }
};

}  // namespace

void PboConfig::validate() const {
    box.validate();
    if (!(epsilon > 0.0)) {
        throw InvalidInput("pbo: epsilon must be positive");
    }
    if (!(sigma_margin > 0.0) || !(lambda_reg > 0.0)) {
        throw InvalidInput("pbo: sigma_margin and lambda_reg must be positive");
    }
    if (!(explore_start >= 0.0) || !(explore_end >= 0.0)) {
        throw InvalidInput("pbo: exploration weights must be non-negative");
    }
    if (n_iters < 1 || screening_points < 1 || solver_max_iter < 1) {
        throw InvalidInput("pbo: iteration counts must be positive");
    }
    if (!(dedup_tol >= 0.0) || !(refine_tol > 0.0) || !(solver_tol > 0.0)) {
        throw InvalidInput("pbo: tolerances must be positive");
    }
}

double PboConfig::explore_weight(int iteration) const {
    const double span = std::max(1, n_iters - 2);
    const double s = std::clamp(static_cast<double>(iteration - 1) / span, 0.0, 1.0);
    return explore_start + (explore_end - explore_start) * s;
}

double Surrogate::eval_unit(const UnitPoint& u) const {
    double f = 0.0;
    for (std::size_t k = 0; k < centers.size(); ++k) {
        f += beta[k] * inverse_quadratic(epsilon, u, centers[k]);
    }
    return f;
}

std::vector<UnitPoint> latin_hypercube(std::size_t n, std::uint64_t seed) {
    if (n == 0) {
        return {};
    }
    Rng rng(seed);
    std::vector<UnitPoint> pts(n);
    std::vector<std::size_t> perm(n);
    for (std::size_t d = 0; d < 3; ++d) {
        for (std::size_t i = 0; i < n; ++i) {
            perm[i] = i;
        }
        portable_shuffle(perm.begin(), perm.end(), rng);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i][d] = (static_cast<double>(perm[i]) + uniform01(rng)) / static_cast<double>(n);
        }
    }
    return pts;
}

std::pair<InteractionParams, InteractionParams> propose_initial(const ParamBox& box, std::uint64_t seed) {
    box.validate();
    const auto pts = latin_hypercube(2, seed);
    return {box.from_unit(pts[0]), box.from_unit(pts[1])};
}

SessionState start_session(const PboConfig& cfg, std::uint64_t seed) {
    cfg.validate();
    SessionState s;
    s.config = cfg;
    s.seed = seed;
    const auto [x1, x2] = propose_initial(cfg.box, derive_seed(seed, "initial"));
    s.evaluated = {{x1, ""}, {x2, ""}};
    s.best = x1;
    s.pending = x2;
    return s;
}

SessionState record_preference(const SessionState& state, const PreferenceOutcome& outcome) {
    if (outcome.pi != -1 && outcome.pi != 1) {
        throw InvalidInput("preference must be -1 or +1");
    }
    if (state.finished()) {
        throw InvalidInput("session already has all its preferences");
    }
    if (!state.pending || !(outcome.x1 == state.best) || !(outcome.x2 == *state.pending)) {
        throw InvalidInput("preference does not pair the current best with the pending candidate");
    }
    SessionState next = state;
    next.history.push_back(outcome);
    next.best = outcome.winner();
    next.pending.reset();
    ++next.iteration;
    return next;
}

Surrogate fit_surrogate(const std::vector<PreferenceOutcome>& history, const std::vector<InteractionParams>& evaluated,
                        const PboConfig& cfg) {
    if (history.empty()) {
        throw InvalidInput("fit_surrogate: need at least one preference");
    }
    std::vector<InteractionParams> centers = evaluated;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (winner, loser)
    for (const auto& h : history) {
        if (h.pi != -1 && h.pi != 1) {
            throw InvalidInput("fit_surrogate: preference must be -1 or +1");
        }
        if (h.x1 == h.x2) {
            throw InvalidInput("fit_surrogate: compared points must differ");
        }
        const std::size_t w = index_of(centers, h.winner());
        const std::size_t l = index_of(centers, h.loser());
        pairs.emplace_back(w, l);
    }

    Surrogate s;
    s.box = cfg.box;
    s.epsilon = cfg.epsilon;
    s.centers = to_unit_all(cfg.box, centers);
    const auto k = static_cast<Eigen::Index>(s.centers.size());
    Eigen::MatrixXd phi(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = 0; j < k; ++j) {
            phi(i, j) = inverse_quadratic(cfg.epsilon, s.centers[static_cast<std::size_t>(i)], s.centers[static_cast<std::size_t>(j)]);
        }
    }
    const auto n = static_cast<Eigen::Index>(pairs.size());
    DualProblem dp;
    dp.sigma = cfg.sigma_margin;
    dp.lambda = cfg.lambda_reg;
    dp.a.resize(n, k);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto [w, l] = pairs[static_cast<std::size_t>(i)];
        dp.a.row(i) = phi.row(static_cast<Eigen::Index>(l)) - phi.row(static_cast<Eigen::Index>(w));
    }
    dp.g = dp.a * dp.a.transpose();

    // Projected (accelerated) gradient ascent on the dual box QP, with periodic exact
    // polishing on the current active set.
    double lip = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        lip = std::max(lip, dp.g.row(i).cwiseAbs().sum());
    }
    lip = std::max(lip, 1e-300) / (2.0 * dp.lambda);
    const double step = 1.0 / lip;
    auto project = [](Eigen::VectorXd v) { return v.cwiseMax(0.0).cwiseMin(1.0); };

    Eigen::VectorXd mu = Eigen::VectorXd::Zero(n);
    Eigen::VectorXd y = mu;
    double t = 1.0;
    double best_gap = std::numeric_limits<double>::infinity();
    Eigen::VectorXd best_mu = mu;
    auto converged = [&](const Eigen::VectorXd& m, double& gap) {
        gap = dp.gap(m);
        const double scale = std::max(1.0, std::abs(dp.primal(dp.beta(m))));
        if (gap < best_gap) {
            best_gap = gap;
            best_mu = m;
        }
        return gap <= cfg.solver_tol * scale;
    };
    int it = 0;
    bool ok = false;
    for (; it < cfg.solver_max_iter && !ok; ++it) {
        const Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, dp.sigma) - dp.g * y / (2.0 * dp.lambda);
        const Eigen::VectorXd next = project(y + step * grad);
        const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        if (dp.dual(next) < dp.dual(mu)) {
            y = mu;  // restart momentum
            t = 1.0;
            continue;
        }
        y = next + ((t - 1.0) / t_next) * (next - mu);
        mu = next;
        t = t_next;
        if (it % 25 == 0) {
            double gap = 0.0;
            ok = converged(mu, gap);
            if (!ok) {
                if (const auto p = dp.polish(mu)) {
                    ok = converged(*p, gap);
                    if (ok) {
                        mu = *p;
                    }
                }
            }
        }
    }
    if (!ok) {
        double gap = 0.0;
        ok = converged(mu, gap);
        mu = best_mu;
    }
    const Eigen::VectorXd b = dp.beta(mu);
    s.beta.assign(b.data(), b.data() + b.size());
    s.converged = ok;
    s.iterations = it;
    s.duality_gap = best_gap;
    return s;
}

double exploration_term(const UnitPoint& u, const std::vector<UnitPoint>& evaluated) {
    double inv = 0.0;
    for (const auto& e : evaluated) {
        const double d2 = dist2(u, e);
        if (d2 == 0.0) {
            return 0.0;
        }
        inv += 1.0 / d2;
    }
    if (inv == 0.0) {
        return 1.0;
    }
    return 2.0 / std::numbers::pi * std::atan(1.0 / inv);
}

double surrogate_scale(const Surrogate& s, const std::vector<UnitPoint>& evaluated) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& e : evaluated) {
        const double f = s.eval_unit(e);
        lo = std::min(lo, f);
        hi = std::max(hi, f);
    }
    const double spread = hi - lo;
    return spread > 1e-12 ? spread : 1.0;
}

double acquisition(const Surrogate& s, const UnitPoint& u, const std::vector<UnitPoint>& evaluated, double f_scale,
                   double explore_weight) {
    return s.eval_unit(u) / f_scale - explore_weight * exploration_term(u, evaluated);
}

InteractionParams next_candidate(const Surrogate& s, const std::vector<InteractionParams>& evaluated,
                                 double explore_weight, std::uint64_t seed, const PboConfig& cfg) {
    const auto ev = to_unit_all(cfg.box, evaluated);
    const double scale = surrogate_scale(s, ev);
    const double tol2 = cfg.dedup_tol * cfg.dedup_tol;
    auto feasible = [&](const UnitPoint& u) {
        for (const auto& e : ev) {
            if (dist2(u, e) < tol2) {
                return false;
            }
        }
        return true;
    };
    auto score = [&](const UnitPoint& u) { return acquisition(s, u, ev, scale, explore_weight); };

    const auto screen = latin_hypercube(static_cast<std::size_t>(cfg.screening_points), seed);
    std::optional<UnitPoint> cur;
    double cur_a = std::numeric_limits<double>::infinity();
    double cur_f = std::numeric_limits<double>::infinity();
    for (const auto& u : screen) {
        if (!feasible(u)) {
            continue;
        }
        const double a = score(u);
        const double f = s.eval_unit(u);
        if (a < cur_a || (a == cur_a && f < cur_f)) {
            cur = u;
            cur_a = a;
            cur_f = f;
        }
    }
    if (!cur) {
        throw DegenerateInput("next_candidate: every screening point collides with an evaluated point");
    }

    // Coordinate pattern search with step halving.
    UnitPoint x = *cur;
    double fx = cur_a;
    for (double h = 0.25; h >= cfg.refine_tol; h *= 0.5) {
        bool improved = true;
        while (improved) {
            improved = false;
            for (std::size_t d = 0; d < 3; ++d) {
                for (const double dir : {1.0, -1.0}) {
                    UnitPoint y = x;
                    y[d] = std::clamp(x[d] + dir * h, 0.0, 1.0);
                    if (y[d] == x[d] || !feasible(y)) {
                        continue;
                    }
                    const double fy = score(y);
                    if (fy < fx) {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
    }
    InteractionParams out = cfg.box.from_unit(x);
    // from_unit can land one ulp outside the box.
    const auto lo = cfg.box.lower.as_array();
    const auto hi = cfg.box.upper.as_array();
    auto v = out.as_array();
    for (std::size_t d = 0; d < 3; ++d) {
        v[d] = std::clamp(v[d], lo[d], hi[d]);
    }
    return InteractionParams::from_array(v);
}

SessionState propose_next(const SessionState& state) {
    if (state.finished()) {
        return state;
    }
    if (state.pending) {
        throw InvalidInput("propose_next: a candidate is already pending");
    }
    std::vector<InteractionParams> ev;
    ev.reserve(state.evaluated.size());
    for (const auto& e : state.evaluated) {
        ev.push_back(e.x);
    }
    const Surrogate s = fit_surrogate(state.history, ev, state.config);
    const double w = state.config.explore_weight(state.iteration);
    const auto cand = next_candidate(s, ev, w, derive_seed(state.seed, static_cast<std::uint64_t>(state.iteration)),
                                     state.config);
    SessionState next = state;
    next.evaluated.push_back({cand, ""});
    next.pending = cand;
    return next;
}

SessionState run_session(const PreferenceOracle& oracle, const PboConfig& cfg, std::uint64_t seed) {
    SessionState state = start_session(cfg, seed);
    while (!state.finished()) {
        int pi = 0;
        try {
            pi = oracle(state.best, *state.pending);
        } catch (const std::exception& e) {
            throw SessionAborted(std::string("preference oracle failed: ") + e.what(), state);
        }
        if (pi != -1 && pi != 1) {
            throw SessionAborted("preference oracle returned " + std::to_string(pi) + ", expected -1 or +1", state);
        }
        state = record_preference(state, {state.best, *state.pending, pi});
        state = propose_next(state);
    }
    return state;
}

void write_transcript(std::ostream& out, const SessionState& state) {
    out << json{{"seed", state.seed}, {"config", state.config}}.dump() << '\n';
    for (std::size_t i = 0; i < state.history.size(); ++i) {
        json row = state.history[i];
        row["iteration"] = i + 1;
        out << row.dump() << '\n';
    }
}

SessionState replay_transcript(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw InvalidInput("transcript is empty");
    }
    const json header = json::parse(line);
    SessionState state = start_session(header.at("config").get<PboConfig>(), header.at("seed").get<std::uint64_t>());
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        const auto outcome = json::parse(line).get<PreferenceOutcome>();
        state = propose_next(record_preference(state, outcome));
    }
    return state;
}

void to_json(json& j, const PreferenceOutcome& o) { j = json{{"x1", o.x1}, {"x2", o.x2}, {"pi", o.pi}}; }

void from_json(const json& j, PreferenceOutcome& o) {
    o.x1 = j.at("x1").get<InteractionParams>();
    o.x2 = j.at("x2").get<InteractionParams>();
    o.pi = j.at("pi").get<int>();
}

void to_json(json& j, const PboConfig& c) {
    j = json{{"box", c.box},
             {"epsilon", c.epsilon},
             {"sigma_margin", c.sigma_margin},
             {"lambda_reg", c.lambda_reg},
             {"explore_start", c.explore_start},
             {"explore_end", c.explore_end},
             {"n_iters", c.n_iters},
             {"screening_points", c.screening_points},
             {"dedup_tol", c.dedup_tol},
             {"refine_tol", c.refine_tol},
             {"solver_max_iter", c.solver_max_iter},
             {"solver_tol", c.solver_tol}};
}

void from_json(const json& j, PboConfig& c) {
    const PboConfig d;
    c.box = j.contains("box") ? j.at("box").get<ParamBox>() : d.box;
    c.epsilon = j.value("epsilon", d.epsilon);
    c.sigma_margin = j.value("sigma_margin", d.sigma_margin);
    c.lambda_reg = j.value("lambda_reg", d.lambda_reg);
    c.explore_start = j.value("explore_start", d.explore_start);
    c.explore_end = j.value("explore_end", d.explore_end);
    c.n_iters = j.value("n_iters", d.n_iters);
    c.screening_points = j.value("screening_points", d.screening_points);
    c.dedup_tol = j.value("dedup_tol", d.dedup_tol);
    c.refine_tol = j.value("refine_tol", d.refine_tol);
    c.solver_max_iter = j.value("solver_max_iter", d.solver_max_iter);
    c.solver_tol = j.value("solver_tol", d.solver_tol);
}

void to_json(json& j, const Surrogate& s) {
    j = json{{"kernel", s.kernel},     {"epsilon", s.epsilon},       {"box", s.box},
             {"centers", s.centers},   {"beta", s.beta},             {"converged", s.converged},
             {"iterations", s.iterations}, {"duality_gap", s.duality_gap}};
}

void to_json(json& j, const SessionState& s) {
    json ev = json::array();
    for (const auto& e : s.evaluated) {
        ev.push_back({{"x", e.x}, {"recording", e.recording_ref}});
    }
    j = json{{"config", s.config},   {"seed", s.seed},         {"history", s.history},
             {"evaluated", ev},      {"best", s.best},         {"iteration", s.iteration},
             {"pending", s.pending ? json(*s.pending) : json(nullptr)}};
}

void from_json(const json& j, SessionState& s) {
    s.config = j.at("config").get<PboConfig>();
    s.seed = j.at("seed").get<std::uint64_t>();
    s.history = j.at("history").get<std::vector<PreferenceOutcome>>();
    s.evaluated.clear();
    for (const auto& e : j.at("evaluated")) {
        s.evaluated.push_back({e.at("x").get<InteractionParams>(), e.value("recording", std::string())});
    }
    s.best = j.at("best").get<InteractionParams>();
    s.iteration = j.at("iteration").get<int>();
    s.pending.reset();
    if (j.contains("pending") && !j.at("pending").is_null()) {
        s.pending = j.at("pending").get<InteractionParams>();
    }
}

}  // namespace hrtrust
