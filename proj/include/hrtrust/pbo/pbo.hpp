#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/json.hpp"
#include "hrtrust/trajectory/trajectory.hpp"

namespace hrtrust {

using UnitPoint = std::array<double, 3>;

/// pi = -1: x1 preferred; pi = +1: x2 preferred.
struct PreferenceOutcome {
    InteractionParams x1;
    InteractionParams x2;
    int pi = -1;

    [[nodiscard]] const InteractionParams& winner() const { return pi < 0 ? x1 : x2; }
    [[nodiscard]] const InteractionParams& loser() const { return pi < 0 ? x2 : x1; }

    friend bool operator==(const PreferenceOutcome&, const PreferenceOutcome&) = default;
};

struct PboConfig {
    ParamBox box;
    double epsilon = 1.0;        ///< RBF shape on the unit box
    double sigma_margin = 0.1;
    double lambda_reg = 1e-6;
    double explore_start = 2.0;
    double explore_end = 0.2;
    int n_iters = 15;
    int screening_points = 2048;
    double dedup_tol = 1e-3;      ///< minimum distance to evaluated points, unit-box units
    double refine_tol = 1e-6;     ///< final pattern-search step
    int solver_max_iter = 50000;
    double solver_tol = 1e-10;    ///< relative duality gap

    void validate() const;
    /// Exploration weight used when proposing the candidate after `iteration` preferences.
    [[nodiscard]] double explore_weight(int iteration) const;

    friend bool operator==(const PboConfig&, const PboConfig&) = default;
};

/// f(x) = sum_k beta_k / (1 + (eps |u - c_k|)^2), u the unit-box image of x. Lower is better.
struct Surrogate {
    ParamBox box;
    std::vector<UnitPoint> centers;
    std::vector<double> beta;
    double epsilon = 1.0;
    std::string kernel = "inverse_quadratic";
    bool converged = true;
    int iterations = 0;
    double duality_gap = 0.0;

    [[nodiscard]] double eval_unit(const UnitPoint& u) const;
    [[nodiscard]] double eval(const InteractionParams& x) const { return eval_unit(box.to_unit(x)); }
};

struct EvaluatedPoint {
    InteractionParams x;
    std::string recording_ref;

    friend bool operator==(const EvaluatedPoint&, const EvaluatedPoint&) = default;
};

struct SessionState {
    PboConfig config;
    std::uint64_t seed = 0;
    std::vector<PreferenceOutcome> history;
    std::vector<EvaluatedPoint> evaluated;
    InteractionParams best;
    std::optional<InteractionParams> pending;  ///< candidate awaiting comparison with best
    int iteration = 0;

    [[nodiscard]] bool finished() const { return iteration >= config.n_iters; }

    friend bool operator==(const SessionState&, const SessionState&) = default;
};

/// n-point Latin hypercube in [0, 1]^3.
std::vector<UnitPoint> latin_hypercube(std::size_t n, std::uint64_t seed);

/// Two distinct points from a 2-point Latin hypercube over the box.
std::pair<InteractionParams, InteractionParams> propose_initial(const ParamBox& box, std::uint64_t seed);

/// Session with best = x1 and x2 pending.
SessionState start_session(const PboConfig& cfg, std::uint64_t seed);

/// Applies the answer to the (best, pending) pair. Pure: returns the updated state.
SessionState record_preference(const SessionState& state, const PreferenceOutcome& outcome);

/// Fits the surrogate to the history and sets a fresh pending candidate. No-op when finished.
SessionState propose_next(const SessionState& state);

Surrogate fit_surrogate(const std::vector<PreferenceOutcome>& history, const std::vector<InteractionParams>& evaluated,
                        const PboConfig& cfg);

/// (2/pi) atan(1 / sum_k |u - u_k|^-2); zero at evaluated points.
double exploration_term(const UnitPoint& u, const std::vector<UnitPoint>& evaluated);

/// f / spread(f over evaluated) - w z(u).
double acquisition(const Surrogate& s, const UnitPoint& u, const std::vector<UnitPoint>& evaluated, double f_scale,
                   double explore_weight);

/// Spread of the surrogate over the evaluated points (1 when flat).
double surrogate_scale(const Surrogate& s, const std::vector<UnitPoint>& evaluated);

InteractionParams next_candidate(const Surrogate& s, const std::vector<InteractionParams>& evaluated,
                                 double explore_weight, std::uint64_t seed, const PboConfig& cfg);

/// Returns +1 when `candidate` is preferred over `best`, -1 otherwise.
using PreferenceOracle = std::function<int(const InteractionParams& best, const InteractionParams& candidate)>;

/// Thrown when the oracle fails mid-session; carries everything recorded so far.
struct SessionAborted : Error {
    SessionAborted(const std::string& what, SessionState partial) : Error(what), state(std::move(partial)) {}
    SessionState state;
};

SessionState run_session(const PreferenceOracle& oracle, const PboConfig& cfg, std::uint64_t seed);

/// JSONL transcript: a header {"seed", "config"} then one outcome per line.
void write_transcript(std::ostream& out, const SessionState& state);
SessionState replay_transcript(std::istream& in);

void to_json(json& j, const PreferenceOutcome& o);
void from_json(const json& j, PreferenceOutcome& o);
void to_json(json& j, const PboConfig& c);
void from_json(const json& j, PboConfig& c);
void to_json(json& j, const Surrogate& s);
void to_json(json& j, const SessionState& s);
void from_json(const json& j, SessionState& s);

}  // namespace hrtrust
