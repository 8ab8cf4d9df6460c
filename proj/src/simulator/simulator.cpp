#include "hrtrust/simulator/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/hash.hpp"

namespace hrtrust {
namespace {

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

double min_jerk_progress(double s) {
    s = clamp01(s);
    return s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

Vec3 noisy(const Vec3& p, double sigma, Rng& rng) {
    if (sigma == 0.0) {
        return p;
    }
    const double nx = standard_normal(rng);
    const double ny = standard_normal(rng);
    const double nz = standard_normal(rng);
    return {p.x + sigma * nx, p.y + sigma * ny, p.z + sigma * nz};
}

/// Head orientation whose gaze frame points at target.
Quat look_at(const Vec3& from, const Vec3& target) {
    const Vec3 rel = target - from;
    const double yaw = std::atan2(rel.y, rel.x);
    const double elevation = std::atan2(rel.z, std::hypot(rel.x, rel.y));
    const Quat rz = Quat::from_axis_angle({0.0, 0.0, 1.0}, yaw);
    const Quat ry = Quat::from_axis_angle({0.0, 1.0, 0.0}, -elevation - kGazeTilt);
    return (rz * ry).normalized();
}

/// Cumulative arc length fraction along the trajectory.
Stream<double> arc_progress(const Trajectory& traj) {
    const auto& s = traj.samples;
    Stream<double> out(s.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (i > 0) {
            acc += norm(s[i].value - s[i - 1].value);
        }
        out[i] = {s[i].t, acc};
    }
    for (auto& v : out) {
        v.value = acc > 0.0 ? v.value / acc : 0.0;
    }
    return out;
}

enum class GazeTarget { ee, task, away };

GazeTarget gaze_target(double t, double block, const std::vector<std::array<GazeTarget, 3>>& order,
                       const std::array<double, 3>& fraction) {
    const auto k = std::min(order.size() - 1, static_cast<std::size_t>(std::floor(t / block)));
    double phase = (t - static_cast<double>(k) * block) / block;
    for (std::size_t i = 0; i < 3; ++i) {
        const double f = fraction[static_cast<std::size_t>(order[k][i])];
        if (phase < f) {
            return order[k][i];
        }
        phase -= f;
    }
    return order[k][2];
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) {
        throw InvalidInput("quantile of an empty sample");
    }
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (v[hi] - v[lo]) * (pos - static_cast<double>(lo));
}

std::string cycle_ref(const std::string& op_id, std::size_t k) {
    std::ostringstream ss;
    ss << op_id << "_c" << std::setw(2) << std::setfill('0') << k;
    return ss.str();
}

json operator_bundle_json(const Study& s) {
    return json{{"seed", s.seed}, {"config", s.config}, {"operators", s.operators}};
}

void write_labels_csv(std::ostream& out, const std::vector<StudyRow>& rows) {
    out << "operator_id,iteration,best_ref,candidate_ref,pi,tau1,d1,h1,tau2,d2,h2\n" << std::setprecision(17);
    for (const auto& r : rows) {
        out << r.operator_id << ',' << r.iteration << ',' << r.best_ref << ',' << r.candidate_ref << ',' << r.pi << ','
            << r.x1.tau << ',' << r.x1.d << ',' << r.x1.h << ',' << r.x2.tau << ',' << r.x2.d << ',' << r.x2.h
            << '\n';
    }
}

std::vector<StudyRow> read_labels_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("operator_id,", 0) != 0) {
        throw InvalidInput("labels.csv: missing header");
    }
    std::vector<StudyRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        if (cells.size() != 11) {
            throw InvalidInput("labels.csv: expected 11 columns in: " + line);
        }
        StudyRow r;
        r.operator_id = cells[0];
        r.iteration = std::stoi(cells[1]);
        r.best_ref = cells[2];
        r.candidate_ref = cells[3];
        r.pi = std::stoi(cells[4]);
        r.x1 = {std::stod(cells[5]), std::stod(cells[6]), std::stod(cells[7])};
        r.x2 = {std::stod(cells[8]), std::stod(cells[9]), std::stod(cells[10])};
        if (r.pi != -1 && r.pi != 1) {
            throw InvalidInput("labels.csv: pi must be -1 or +1");
        }
        rows.push_back(std::move(r));
    }
    return rows;
}

}  // namespace

BehaviorCoeffs BehaviorCoeffs::noiseless() const {
    BehaviorCoeffs c = *this;
    c.reaction_noise = 0.0;
    c.coupling_noise = 0.0;
    c.dwell_noise = 0.0;
    c.head_noise = 0.0;
    return c;
}

void SyntheticOperator::validate() const {
    box.validate();
    if (!box.contains(x_star)) {
        throw InvalidInput("operator " + id + ": x_star outside the box");
    }
    double total = 0.0;
    for (double wi : w) {
        if (!(wi >= 0.0) || !std::isfinite(wi)) {
            throw InvalidInput("operator " + id + ": weights must be finite and non-negative");
        }
        total += wi;
    }
    if (!(total > 0.0)) {
        throw InvalidInput("operator " + id + ": weights are all zero");
    }
    if (!(preference_noise >= 0.0)) {
        throw InvalidInput("operator " + id + ": preference noise must be non-negative");
    }
}

double latent_utility(const SyntheticOperator& op, const InteractionParams& x) {
    const auto xa = x.as_array();
    const auto sa = op.x_star.as_array();
    double u = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double z = (xa[i] - sa[i]) / op.box.range(i);
        u -= op.w[i] * z * z;
    }
    return u;
}

double utility_range(const SyntheticOperator& op) {
    const auto lo = op.box.lower.as_array();
    const auto hi = op.box.upper.as_array();
    const auto sa = op.x_star.as_array();
    double r = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        const double z = std::max(sa[i] - lo[i], hi[i] - sa[i]) / op.box.range(i);
        r += op.w[i] * z * z;
    }
    return r;
}

double normalized_trust(const SyntheticOperator& op, const InteractionParams& x) {
    return clamp01(1.0 + latent_utility(op, x) / utility_range(op));
}

int answer_preference(const SyntheticOperator& op, const InteractionParams& x1, const InteractionParams& x2,
                      Rng& rng) {
    const double du = latent_utility(op, x2) - latent_utility(op, x1);
    const double beta = op.preference_noise;
    double p = 0.5;
    if (std::isinf(beta)) {
        p = du > 0.0 ? 1.0 : (du < 0.0 ? 0.0 : 0.5);
    } else {
        p = 1.0 / (1.0 + std::exp(-beta * du));
    }
    return uniform01(rng) < p ? 1 : -1;
}

void SimulatorConfig::validate() const {
    layout.validate();
    box.validate();
    if (!(dt > 0.0) || !(t_robot >= 0.0) || !(tail >= 0.0) || !(sensor_sigma >= 0.0) || !(gaze_block > 0.0)) {
        throw InvalidInput("simulator config: dt, gaze_block must be positive; t_robot, tail, sensor_sigma non-negative");
    }
    if (!hand_rest.is_finite() || !(hand_rush > 0.0)) {
        throw InvalidInput("simulator config: hand_rest must be finite and hand_rush positive");
    }
}

CycleBehavior draw_behavior(const SyntheticOperator& op, const InteractionParams& x, Rng& rng) {
    const auto& c = op.behavior;
    CycleBehavior b;
    b.trust = normalized_trust(op, x);
    b.drive = 1.0 - std::sqrt(1.0 - b.trust);
    const double lack = 1.0 - b.drive;
    b.reaction_delay = x.tau * std::max(0.0, c.reaction_min + c.reaction_gain * lack +
                                                 c.reaction_noise * standard_normal(rng));
    b.coupling = clamp01(c.coupling_offset + c.coupling_gain * b.drive + c.coupling_noise * standard_normal(rng));
    b.ee_dwell = clamp01(c.ee_dwell_offset + c.ee_dwell_gain * b.drive + c.dwell_noise * standard_normal(rng));
    b.task_dwell = clamp01(c.task_dwell_offset + c.task_dwell_gain * b.drive + c.dwell_noise * standard_normal(rng));
    const double total = b.ee_dwell + b.task_dwell;
    if (total > 1.0) {
        b.ee_dwell /= total;
        b.task_dwell /= total;
    }
    b.head_lean = std::max(0.0, c.head_base + c.head_gain * b.drive + c.head_noise * standard_normal(rng));
    return b;
}

CycleRecording simulate_cycle(const SyntheticOperator& op, const Trajectory& traj, const InteractionParams& x,
                              std::uint64_t seed, const SimulatorConfig& cfg) {
    op.validate();
    cfg.validate();
    if (traj.samples.size() < 2) {
        throw InvalidInput("simulate_cycle: trajectory needs at least two samples");
    }
    Rng behavior_rng(derive_seed(seed, "behavior"));
    Rng gaze_rng(derive_seed(seed, "gaze"));
    Rng sensor_rng(derive_seed(seed, "sensor"));

    const CycleBehavior b = draw_behavior(op, x, behavior_rng);
    const double tau = traj.duration();
    const double t_r = cfg.t_robot;
    const double t_h = t_r + b.reaction_delay;
    const double total = std::max(t_r + tau, t_h) + cfg.tail;
    const auto grid = uniform_grid(0.0, total, cfg.dt);

    const Stream<double> progress = arc_progress(traj);
    const Vec3 hand_start = cfg.hand_rest;
    const Vec3 hand_goal = cfg.layout.c;
    const Vec3 head_home{cfg.layout.human_center.x, cfg.layout.human_center.y,
                         cfg.layout.human_center.z + cfg.head_height};
    Vec3 lean_dir{cfg.layout.b.x - head_home.x, cfg.layout.b.y - head_home.y, 0.0};
    const double lean_norm = norm(lean_dir);
    lean_dir = lean_norm > 0.0 ? lean_dir * (1.0 / lean_norm) : Vec3{1.0, 0.0, 0.0};

    const auto n_blocks = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(total / cfg.gaze_block)));
    std::vector<std::array<GazeTarget, 3>> order(n_blocks, {GazeTarget::ee, GazeTarget::task, GazeTarget::away});
    for (auto& o : order) {
        portable_shuffle(o.begin(), o.end(), gaze_rng);
    }
    const std::array<double, 3> fraction{b.ee_dwell, b.task_dwell, std::max(0.0, 1.0 - b.ee_dwell - b.task_dwell)};

    CycleRecording rec;
    rec.operator_id = op.id;
    rec.t_robot = t_r;
    rec.t_human = t_h;
    rec.head.reserve(grid.size());
    rec.hand.reserve(grid.size());
    rec.ee.reserve(grid.size());
    const double rush = cfg.hand_rush * tau;
    for (double t : grid) {
        const Vec3 ee = sample_at(traj.samples, t - t_r);

        const double lean = (t > t_r && t < t_r + tau) ? std::pow(std::sin(std::numbers::pi * (t - t_r) / tau), 2) : 0.0;
        const Vec3 head = head_home + lean_dir * (b.head_lean * lean);
        Vec3 target = cfg.away_target;
        switch (gaze_target(t, cfg.gaze_block, order, fraction)) {
            case GazeTarget::ee: target = ee; break;
            case GazeTarget::task: target = cfg.layout.b; break;
            case GazeTarget::away: break;
        }

        double s_hand = 0.0;
        if (t > t_h) {
            const double coupled = sample_at(progress, t - t_h);
            const double rushed = min_jerk_progress((t - t_h) / rush);
            s_hand = b.coupling * coupled + (1.0 - b.coupling) * rushed;
        }
        const Vec3 hand = hand_start + (hand_goal - hand_start) * s_hand;

        rec.head.push_back({t, Pose{noisy(head, cfg.sensor_sigma, sensor_rng), look_at(head, target)}});
        rec.hand.push_back({t, noisy(hand, cfg.sensor_sigma, sensor_rng)});
        rec.ee.push_back({t, noisy(ee, cfg.sensor_sigma, sensor_rng)});
    }
    return rec;
}

SyntheticOperator sample_operator(std::size_t index, std::uint64_t seed, const ParamBox& box) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(index)));
    SyntheticOperator op;
    std::ostringstream id;
    id << "op" << std::setw(2) << std::setfill('0') << index;
    op.id = id.str();
    op.box = box;
    op.rng_seed = derive_seed(seed, "operator-" + op.id);
    std::array<double, 3> u{};
    for (double& v : u) {
        v = uniform(rng, 0.15, 0.85);
    }
    op.x_star = box.from_unit(u);
    for (double& wi : op.w) {
        wi = uniform(rng, 0.5, 1.5);
    }
    op.preference_noise = uniform(rng, 1000.0, 2000.0);
    auto& c = op.behavior;
    c.reaction_min = uniform(rng, 0.03, 0.05);
    c.reaction_gain = uniform(rng, 0.08, 0.12);
    c.coupling_offset = uniform(rng, 0.0, 0.15);
    c.coupling_gain = uniform(rng, 0.8, 1.0);
    c.ee_dwell_offset = uniform(rng, 0.4, 0.55);
    c.ee_dwell_gain = -uniform(rng, 0.15, 0.3);
    c.task_dwell_offset = uniform(rng, 0.25, 0.35);
    c.task_dwell_gain = (index % 2 == 0 ? 1.0 : -1.0) * uniform(rng, 0.2, 0.3);
    c.head_base = uniform(rng, 0.01, 0.05);
    c.head_gain = uniform(rng, 0.04, 0.12);
    op.validate();
    return op;
}

NormalizationBounds calibrate_bounds(const SimulatorConfig& cfg, std::uint64_t seed, std::size_t n_cycles,
                                     std::size_t speed_window) {
    cfg.validate();
    if (n_cycles == 0) {
        throw InvalidInput("calibrate_bounds: need at least one pilot cycle");
    }
    Rng rng(derive_seed(seed, "calibration"));
    std::vector<double> hand_speeds;
    std::vector<double> ee_speeds;
    for (std::size_t k = 0; k < n_cycles; ++k) {
        const SyntheticOperator op = sample_operator(k, derive_seed(seed, "pilot-operators"), cfg.box);
        std::array<double, 3> u{};
        for (double& v : u) {
            v = uniform01(rng);
        }
        const InteractionParams x = cfg.box.from_unit(u);
        const Trajectory traj = planned_trajectory(x, cfg.layout, cfg.dt);
        const CycleRecording rec = simulate_cycle(op, traj, x, derive_seed(seed, k), cfg);
        const auto vh = smoothed_speed(rec.hand, speed_window);
        const auto ve = smoothed_speed(rec.ee, speed_window);
        hand_speeds.insert(hand_speeds.end(), vh.begin(), vh.end());
        ee_speeds.insert(ee_speeds.end(), ve.begin(), ve.end());
    }

    NormalizationBounds b;
    b.v_min_hand = quantile(hand_speeds, 0.01);
    b.v_max_hand = quantile(hand_speeds, 0.99);
    b.v_min_ee = quantile(ee_speeds, 0.01);
    b.v_max_ee = quantile(ee_speeds, 0.99);
    b.tau_min = cfg.box.lower.tau;
    b.tau_max = cfg.box.upper.tau;
    b.j_min = 0.0;
    double worst = 0.0;
    for (double ud : {0.0, 0.5, 1.0}) {
        for (double uh : {0.0, 0.5, 1.0}) {
            const InteractionParams x = cfg.box.from_unit({0.0, ud, uh});
            worst = std::max(worst, squared_jerk_integral(planned_trajectory(x, cfg.layout, cfg.dt)));
        }
    }
    b.j_max = std::sqrt(worst / b.tau_max);
    b.validate();
    return b;
}

Study generate_study(std::size_t n_ops, int n_evals, std::uint64_t seed, const SimulatorConfig& cfg) {
    cfg.validate();
    if (n_ops == 0 || n_evals < 1) {
        throw InvalidInput("generate_study: need at least one operator and one evaluation");
    }
    Study study;
    study.seed = seed;
    study.config = cfg;
    PboConfig pbo;
    pbo.box = cfg.box;
    pbo.n_iters = n_evals;

    for (std::size_t k = 0; k < n_ops; ++k) {
        const SyntheticOperator op = sample_operator(k, derive_seed(seed, "operators"), cfg.box);
        Rng pref_rng(derive_seed(op.rng_seed, "preferences"));
        const PreferenceOracle oracle = [&](const InteractionParams& best, const InteractionParams& cand) {
            return answer_preference(op, best, cand, pref_rng);
        };
        SessionState session = run_session(oracle, pbo, derive_seed(op.rng_seed, "session"));

        for (std::size_t j = 0; j < session.evaluated.size(); ++j) {
            auto& ev = session.evaluated[j];
            ev.recording_ref = cycle_ref(op.id, j);
            Trajectory traj = planned_trajectory(ev.x, cfg.layout, cfg.dt);
            CycleRecording rec = simulate_cycle(op, traj, ev.x, derive_seed(op.rng_seed, j), cfg);
            rec.cycle_id = ev.recording_ref;
            study.recordings.emplace(ev.recording_ref, std::move(rec));
            study.trajectories.emplace(ev.recording_ref, std::move(traj));
        }

        const auto ref_of = [&](const InteractionParams& x) {
            for (const auto& ev : session.evaluated) {
                if (ev.x == x) {
                    return ev.recording_ref;
                }
            }
            throw Error("generate_study: compared point was never evaluated");
        };
        for (std::size_t i = 0; i < session.history.size(); ++i) {
            const auto& h = session.history[i];
            study.rows.push_back(
                {op.id, static_cast<int>(i + 1), ref_of(h.x1), ref_of(h.x2), h.x1, h.x2, h.pi});
        }
        study.operators.push_back(op);
        study.sessions.push_back(std::move(session));
    }
    return study;
}

std::string study_hash(const Study& study) {
    std::ostringstream ss;
    ss << operator_bundle_json(study).dump() << '\n';
    write_labels_csv(ss, study.rows);
    for (const auto& s : study.sessions) {
        write_transcript(ss, s);
    }
    for (const auto& [ref, rec] : study.recordings) {
        ss << ref << '\n';
        write_recording_jsonl(ss, rec);
    }
    for (const auto& [ref, traj] : study.trajectories) {
        ss << ref << '\n';
        write_trajectory_csv(ss, traj);
    }
    return sha256_hex(ss.str());
}

void write_study(const std::filesystem::path& dir, const Study& study) {
    namespace fs = std::filesystem;
    fs::create_directories(dir / "recordings");
    fs::create_directories(dir / "trajectories");
    fs::create_directories(dir / "sessions");
    write_json_file(dir / "operators.json", operator_bundle_json(study));
    {
        std::ostringstream ss;
        write_labels_csv(ss, study.rows);
        write_text_file(dir / "labels.csv", ss.str());
    }
    for (std::size_t k = 0; k < study.sessions.size(); ++k) {
        std::ostringstream ss;
        ss << json(study.sessions[k]).dump() << '\n';
        write_text_file(dir / "sessions" / (study.operators.at(k).id + ".json"), ss.str());
    }
    for (const auto& [ref, rec] : study.recordings) {
        write_recording_jsonl(dir / "recordings" / (ref + ".jsonl"), rec);
    }
    for (const auto& [ref, traj] : study.trajectories) {
        write_trajectory_csv(dir / "trajectories" / (ref + ".csv"), traj);
    }
}

Study read_study(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) {
        throw NotFound("study directory not found: " + dir.string());
    }
    Study study;
    const json meta = read_json_file(dir / "operators.json");
    study.seed = meta.at("seed").get<std::uint64_t>();
    study.config = meta.at("config").get<SimulatorConfig>();
    study.operators = meta.at("operators").get<std::vector<SyntheticOperator>>();
    {
        std::istringstream ss(read_text_file(dir / "labels.csv"));
        study.rows = read_labels_csv(ss);
    }
    for (const auto& op : study.operators) {
        study.sessions.push_back(json::parse(read_text_file(dir / "sessions" / (op.id + ".json"))).get<SessionState>());
        for (const auto& ev : study.sessions.back().evaluated) {
            study.recordings.emplace(ev.recording_ref,
                                     read_recording_jsonl(dir / "recordings" / (ev.recording_ref + ".jsonl")));
            study.trajectories.emplace(ev.recording_ref,
                                       read_trajectory_csv(dir / "trajectories" / (ev.recording_ref + ".csv")));
        }
    }
    return study;
}

void to_json(json& j, const BehaviorCoeffs& c) {
    j = json{{"reaction_min", c.reaction_min},
             {"reaction_gain", c.reaction_gain},
             {"reaction_noise", c.reaction_noise},
             {"coupling_offset", c.coupling_offset},
             {"coupling_gain", c.coupling_gain},
             {"coupling_noise", c.coupling_noise},
             {"ee_dwell_offset", c.ee_dwell_offset},
             {"ee_dwell_gain", c.ee_dwell_gain},
             {"task_dwell_offset", c.task_dwell_offset},
             {"task_dwell_gain", c.task_dwell_gain},
             {"dwell_noise", c.dwell_noise},
             {"head_base", c.head_base},
             {"head_gain", c.head_gain},
             {"head_noise", c.head_noise}};
}

void from_json(const json& j, BehaviorCoeffs& c) {
    const BehaviorCoeffs d;
    c.reaction_min = j.value("reaction_min", d.reaction_min);
    c.reaction_gain = j.value("reaction_gain", d.reaction_gain);
    c.reaction_noise = j.value("reaction_noise", d.reaction_noise);
    c.coupling_offset = j.value("coupling_offset", d.coupling_offset);
    c.coupling_gain = j.value("coupling_gain", d.coupling_gain);
    c.coupling_noise = j.value("coupling_noise", d.coupling_noise);
    c.ee_dwell_offset = j.value("ee_dwell_offset", d.ee_dwell_offset);
    c.ee_dwell_gain = j.value("ee_dwell_gain", d.ee_dwell_gain);
    c.task_dwell_offset = j.value("task_dwell_offset", d.task_dwell_offset);
    c.task_dwell_gain = j.value("task_dwell_gain", d.task_dwell_gain);
    c.dwell_noise = j.value("dwell_noise", d.dwell_noise);
    c.head_base = j.value("head_base", d.head_base);
    c.head_gain = j.value("head_gain", d.head_gain);
    c.head_noise = j.value("head_noise", d.head_noise);
}

void to_json(json& j, const SyntheticOperator& op) {
    j = json{{"id", op.id},
             {"box", op.box},
             {"x_star", op.x_star},
             {"w", op.w},
             {"preference_noise", std::isinf(op.preference_noise) ? json(nullptr) : json(op.preference_noise)},
             {"behavior", op.behavior},
             {"rng_seed", op.rng_seed}};
}

void from_json(const json& j, SyntheticOperator& op) {
    op.id = j.at("id").get<std::string>();
    op.box = j.contains("box") ? j.at("box").get<ParamBox>() : ParamBox{};
    op.x_star = j.at("x_star").get<InteractionParams>();
    op.w = j.at("w").get<std::array<double, 3>>();
    const auto& beta = j.at("preference_noise");
    op.preference_noise = beta.is_null() ? std::numeric_limits<double>::infinity() : beta.get<double>();
    op.behavior = j.contains("behavior") ? j.at("behavior").get<BehaviorCoeffs>() : BehaviorCoeffs{};
    op.rng_seed = j.value("rng_seed", std::uint64_t{0});
    op.validate();
}

void to_json(json& j, const SimulatorConfig& c) {
    j = json{{"layout", c.layout},       {"box", c.box},
             {"dt", c.dt},               {"t_robot", c.t_robot},
             {"tail", c.tail},           {"sensor_sigma", c.sensor_sigma},
             {"head_height", c.head_height}, {"away_target", c.away_target},
             {"gaze_block", c.gaze_block}, {"hand_rest", c.hand_rest},
             {"hand_rush", c.hand_rush}};
}

void from_json(const json& j, SimulatorConfig& c) {
    const SimulatorConfig d;
    c.layout = j.contains("layout") ? j.at("layout").get<WorkspaceLayout>() : d.layout;
    c.box = j.contains("box") ? j.at("box").get<ParamBox>() : d.box;
    c.dt = j.value("dt", d.dt);
    c.t_robot = j.value("t_robot", d.t_robot);
    c.tail = j.value("tail", d.tail);
    c.sensor_sigma = j.value("sensor_sigma", d.sensor_sigma);
    c.head_height = j.value("head_height", d.head_height);
    c.away_target = j.contains("away_target") ? j.at("away_target").get<Vec3>() : d.away_target;
    c.gaze_block = j.value("gaze_block", d.gaze_block);
    c.hand_rest = j.contains("hand_rest") ? j.at("hand_rest").get<Vec3>() : d.hand_rest;
    c.hand_rush = j.value("hand_rush", d.hand_rush);
    c.validate();
}

}  // namespace hrtrust
