#include "hrtrust/service/service.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "hrtrust/core/rng.hpp"
#include "hrtrust/pipeline/pipeline.hpp"
#include "hrtrust/trajectory/trajectory.hpp"

namespace hrtrust {

namespace fs = std::filesystem;

struct Service::Session {
    std::string id;
    SessionSpec spec;
    SessionState state;
    std::string created;
    std::string updated;
    std::map<std::string, json> keys;  ///< idempotency key -> what it did
    std::optional<IndicatorConfig> indicators;
    fs::path log;
    mutable std::mutex mu;
};

struct Service::Job {
    std::string id;
    std::string kind;
    std::string run;
    std::string key;
    json request;
    JobStatus status = JobStatus::queued;
    std::vector<std::string> history;
    std::string error;
    json result;
    std::string created;
    std::string updated;
};

namespace {

std::vector<std::string> split_path(const std::string& target) {
    std::string path = target.substr(0, target.find('?'));
    std::vector<std::string> out;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '/')) {
        if (!part.empty()) {
            out.push_back(part);
        }
    }
    return out;
}

HttpResponse json_response(int status, const json& body) { return {status, "application/json", body.dump()}; }

HttpResponse error_response(int status, const std::string& message) {
    return json_response(status, json{{"error", message}});
}

json parse_body(const std::string& body) {
    if (body.empty()) {
        return json::object();
    }
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw InvalidInput(std::string("request body is not valid JSON: ") + e.what());
    }
}

std::string header(const HttpRequest& req, const std::string& name) {
    const auto it = req.headers.find(name);
    return it == req.headers.end() ? std::string() : it->second;
}

std::size_t numbered_suffix(const std::string& name, char prefix) {
    if (name.size() < 2 || name[0] != prefix) {
        return 0;
    }
    try {
        return std::stoul(name.substr(1));
    } catch (const std::exception&) {
        return 0;
    }
}

std::string numbered_id(char prefix, std::size_t n) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%c%06zu", prefix, n);
    return buf;
}

void append_line(const fs::path& path, const json& line) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) {
        throw Error("cannot append to " + path.string());
    }
    out << line.dump() << '\n';
    out.flush();
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

std::string content_type_for(const fs::path& p) {
    const std::string ext = p.extension().string();
    if (ext == ".html") return "text/html; charset=utf-8";
    if (ext == ".js") return "text/javascript";
    if (ext == ".css") return "text/css";
    if (ext == ".svg") return "image/svg+xml";
    if (ext == ".json") return "application/json";
    if (ext == ".png") return "image/png";
    return "application/octet-stream";
}

}  // namespace

// ---- configuration ----

void ServiceConfig::validate() const {
    if (bind.empty()) {
        throw InvalidInput("service config: bind address is empty");
    }
    if (data_dir.empty()) {
        throw InvalidInput("service config: data_dir is empty");
    }
    if (io_threads == 0 || workers == 0) {
        throw InvalidInput("service config: io_threads and workers must be positive");
    }
}

void to_json(json& j, const ServiceConfig& c) {
    j = json{{"bind", c.bind},
             {"port", c.port},
             {"data_dir", c.data_dir.string()},
             {"seed", c.seed},
             {"static_dir", c.static_dir.string()},
             {"io_threads", c.io_threads},
             {"workers", c.workers}};
}

void from_json(const json& j, ServiceConfig& c) {
    static const std::set<std::string> known{"bind", "port", "data_dir", "seed", "static_dir", "io_threads", "workers"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) {
            throw InvalidInput("service config: unknown key '" + k + "'");
        }
    }
    const ServiceConfig d;
    c.bind = j.value("bind", d.bind);
    c.port = j.value("port", d.port);
    c.data_dir = j.value("data_dir", d.data_dir.string());
    c.seed = j.value("seed", d.seed);
    c.static_dir = j.value("static_dir", d.static_dir.string());
    c.io_threads = j.value("io_threads", d.io_threads);
    c.workers = j.value("workers", d.workers);
}

void apply_env_overrides(ServiceConfig& c, const std::function<const char*(const char*)>& getenv) {
    const auto number = [](const char* name, const char* v, unsigned long long max) {
        const std::string s(v);
        if (s.empty() || !std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; })) {
            throw InvalidInput(std::string(name) + " must be a non-negative integer");
        }
        const unsigned long long n = std::stoull(s);
        if (n > max) {
            throw InvalidInput(std::string(name) + " is out of range");
        }
        return n;
    };
    if (const char* v = getenv("HRTRUST_BIND")) {
        c.bind = v;
    }
    if (const char* v = getenv("HRTRUST_PORT")) {
        c.port = static_cast<unsigned short>(number("HRTRUST_PORT", v, 65535));
    }
    if (const char* v = getenv("HRTRUST_DATA_DIR")) {
        c.data_dir = v;
    }
    if (const char* v = getenv("HRTRUST_SEED")) {
        c.seed = number("HRTRUST_SEED", v, std::numeric_limits<std::uint64_t>::max());
    }
    if (const char* v = getenv("HRTRUST_STATIC_DIR")) {
        c.static_dir = v;
    }
}

ServiceConfig load_service_config(const std::optional<fs::path>& file,
                                  const std::function<const char*(const char*)>& getenv) {
    ServiceConfig c;
    if (file) {
        c = read_json_file(*file).get<ServiceConfig>();
    }
    apply_env_overrides(c, getenv);
    c.validate();
    return c;
}

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string to_string(JobStatus s) {
    switch (s) {
        case JobStatus::queued: return "queued";
        case JobStatus::running: return "running";
        case JobStatus::done: return "done";
        case JobStatus::failed: return "failed";
    }
    return "failed";
}

// ---- session spec ----

void SessionSpec::validate() const {
    if (mode != "human" && mode != "simulated") {
        throw InvalidInput("mode: expected 'human' or 'simulated', got '" + mode + "'");
    }
    box.validate();
    layout.validate();
    if (n_iters < 1) {
        throw InvalidInput("n_iters: must be positive");
    }
}

PboConfig SessionSpec::pbo() const {
    PboConfig c;
    c.box = box;
    c.n_iters = n_iters;
    return c;
}

SimulatorConfig SessionSpec::simulator() const {
    SimulatorConfig c;
    c.layout = layout;
    c.box = box;
    return c;
}

SyntheticOperator SessionSpec::op() const { return sample_operator(operator_index, derive_seed(seed, "operators"), box); }

void to_json(json& j, const SessionSpec& s) {
    j = json{{"mode", s.mode},         {"seed", s.seed},     {"box", s.box},
             {"layout", s.layout},     {"n_iters", s.n_iters}, {"operator", s.operator_index}};
}

SessionSpec parse_session_spec(const json& j, std::uint64_t default_seed) {
    if (!j.is_object()) {
        throw InvalidInput("session config must be a JSON object");
    }
    static const std::set<std::string> known{"mode", "seed", "box", "layout", "n_iters", "operator"};
    for (const auto& [k, v] : j.items()) {
        if (!known.contains(k)) {
            throw InvalidInput("unknown session config field '" + k + "'");
        }
    }
    SessionSpec s;
    s.seed = default_seed;
    try {
        s.mode = j.value("mode", s.mode);
        s.seed = j.value("seed", s.seed);
        if (j.contains("box")) {
            s.box = j.at("box").get<ParamBox>();
        }
        if (j.contains("layout")) {
            s.layout = j.at("layout").get<WorkspaceLayout>();
        }
        s.n_iters = j.value("n_iters", s.n_iters);
        s.operator_index = j.value("operator", s.operator_index);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("session config: ") + e.what());
    }
    s.validate();
    return s;
}

// ---- service ----

Service::Service(ServiceConfig cfg, Clock clock) : cfg_(std::move(cfg)), clock_(std::move(clock)) {
    cfg_.validate();
    fs::create_directories(cfg_.data_dir / "sessions");
    fs::create_directories(cfg_.data_dir / "jobs");
    fs::create_directories(cfg_.data_dir / "runs");
    load_sessions();
    load_jobs();
    for (unsigned i = 0; i < cfg_.workers; ++i) {
        workers_.emplace_back([this] { worker_loop(); });
    }
}

Service::~Service() {
    {
        std::lock_guard lock(jobs_mu_);
        stopping_ = true;
    }
    jobs_cv_.notify_all();
    for (auto& t : workers_) {
        t.join();
    }
}

fs::path Service::session_log(const std::string& id) const { return cfg_.data_dir / "sessions" / (id + ".jsonl"); }

void Service::load_sessions() {
    std::vector<fs::path> logs;
    for (const auto& e : fs::directory_iterator(cfg_.data_dir / "sessions")) {
        if (e.is_regular_file() && e.path().extension() == ".jsonl") {
            logs.push_back(e.path());
        }
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& path : logs) {
        std::ifstream in(path);
        std::string line;
        auto s = std::make_unique<Session>();
        s->log = path;
        bool created = false;
        while (std::getline(in, line)) {
            if (line.empty()) {
                continue;
            }
            json ev;
            try {
                ev = json::parse(line);
            } catch (const json::parse_error&) {
                break;  // torn final line from a crash mid-append
            }
            const std::string type = ev.at("event").get<std::string>();
            if (type == "created") {
                s->id = ev.at("id").get<std::string>();
                s->spec = parse_session_spec(ev.at("spec"), 0);
                s->state = start_session(s->spec.pbo(), s->spec.seed);
                s->created = s->updated = ev.at("at").get<std::string>();
                if (const std::string key = ev.value("key", ""); !key.empty()) {
                    session_keys_[key] = s->id;
                }
                created = true;
            } else if (type == "preference" && created) {
                const int pi = ev.at("pi").get<int>();
                s->state = propose_next(record_preference(s->state, {s->state.best, *s->state.pending, pi}));
                s->updated = ev.at("at").get<std::string>();
                if (ev.contains("key_record")) {
                    s->keys[ev.at("key").get<std::string>()] = ev.at("key_record");
                }
            }
        }
        if (!created) {
            continue;
        }
        next_session_ = std::max(next_session_, numbered_suffix(s->id, 's') + 1);
        const std::string id = s->id;
        sessions_.emplace(id, std::move(s));
    }
}

Service::Session& Service::find_session(const std::string& id) const {
    std::lock_guard lock(sessions_mu_);
    const auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw NotFound("unknown session '" + id + "'");
    }
    return *it->second;
}

json Service::resource_locked(const Session& s) const {
    return json{{"id", s.id},
                {"mode", s.spec.mode},
                {"config", s.spec},
                {"iteration", s.state.iteration},
                {"complete", s.state.finished()},
                {"best", s.state.best},
                {"state", s.state},
                {"created", s.created},
                {"updated", s.updated},
                {"persistence", s.log.string()}};
}

json Service::create_session(const json& body, const std::string& key) {
    const SessionSpec spec = parse_session_spec(body, cfg_.seed);
    std::unique_lock lock(sessions_mu_);
    if (!key.empty()) {
        const auto it = session_keys_.find(key);
        if (it != session_keys_.end()) {
            Session& existing = *sessions_.at(it->second);
            lock.unlock();
            std::lock_guard slock(existing.mu);
            if (!(existing.spec == spec)) {
                throw Conflict("idempotency key '" + key + "' was used for a different session config");
            }
            json r = resource_locked(existing);
            r["replayed"] = true;
            return r;
        }
    }
    auto s = std::make_unique<Session>();
    s->id = numbered_id('s', next_session_++);
    s->spec = spec;
    s->state = start_session(spec.pbo(), spec.seed);
    s->created = s->updated = clock_();
    s->log = session_log(s->id);
    json ev{{"event", "created"}, {"id", s->id}, {"spec", spec}, {"at", s->created}};
    if (!key.empty()) {
        ev["key"] = key;
    }
    append_line(s->log, ev);
    if (!key.empty()) {
        session_keys_[key] = s->id;
    }
    json r = resource_locked(*s);
    sessions_.emplace(s->id, std::move(s));
    return r;
}

json Service::session_resource(const std::string& id) const {
    const Session& s = find_session(id);
    std::lock_guard lock(s.mu);
    return resource_locked(s);
}

SessionState Service::session_state(const std::string& id) const {
    const Session& s = find_session(id);
    std::lock_guard lock(s.mu);
    return s.state;
}

std::vector<std::string> Service::session_ids() const {
    std::lock_guard lock(sessions_mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) {
        out.push_back(id);
    }
    return out;
}

json Service::pair_view(const std::string& id) const {
    Session& s = find_session(id);
    std::lock_guard lock(s.mu);
    if (s.state.finished() || !s.state.pending) {
        throw Conflict("session '" + id + "' is complete");
    }
    const SimulatorConfig sim = s.spec.simulator();
    if (!s.indicators) {
        IndicatorConfig icfg;
        icfg.attention.task_center = sim.layout.b;
        icfg.dt = sim.dt;
        icfg.bounds = calibrate_bounds(sim, derive_seed(s.spec.seed, "bounds"), 40, icfg.speed_window);
        s.indicators = icfg;
    }
    const SyntheticOperator op = s.spec.op();
    const auto view = [&](const InteractionParams& x) {
        std::size_t index = 0;
        while (index < s.state.evaluated.size() && !(s.state.evaluated[index].x == x)) {
            ++index;
        }
        const Trajectory traj = planned_trajectory(x, sim.layout, sim.dt);
        const CycleRecording rec =
            simulate_cycle(op, traj, x, derive_seed(derive_seed(s.spec.seed, "preview"), index), sim);
        json poly = json::array();
        for (const auto& p : traj.samples) {
            poly.push_back({p.t, p.value.x, p.value.y, p.value.z});
        }
        return json{{"params", x},
                    {"evaluated_index", index},
                    {"duration", traj.duration()},
                    {"polyline", poly},
                    {"indicators", cycle_summary(rec, traj, *s.indicators)}};
    };
    return json{{"session", s.id},
                {"iteration", s.state.iteration},
                {"n_iters", s.state.config.n_iters},
                {"preview_operator", op.id},
                {"dt", sim.dt},
                {"layout", sim.layout},
                {"best", view(s.state.best)},
                {"candidate", view(*s.state.pending)}};
}

json Service::submit_preference(const std::string& id, int pi, std::optional<int> iteration, const std::string& key) {
    if (pi != -1 && pi != 1) {
        throw InvalidInput("pi must be -1 (keep best) or +1 (prefer candidate), got " + std::to_string(pi));
    }
    Session& s = find_session(id);
    json r;
    {
        std::lock_guard lock(s.mu);
        if (!key.empty()) {
            const auto it = s.keys.find(key);
            if (it != s.keys.end()) {
                const json& rec = it->second;
                if (rec.value("kind", "") != "preference" || rec.at("pi").get<int>() != pi ||
                    (iteration && rec.at("iteration").get<int>() != *iteration)) {
                    throw Conflict("idempotency key '" + key + "' was used for a different request");
                }
                r = resource_locked(s);
                r["replayed"] = true;
                return r;
            }
        }
        if (iteration && *iteration != s.state.iteration) {
            throw Conflict("stale iteration " + std::to_string(*iteration) + "; session is at iteration " +
                           std::to_string(s.state.iteration));
        }
        if (s.state.finished()) {
            throw Conflict("session '" + id + "' is complete");
        }
        const int answered = s.state.iteration;
        json rec{{"kind", "preference"}, {"iteration", answered}, {"pi", pi}};
        SessionState next = propose_next(record_preference(s.state, {s.state.best, *s.state.pending, pi}));
        const std::string at = clock_();
        json ev{{"event", "preference"}, {"iteration", answered}, {"pi", pi}, {"source", "client"}, {"at", at}};
        if (!key.empty()) {
            ev["key"] = key;
            ev["key_record"] = rec;
        }
        append_line(s.log, ev);
        s.state = std::move(next);
        s.updated = at;
        if (!key.empty()) {
            s.keys[key] = rec;
        }
        r = resource_locked(s);
    }
    notify(id, json{{"type", "state_changed"}, {"session", id}, {"iteration", r.at("iteration")},
                    {"complete", r.at("complete")}});
    return r;
}

json Service::auto_answer(const std::string& id, int steps, const std::string& key) {
    if (steps < 1) {
        throw InvalidInput("steps must be positive");
    }
    Session& s = find_session(id);
    json r;
    {
        std::lock_guard lock(s.mu);
        if (s.spec.mode != "simulated") {
            throw Conflict("session '" + id + "' is not simulated");
        }
        if (!key.empty()) {
            const auto it = s.keys.find(key);
            if (it != s.keys.end()) {
                if (it->second.value("kind", "") != "auto" || it->second.at("steps").get<int>() != steps) {
                    throw Conflict("idempotency key '" + key + "' was used for a different request");
                }
                r = resource_locked(s);
                r["replayed"] = true;
                return r;
            }
        }
        if (s.state.finished()) {
            throw Conflict("session '" + id + "' is complete");
        }
        const SyntheticOperator op = s.spec.op();
        const json rec{{"kind", "auto"}, {"steps", steps}};
        for (int k = 0; k < steps && !s.state.finished(); ++k) {
            Rng rng(derive_seed(derive_seed(op.rng_seed, "preferences"), static_cast<std::uint64_t>(s.state.iteration)));
            const int pi = answer_preference(op, s.state.best, *s.state.pending, rng);
            const int answered = s.state.iteration;
            SessionState next = propose_next(record_preference(s.state, {s.state.best, *s.state.pending, pi}));
            const std::string at = clock_();
            json ev{{"event", "preference"}, {"iteration", answered}, {"pi", pi}, {"source", "simulated"}, {"at", at}};
            if (!key.empty() && k == 0) {
                ev["key"] = key;
                ev["key_record"] = rec;
            }
            append_line(s.log, ev);
            s.state = std::move(next);
            s.updated = at;
        }
        if (!key.empty()) {
            s.keys[key] = rec;
        }
        r = resource_locked(s);
    }
    notify(id, json{{"type", "state_changed"}, {"session", id}, {"iteration", r.at("iteration")},
                    {"complete", r.at("complete")}});
    return r;
}

std::size_t Service::subscribe(const std::string& session_id, Listener listener) {
    (void)find_session(session_id);
    std::lock_guard lock(listeners_mu_);
    const std::size_t token = next_listener_++;
    listeners_.emplace(token, std::make_pair(session_id, std::move(listener)));
    return token;
}

void Service::unsubscribe(std::size_t token) {
    std::lock_guard lock(listeners_mu_);
    listeners_.erase(token);
}

void Service::notify(const std::string& session_id, const json& message) {
    std::vector<Listener> targets;
    {
        std::lock_guard lock(listeners_mu_);
        for (const auto& [token, entry] : listeners_) {
            if (entry.first == session_id) {
                targets.push_back(entry.second);
            }
        }
    }
    const std::string text = message.dump();
    for (const auto& l : targets) {
        l(text);
    }
}

// ---- jobs ----

void Service::persist_job(const Job& job) const {
    write_json_file(cfg_.data_dir / "jobs" / (job.id + ".json"),
                    json{{"id", job.id},
                         {"kind", job.kind},
                         {"run", job.run},
                         {"key", job.key},
                         {"request", job.request},
                         {"status", to_string(job.status)},
                         {"history", job.history},
                         {"error", job.error},
                         {"result", job.result},
                         {"created", job.created},
                         {"updated", job.updated}});
}

void Service::load_jobs() {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(cfg_.data_dir / "jobs")) {
        if (e.is_regular_file() && e.path().extension() == ".json") {
            files.push_back(e.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
        const json j = read_json_file(f);
        auto job = std::make_unique<Job>();
        job->id = j.at("id").get<std::string>();
        job->kind = j.at("kind").get<std::string>();
        job->run = j.at("run").get<std::string>();
        job->key = j.value("key", "");
        job->request = j.at("request");
        job->history = j.at("history").get<std::vector<std::string>>();
        job->error = j.value("error", "");
        job->result = j.value("result", json());
        job->created = j.value("created", "");
        job->updated = j.value("updated", "");
        const std::string st = j.at("status").get<std::string>();
        job->status = st == "done" ? JobStatus::done : st == "failed" ? JobStatus::failed : JobStatus::queued;
        if (st == "queued" || st == "running") {
            job->status = JobStatus::failed;
            job->error = "interrupted by a service restart";
            job->history.push_back("failed");
            persist_job(*job);
        }
        next_job_ = std::max(next_job_, numbered_suffix(job->id, 'j') + 1);
        if (!job->key.empty()) {
            job_keys_[job->key] = job->id;
        }
        const std::string id = job->id;
        jobs_.emplace(id, std::move(job));
    }
}

void Service::set_status(Job& job, JobStatus status, const std::string& error) {
    job.status = status;
    job.history.push_back(to_string(status));
    job.error = error;
    job.updated = clock_();
    persist_job(job);
}

json Service::enqueue(const std::string& kind, const json& request, const std::string& key, const std::string& run) {
    std::unique_lock lock(jobs_mu_);
    if (!key.empty()) {
        const auto it = job_keys_.find(key);
        if (it != job_keys_.end()) {
            const Job& j = *jobs_.at(it->second);
            if (j.kind != kind || j.request != request) {
                throw Conflict("idempotency key '" + key + "' was used for a different job");
            }
            return json{{"id", j.id}, {"kind", j.kind}, {"status", to_string(j.status)}, {"run", j.run},
                        {"replayed", true}};
        }
    }
    auto job = std::make_unique<Job>();
    job->id = numbered_id('j', next_job_++);
    job->kind = kind;
    job->request = request;
    job->key = key;
    job->run = run.empty() ? job->id : run;
    job->created = job->updated = clock_();
    job->history.push_back("queued");
    persist_job(*job);
    if (!key.empty()) {
        job_keys_[key] = job->id;
    }
    json r{{"id", job->id}, {"kind", kind}, {"status", "queued"}, {"run", job->run}};
    queue_.push_back(job->id);
    jobs_.emplace(job->id, std::move(job));
    lock.unlock();
    jobs_cv_.notify_one();
    return r;
}

json Service::submit_train(const json& body, const std::string& key) {
    if (!body.is_object()) {
        throw InvalidInput("train request must be a JSON object");
    }
    for (const auto& [k, v] : body.items()) {
        if (k != "seed" && k != "config") {
            throw InvalidInput("unknown train request field '" + k + "'");
        }
    }
    RunConfig rc;
    if (body.contains("config")) {
        rc = body.at("config").get<RunConfig>();
    } else {
        rc.seed = cfg_.seed;
    }
    if (body.contains("seed")) {
        rc.seed = body.at("seed").get<std::uint64_t>();
    }
    rc.validate();
    return enqueue("train", json{{"config", rc}}, key, "");
}

json Service::submit_explain(const json& body, const std::string& key) {
    if (!body.is_object() || !body.contains("run") || !body.at("run").is_string()) {
        throw InvalidInput("explain request needs a 'run' naming a train job");
    }
    const std::string run = body.at("run").get<std::string>();
    {
        std::lock_guard lock(jobs_mu_);
        const auto it = jobs_.find(run);
        if (it == jobs_.end()) {
            throw NotFound("unknown run '" + run + "'");
        }
        const Job& j = *it->second;
        if (j.kind != "train" || j.status != JobStatus::done ||
            !fs::exists(cfg_.data_dir / "runs" / run / run_paths::kModel)) {
            throw Conflict("explain needs a trained model: run '" + run + "' is " + j.kind + "/" +
                           to_string(j.status));
        }
    }
    return enqueue("explain", json{{"run", run}}, key, run);
}

void Service::worker_loop() {
    for (;;) {
        Job* job = nullptr;
        {
            std::unique_lock lock(jobs_mu_);
            jobs_cv_.wait(lock, [&] { return stopping_ || !queue_.empty(); });
            if (stopping_) {
                return;
            }
            job = jobs_.at(queue_.front()).get();
            queue_.pop_front();
            ++active_;
            set_status(*job, JobStatus::running);
        }
        const fs::path dir = cfg_.data_dir / "runs" / job->run;
        json result;
        std::string error;
        try {
            if (job->kind == "train") {
                const RunConfig rc = job->request.at("config").get<RunConfig>();
                fs::create_directories(dir);
                write_json_file(dir / run_paths::kConfig, rc);
                for (const std::string stage : {"simulate", "indicators", "train", "evaluate"}) {
                    run_stage(stage, dir, rc);
                    update_manifest(dir, rc, stage);
                }
                result = json{{"run", job->run}, {"eval", read_json_file(dir / run_paths::kEval)}};
            } else {
                const RunConfig rc = read_json_file(dir / run_paths::kConfig).get<RunConfig>();
                run_explain(dir, rc);
                update_manifest(dir, rc, "explain");
                const json shap = read_json_file(dir / run_paths::kShap);
                result = json{{"run", job->run},
                              {"names", shap.at("names")},
                              {"global", shap.at("global")},
                              {"participants", shap.at("participants")},
                              {"trust_weights", shap.at("trust_weights")}};
                if (fs::exists(dir / run_paths::kPersonalized)) {
                    result["personalized"] = read_json_file(dir / run_paths::kPersonalized).at("participants");
                }
            }
        } catch (const std::exception& e) {
            error = e.what();
        }
        {
            std::lock_guard lock(jobs_mu_);
            if (error.empty()) {
                job->result = std::move(result);
                set_status(*job, JobStatus::done);
            } else {
                set_status(*job, JobStatus::failed, error);
            }
            --active_;
        }
        idle_cv_.notify_all();
    }
}

void Service::wait_idle() {
    std::unique_lock lock(jobs_mu_);
    idle_cv_.wait(lock, [&] { return queue_.empty() && active_ == 0; });
}

json Service::report(const std::string& id) const {
    std::lock_guard lock(jobs_mu_);
    const auto it = jobs_.find(id);
    if (it == jobs_.end()) {
        throw NotFound("unknown report '" + id + "'");
    }
    const Job& j = *it->second;
    json r{{"id", j.id},         {"kind", j.kind},       {"run", j.run},         {"status", to_string(j.status)},
           {"history", j.history}, {"created", j.created}, {"updated", j.updated}};
    if (j.status == JobStatus::done) {
        r["report"] = j.result;
    }
    if (j.status == JobStatus::failed) {
        r["error"] = j.error;
    }
    return r;
}

std::vector<std::string> Service::report_ids() const {
    std::lock_guard lock(jobs_mu_);
    std::vector<std::string> out;
    for (const auto& [id, j] : jobs_) {
        out.push_back(id);
    }
    return out;
}

// ---- HTTP routing ----

HttpResponse Service::serve_static(const std::string& target) const {
    if (cfg_.static_dir.empty()) {
        return error_response(404, "not found: " + target);
    }
    std::string path = target.substr(0, target.find('?'));
    if (path.empty() || path == "/") {
        path = "/index.html";
    }
    if (path.find("..") != std::string::npos) {
        return error_response(400, "invalid path");
    }
    const fs::path file = cfg_.static_dir / path.substr(1);
    if (!fs::is_regular_file(file)) {
        return error_response(404, "not found: " + target);
    }
    return {200, content_type_for(file), read_text_file(file)};
}

HttpResponse Service::handle(const HttpRequest& req) {
    try {
        const auto seg = split_path(req.target);
        const std::string key = header(req, "idempotency-key");
        const bool get = req.method == "GET";
        const bool post = req.method == "POST";
        const auto method_not_allowed = [&] { return error_response(405, "method not allowed"); };

        if (seg.size() == 1 && seg[0] == "healthz") {
            return json_response(200, json{{"status", "ok"}});
        }
        if (!seg.empty() && seg[0] == "sessions") {
            if (seg.size() == 1) {
                if (post) {
                    json r = create_session(parse_body(req.body), key);
                    return json_response(r.value("replayed", false) ? 200 : 201, r);
                }
                if (get) {
                    return json_response(200, json{{"sessions", session_ids()}});
                }
                return method_not_allowed();
            }
            const std::string& id = seg[1];
            if (seg.size() == 2) {
                return get ? json_response(200, session_resource(id)) : method_not_allowed();
            }
            if (seg.size() == 3 && seg[2] == "pair") {
                return get ? json_response(200, pair_view(id)) : method_not_allowed();
            }
            if (seg.size() == 3 && seg[2] == "preference") {
                if (!post) {
                    return method_not_allowed();
                }
                const json body = parse_body(req.body);
                if (!body.is_object() || !body.contains("pi") || !body.at("pi").is_number_integer()) {
                    throw InvalidInput("preference body needs an integer 'pi'");
                }
                std::optional<int> iteration;
                if (body.contains("iteration")) {
                    if (!body.at("iteration").is_number_integer()) {
                        throw InvalidInput("'iteration' must be an integer");
                    }
                    iteration = body.at("iteration").get<int>();
                }
                return json_response(200, submit_preference(id, body.at("pi").get<int>(), iteration, key));
            }
            if (seg.size() == 3 && seg[2] == "auto") {
                if (!post) {
                    return method_not_allowed();
                }
                const json body = parse_body(req.body);
                return json_response(200, auto_answer(id, body.value("steps", 1), key));
            }
            if (seg.size() == 3 && seg[2] == "events") {
                (void)find_session(id);
                return error_response(426, "WebSocket upgrade required");
            }
            return error_response(404, "not found: " + req.target);
        }
        if (seg.size() == 2 && seg[0] == "pipeline") {
            if (!post) {
                return method_not_allowed();
            }
            if (seg[1] == "train") {
                return json_response(202, submit_train(parse_body(req.body), key));
            }
            if (seg[1] == "explain") {
                return json_response(202, submit_explain(parse_body(req.body), key));
            }
            return error_response(404, "not found: " + req.target);
        }
        if (!seg.empty() && seg[0] == "reports") {
            if (!get) {
                return method_not_allowed();
            }
            if (seg.size() == 1) {
                return json_response(200, json{{"reports", report_ids()}});
            }
            if (seg.size() == 2) {
                return json_response(200, report(seg[1]));
            }
            return error_response(404, "not found: " + req.target);
        }
        if (get) {
            return serve_static(req.target);
        }
        return error_response(404, "not found: " + req.target);
    } catch (const Conflict& e) {
        return error_response(409, e.what());
    } catch (const NotFound& e) {
        return error_response(404, e.what());
    } catch (const InvalidInput& e) {
        return error_response(400, e.what());
    } catch (const json::exception& e) {
        return error_response(400, e.what());
    } catch (const std::exception& e) {
        return error_response(500, e.what());
    }
}

}  // namespace hrtrust
