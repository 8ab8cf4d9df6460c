#pragma once

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hrtrust/core/error.hpp"
#include "hrtrust/core/json.hpp"
#include "hrtrust/indicators/indicators.hpp"
#include "hrtrust/pbo/pbo.hpp"
#include "hrtrust/simulator/simulator.hpp"

namespace hrtrust {

/// The request clashes with state the server already holds (idempotency key reuse, stale
/// iteration, finished session, unmet job dependency).
struct Conflict : Error {
    using Error::Error;
};

struct ServiceConfig {
    std::string bind = "127.0.0.1";
    unsigned short port = 8080;
    std::filesystem::path data_dir = "hrtrust-data";
    std::uint64_t seed = 0;
    std::filesystem::path static_dir;  ///< empty: no static files
    unsigned io_threads = 2;
    unsigned workers = 1;

    void validate() const;
};

void to_json(json& j, const ServiceConfig& c);
void from_json(const json& j, ServiceConfig& c);

/// HRTRUST_BIND, HRTRUST_PORT, HRTRUST_DATA_DIR, HRTRUST_SEED and HRTRUST_STATIC_DIR override the file values.
void apply_env_overrides(ServiceConfig& c, const std::function<const char*(const char*)>& getenv);

/// Optional JSON file, then environment overrides.
ServiceConfig load_service_config(const std::optional<std::filesystem::path>& file,
                                  const std::function<const char*(const char*)>& getenv);

struct HttpRequest {
    std::string method;
    std::string target;
    std::map<std::string, std::string> headers;  ///< lower-case names
    std::string body;
};

struct HttpResponse {
    int status = 200;
    std::string content_type = "application/json";
    std::string body;
};

/// Validated body of POST /sessions.
struct SessionSpec {
    std::string mode = "human";  ///< human | simulated
    std::uint64_t seed = 0;
    ParamBox box;
    WorkspaceLayout layout;
    int n_iters = 15;
    std::size_t operator_index = 0;  ///< simulated operator; human sessions use it for previews only

    void validate() const;
    [[nodiscard]] PboConfig pbo() const;
    [[nodiscard]] SimulatorConfig simulator() const;
    /// The operator that answers simulated sessions and drives indicator previews.
    [[nodiscard]] SyntheticOperator op() const;

    friend bool operator==(const SessionSpec&, const SessionSpec&) = default;
};

void to_json(json& j, const SessionSpec& s);
/// Missing keys take defaults (seed from `default_seed`); unknown keys are rejected.
SessionSpec parse_session_spec(const json& j, std::uint64_t default_seed);

enum class JobStatus { queued, running, done, failed };
std::string to_string(JobStatus s);

using Clock = std::function<std::string()>;
/// UTC, ISO 8601 with seconds.
std::string utc_now();

/// Sessions are event-sourced: data_dir/sessions/<id>.jsonl holds a "created" line and one
/// line per preference, appended and flushed before the response is produced. Jobs run on a
/// worker pool inside data_dir/runs/<id>; their status is mirrored in data_dir/jobs/<id>.json.
class Service {
public:
    explicit Service(ServiceConfig cfg, Clock clock = utc_now);
    ~Service();
    Service(const Service&) = delete;
    Service& operator=(const Service&) = delete;

    HttpResponse handle(const HttpRequest& req);

    json create_session(const json& body, const std::string& idempotency_key = {});
    json session_resource(const std::string& id) const;
    json pair_view(const std::string& id) const;
    /// `iteration` is the number of preferences the client believes are recorded.
    json submit_preference(const std::string& id, int pi, std::optional<int> iteration,
                           const std::string& idempotency_key = {});
    /// Answers up to `steps` pairs with the session's simulated operator.
    json auto_answer(const std::string& id, int steps, const std::string& idempotency_key = {});
    std::vector<std::string> session_ids() const;
    SessionState session_state(const std::string& id) const;

    json submit_train(const json& body, const std::string& idempotency_key = {});
    json submit_explain(const json& body, const std::string& idempotency_key = {});
    json report(const std::string& id) const;
    std::vector<std::string> report_ids() const;
    /// Blocks until no job is queued or running.
    void wait_idle();

    using Listener = std::function<void(const std::string&)>;
    /// Throws NotFound for unknown sessions.
    std::size_t subscribe(const std::string& session_id, Listener listener);
    void unsubscribe(std::size_t token);

    [[nodiscard]] const ServiceConfig& config() const { return cfg_; }
    [[nodiscard]] std::filesystem::path session_log(const std::string& id) const;

private:
    struct Session;
    struct Job;

    Session& find_session(const std::string& id) const;
    void load_sessions();
    void load_jobs();
    json resource_locked(const Session& s) const;
    void notify(const std::string& session_id, const json& message);
    json enqueue(const std::string& kind, const json& request, const std::string& key, const std::string& run);
    void persist_job(const Job& job) const;
    void set_status(Job& job, JobStatus status, const std::string& error = {});
    void worker_loop();
    HttpResponse serve_static(const std::string& target) const;

    ServiceConfig cfg_;
    Clock clock_;

    mutable std::mutex sessions_mu_;
    std::map<std::string, std::unique_ptr<Session>> sessions_;
    std::map<std::string, std::string> session_keys_;  ///< creation idempotency key -> id
    std::size_t next_session_ = 1;

    std::mutex listeners_mu_;
    std::map<std::size_t, std::pair<std::string, Listener>> listeners_;
    std::size_t next_listener_ = 1;

    mutable std::mutex jobs_mu_;
    std::condition_variable jobs_cv_;
    std::condition_variable idle_cv_;
    std::map<std::string, std::unique_ptr<Job>> jobs_;
    std::map<std::string, std::string> job_keys_;
    std::deque<std::string> queue_;
    std::size_t next_job_ = 1;
    std::size_t active_ = 0;
    bool stopping_ = false;
    std::vector<std::thread> workers_;
};

}  // namespace hrtrust
