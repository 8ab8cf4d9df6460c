#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "hrtrust/core/error.hpp"
#include "hrtrust/pipeline/pipeline.hpp"
#include "hrtrust/service/server.hpp"
#include "hrtrust/service/service.hpp"

namespace fs = std::filesystem;
using namespace hrtrust;

namespace {

constexpr int kOk = 0;
constexpr int kUserError = 1;
constexpr int kInternalError = 2;

struct Common {
    std::string run_dir = "run";
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("-o,--run-dir", c.run_dir, "Run directory")->capture_default_str();
    cmd->add_option("--config", c.config, "RunConfig JSON file");
    cmd->add_option("--seed", c.seed, "Top-level seed");
    cmd->add_option("--threads", c.threads, "Worker threads for SHAP and tuning");
}

/// --config, else the run directory's saved config, else defaults; --seed and --threads on top.
RunConfig resolve_config(const Common& c) {
    RunConfig cfg;
    const fs::path saved = fs::path(c.run_dir) / run_paths::kConfig;
    if (!c.config.empty()) {
        cfg = read_json_file(c.config).get<RunConfig>();
    } else if (fs::exists(saved)) {
        cfg = read_json_file(saved).get<RunConfig>();
    }
    if (c.seed) {
        cfg.seed = *c.seed;
    }
    if (c.threads) {
        cfg.threads = *c.threads;
    }
    cfg.validate();
    return cfg;
}

void record(const Common& c, const RunConfig& cfg, const std::string& stage) {
    fs::create_directories(c.run_dir);
    write_json_file(fs::path(c.run_dir) / run_paths::kConfig, cfg);
    std::vector<std::string> configs;
    if (!c.config.empty()) {
        configs.push_back(fs::absolute(c.config).lexically_normal().generic_string());
    }
    const RunManifest m = update_manifest(c.run_dir, cfg, stage, configs);
    std::cout << stage << ": ok (" << m.hashes.size() << " files hashed in " << m.output_dir << ")\n";
}

void stage(const Common& c, const std::string& name) {
    const RunConfig cfg = resolve_config(c);
    fs::create_directories(c.run_dir);
    if (name == "train" && !fs::exists(fs::path(c.run_dir) / run_paths::kOriginals) &&
        fs::exists(fs::path(c.run_dir) / run_paths::kStudy / "operators.json")) {
        run_indicators(c.run_dir, cfg);
        record(c, cfg, "indicators");
    }
    run_stage(name, c.run_dir, cfg);
    record(c, cfg, name);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Trust-aware robot trajectory pipeline: simulate, learn, explain, serve"};
    app.require_subcommand(1);

    Common common;
    std::vector<std::pair<std::string, CLI::App*>> stages;
    for (const auto& [name, help] : std::vector<std::pair<std::string, std::string>>{
             {"simulate", "Generate a synthetic operator study"},
             {"indicators", "Compute per-cycle indicators and the original feature matrix"},
             {"train", "Prepare the dataset and fit the voting ensemble"},
             {"evaluate", "Score the ensemble and its members on the held-out split"},
             {"explain", "SHAP explanations, per-participant trends and trust-score weights"},
             {"report", "Render the HTML/SVG report bundle"}}) {
        auto* cmd = app.add_subcommand(name, help);
        add_common(cmd, common);
        stages.emplace_back(name, cmd);
    }
    std::size_t n_ops = 0;
    int n_evals = 0;
    stages[0].second->add_option("--operators", n_ops, "Number of simulated operators");
    stages[0].second->add_option("--evals", n_evals, "Preference evaluations per operator");
    bool tune = false;
    stages[2].second->add_flag("--tune", tune, "Grid-search each member before fitting");

    auto* all = app.add_subcommand("all", "Run every stage in order");
    add_common(all, common);

    auto* optimize = app.add_subcommand("optimize", "Run a PBO session against a simulated operator");
    add_common(optimize, common);
    std::string op_spec = "sim:0";
    OptimizeRequest opt;
    optimize->add_option("--operator", op_spec, "Simulated operator, sim:<index>")->capture_default_str();
    optimize->add_option("--iters", opt.iters, "Preference evaluations")->capture_default_str();
    optimize->add_flag("--noiseless", opt.noiseless, "Answer by the latent utility without noise");

    auto* serve = app.add_subcommand("serve", "Run the HTTP/WebSocket service");
    std::string serve_config;
    std::optional<std::string> bind;
    std::optional<unsigned short> port;
    std::optional<std::string> data_dir;
    std::optional<std::uint64_t> serve_seed;
    std::optional<std::string> static_dir;
    serve->add_option("--config", serve_config, "Service config JSON file");
    serve->add_option("--bind", bind, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");
    serve->add_option("--data-dir", data_dir, "Session logs, jobs and runs");
    serve->add_option("--seed", serve_seed, "Default seed for new sessions and jobs");
    serve->add_option("--static-dir", static_dir, "UI bundle to serve");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUserError;
    }

    try {
        for (const auto& [name, cmd] : stages) {
            if (!cmd->parsed()) {
                continue;
            }
            if (name == "simulate" && (n_ops > 0 || n_evals > 0)) {
                RunConfig cfg = resolve_config(common);
                if (n_ops > 0) {
                    cfg.n_operators = n_ops;
                }
                if (n_evals > 0) {
                    cfg.n_evals = n_evals;
                }
                cfg.validate();
                fs::create_directories(common.run_dir);
                run_simulate(common.run_dir, cfg);
                record(common, cfg, name);
            } else if (name == "train" && tune) {
                RunConfig cfg = resolve_config(common);
                cfg.tune = true;
                fs::create_directories(common.run_dir);
                if (!fs::exists(fs::path(common.run_dir) / run_paths::kOriginals) &&
                    fs::exists(fs::path(common.run_dir) / run_paths::kStudy / "operators.json")) {
                    run_indicators(common.run_dir, cfg);
                    record(common, cfg, "indicators");
                }
                run_train(common.run_dir, cfg);
                record(common, cfg, name);
            } else {
                stage(common, name);
            }
            return kOk;
        }
        if (all->parsed()) {
            for (const auto& name : stage_names()) {
                stage(common, name);
            }
            return kOk;
        }
        if (optimize->parsed()) {
            const RunConfig cfg = resolve_config(common);
            opt.operator_index = parse_operator_spec(op_spec);
            fs::create_directories(common.run_dir);
            const SessionState s = run_optimize(common.run_dir, cfg, opt);
            record(common, cfg, "optimize");
            std::cout << "optimize: " << s.history.size() << " outcomes, best " << json(s.best).dump() << "\n";
            return kOk;
        }
        if (serve->parsed()) {
            ServiceConfig sc = load_service_config(
                serve_config.empty() ? std::nullopt : std::optional<fs::path>(serve_config), std::getenv);
            if (bind) sc.bind = *bind;
            if (port) sc.port = *port;
            if (data_dir) sc.data_dir = *data_dir;
            if (serve_seed) sc.seed = *serve_seed;
            if (static_dir) sc.static_dir = *static_dir;
            sc.validate();
            Service service(sc);
            HttpServer server(service, sc.bind, sc.port, sc.io_threads);
            std::cout << "listening on " << sc.bind << ":" << server.port() << " (data in " << sc.data_dir.string()
                      << ")" << std::endl;
            server.run();
            return kOk;
        }
    } catch (const InvalidInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const NotFound& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const DegenerateInput& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const InfeasibleLayout& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUserError;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kInternalError;
    }
    return kInternalError;
}
