#include <gtest/gtest.h>

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include "hrtrust/core/rng.hpp"
#include "hrtrust/pipeline/pipeline.hpp"
#include "hrtrust/service/server.hpp"
#include "hrtrust/service/service.hpp"

using namespace hrtrust;
namespace fs = std::filesystem;

namespace {

ServiceConfig temp_config(const std::string& name) {
    ServiceConfig c;
    c.data_dir = fs::temp_directory_path() / ("hrtrust_service_" + name);
    fs::remove_all(c.data_dir);
    c.seed = 11;
    return c;
}

Clock counting_clock() {
    auto n = std::make_shared<int>(0);
    return [n] { return "t" + std::to_string((*n)++); };
}

HttpRequest request(const std::string& method, const std::string& target, const json& body = nullptr,
                    const std::string& key = {}) {
    HttpRequest r{method, target, {}, body.is_null() ? std::string() : body.dump()};
    if (!key.empty()) {
        r.headers["idempotency-key"] = key;
    }
    return r;
}

json call(Service& s, const std::string& method, const std::string& target, const json& body = nullptr,
          int expect = 200, const std::string& key = {}) {
    const auto r = s.handle(request(method, target, body, key));
    EXPECT_EQ(r.status, expect) << method << " " << target << ": " << r.body;
    return json::parse(r.body);
}

/// Deterministic answer sequence standing in for a human.
std::vector<int> answers(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(uniform01(rng) < 0.5 ? -1 : 1);
    }
    return out;
}

RunConfig small_run(std::uint64_t seed) {
    RunConfig c;
    c.seed = seed;
    c.n_operators = 4;
    c.forest["n_estimators"] = 30;
    c.personal.n_estimators = 20;
    c.background = 10;
    return c;
}

}  // namespace

TEST(ServiceConfig, FileAndEnvironment) {
    const fs::path file = fs::temp_directory_path() / "hrtrust_service_cfg.json";
    write_json_file(file, json{{"port", 9000}, {"seed", 4}, {"bind", "0.0.0.0"}});
    const std::map<std::string, std::string> env{{"HRTRUST_PORT", "9100"}, {"HRTRUST_DATA_DIR", "/tmp/x"}};
    const auto getenv = [&](const char* k) -> const char* {
        const auto it = env.find(k);
        return it == env.end() ? nullptr : it->second.c_str();
    };
    const ServiceConfig c = load_service_config(file, getenv);
    EXPECT_EQ(c.port, 9100);
    EXPECT_EQ(c.seed, 4U);
    EXPECT_EQ(c.bind, "0.0.0.0");
    EXPECT_EQ(c.data_dir, fs::path("/tmp/x"));

    const auto bad = [](const char* k) -> const char* { return std::string(k) == "HRTRUST_PORT" ? "99999" : nullptr; };
    EXPECT_THROW((void)load_service_config(std::nullopt, bad), InvalidInput);
    write_json_file(file, json{{"prot", 1}});
    EXPECT_THROW((void)load_service_config(file, getenv), InvalidInput);
}

TEST(ServiceSessions, CreateValidatesAndAssignsDistinctIds) {
    Service s(temp_config("create"), counting_clock());
    const json a = call(s, "POST", "/sessions", json::object(), 201);
    EXPECT_EQ(a.at("iteration"), 0);
    EXPECT_FALSE(a.at("complete").get<bool>());
    EXPECT_EQ(a.at("config").at("seed"), 11);
    const json b = call(s, "POST", "/sessions", json::object(), 201);
    EXPECT_NE(a.at("id"), b.at("id"));

    const json pair = call(s, "GET", "/sessions/" + a.at("id").get<std::string>() + "/pair");
    EXPECT_EQ(pair.at("iteration"), 0);

    json box = ParamBox{};
    box["min"]["tau"] = 12.0;
    const json err = call(s, "POST", "/sessions", json{{"box", box}}, 400);
    EXPECT_NE(err.at("error").get<std::string>().find("tau"), std::string::npos);
    call(s, "POST", "/sessions", json{{"mode", "robot"}}, 400);
    call(s, "POST", "/sessions", json{{"colour", 1}}, 400);
    EXPECT_EQ(s.handle({"POST", "/sessions", {}, "{not json"}).status, 400);
    call(s, "GET", "/sessions/s999999", nullptr, 404);
    call(s, "DELETE", "/sessions", nullptr, 405);
}

TEST(ServiceSessions, PairViewContract) {
    Service s(temp_config("pair"), counting_clock());
    const std::string id = call(s, "POST", "/sessions", json{{"seed", 3}}, 201).at("id");
    const SessionState initial = start_session(PboConfig{}, 3);
    json pair = call(s, "GET", "/sessions/" + id + "/pair");
    EXPECT_EQ(pair.at("best").at("params").get<InteractionParams>(), initial.best);
    EXPECT_EQ(pair.at("candidate").at("params").get<InteractionParams>(), *initial.pending);

    const WorkspaceLayout layout;
    const double dt = pair.at("dt").get<double>();
    for (int round = 0; round < 3; ++round) {
        for (const auto* side : {"best", "candidate"}) {
            const json& v = pair.at(side);
            const auto x = v.at("params").get<InteractionParams>();
            const auto& poly = v.at("polyline");
            EXPECT_NEAR(poly.back().at(0).get<double>(), x.tau, dt);
            EXPECT_NEAR(v.at("duration").get<double>(), x.tau, dt);
            double zmax = 0.0;
            for (const auto& p : poly) {
                const Vec3 q{p.at(1).get<double>(), p.at(2).get<double>(), p.at(3).get<double>()};
                EXPECT_GE(horizontal_distance(q, layout.human_center), x.d - 1e-9);
                zmax = std::max(zmax, q.z);
            }
            EXPECT_NEAR(zmax, x.h, 1e-9);
            const auto ind = v.at("indicators").get<IndicatorVector>();
            for (double value : ind.values()) {
                EXPECT_GE(value, 0.0);
                EXPECT_LE(value, 1.0);
            }
        }
        const auto before = s.session_state(id);
        call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", 1}});
        pair = call(s, "GET", "/sessions/" + id + "/pair");
        const auto after = s.session_state(id);
        EXPECT_EQ(pair.at("best").at("params").get<InteractionParams>(), *before.pending);
        EXPECT_EQ(pair.at("candidate").at("params").get<InteractionParams>(), *after.pending);
        EXPECT_EQ(pair.at("iteration"), round + 1);
    }
}

TEST(ServiceSessions, FifteenPreferencesCompleteTheSession) {
    Service s(temp_config("complete"), counting_clock());
    const std::string id = call(s, "POST", "/sessions", json::object(), 201).at("id");
    const auto pis = answers(15, 1);
    json r;
    for (int k = 0; k < 15; ++k) {
        r = call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", pis[k]}, {"iteration", k}});
    }
    EXPECT_TRUE(r.at("complete").get<bool>());
    EXPECT_EQ(r.at("iteration"), 15);
    EXPECT_EQ(r.at("best").get<InteractionParams>(), s.session_state(id).best);
    call(s, "GET", "/sessions/" + id + "/pair", nullptr, 409);
    call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", 1}}, 409);
}

TEST(ServiceSessions, PreferenceValidationAndIdempotency) {
    Service s(temp_config("idem"), counting_clock());
    const std::string id = call(s, "POST", "/sessions", json::object(), 201).at("id");
    const std::string target = "/sessions/" + id + "/preference";
    call(s, "POST", target, json{{"pi", 0}}, 400);
    call(s, "POST", target, json{{"pi", "yes"}}, 400);
    call(s, "POST", target, json::object(), 400);

    call(s, "POST", target, json{{"pi", 1}, {"iteration", 0}}, 200, "k1");
    const json again = call(s, "POST", target, json{{"pi", 1}, {"iteration", 0}}, 200, "k1");
    EXPECT_TRUE(again.at("replayed").get<bool>());
    EXPECT_EQ(s.session_state(id).iteration, 1);
    call(s, "POST", target, json{{"pi", -1}, {"iteration", 0}}, 409, "k1");
    call(s, "POST", target, json{{"pi", -1}, {"iteration", 0}}, 409, "k2");  // stale iteration
    EXPECT_EQ(s.session_state(id).iteration, 1);

    int lines = 0;
    std::ifstream in(s.session_log(id));
    for (std::string l; std::getline(in, l);) {
        ++lines;
    }
    EXPECT_EQ(lines, 2);

    const json c1 = call(s, "POST", "/sessions", json{{"seed", 5}}, 201, "create-1");
    const json c2 = call(s, "POST", "/sessions", json{{"seed", 5}}, 200, "create-1");
    EXPECT_EQ(c1.at("id"), c2.at("id"));
    call(s, "POST", "/sessions", json{{"seed", 6}}, 409, "create-1");
}

TEST(ServiceSessions, ScriptedClientMatchesHeadlessRun) {
    Service s(temp_config("scripted"), counting_clock());
    const auto pis = answers(15, 9);
    const std::string id = call(s, "POST", "/sessions", json{{"seed", 21}}, 201).at("id");
    for (int pi : pis) {
        call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", pi}});
    }
    std::size_t k = 0;
    const SessionState headless =
        run_session([&](const InteractionParams&, const InteractionParams&) { return pis[k++]; }, PboConfig{}, 21);
    EXPECT_EQ(json(s.session_state(id)).dump(), json(headless).dump());
    EXPECT_EQ(call(s, "GET", "/sessions/" + id).at("state").dump(), json(headless).dump());
}

TEST(ServiceSessions, RestartReplaysTheEventLog) {
    const ServiceConfig cfg = temp_config("restart");
    const auto pis = answers(15, 4);
    std::string id;
    std::string simulated;
    {
        Service s(cfg, counting_clock());
        id = call(s, "POST", "/sessions", json::object(), 201, "mk").at("id");
        simulated = call(s, "POST", "/sessions", json{{"mode", "simulated"}, {"operator", 2}}, 201).at("id");
    }
    for (int k = 0; k < 15; ++k) {
        SessionState before;
        json resource;
        {
            Service s(cfg, counting_clock());
            call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", pis[k]}}, 200, "p" + std::to_string(k));
            if (k % 5 == 0) {
                call(s, "POST", "/sessions/" + simulated + "/auto", json{{"steps", 2}}, 200, "a" + std::to_string(k));
            }
            before = s.session_state(id);
            resource = call(s, "GET", "/sessions/" + simulated);
        }
        Service restarted(cfg, counting_clock());
        EXPECT_EQ(json(restarted.session_state(id)).dump(), json(before).dump()) << "after request " << k;
        EXPECT_EQ(call(restarted, "GET", "/sessions/" + simulated).dump(), resource.dump());
        const json replay = call(restarted, "POST", "/sessions/" + id + "/preference", json{{"pi", pis[k]}}, 200,
                                 "p" + std::to_string(k));
        EXPECT_TRUE(replay.at("replayed").get<bool>());
    }
    Service s(cfg, counting_clock());
    EXPECT_EQ(call(s, "POST", "/sessions", json::object(), 200, "mk").at("id"), id);
    const std::string next = call(s, "POST", "/sessions", json::object(), 201).at("id");
    EXPECT_NE(next, id);
    EXPECT_NE(next, simulated);

    std::ofstream(s.session_log(id), std::ios::app) << R"({"event":"preference","pi")";  // torn write
    Service torn(cfg, counting_clock());
    EXPECT_EQ(torn.session_state(id).iteration, 15);
}

TEST(ServiceSessions, AutoAnswerUsesTheSimulatedOperator) {
    Service s(temp_config("auto"), counting_clock());
    const std::string human = call(s, "POST", "/sessions", json::object(), 201).at("id");
    call(s, "POST", "/sessions/" + human + "/auto", json::object(), 409);
    const json sim = call(s, "POST", "/sessions", json{{"mode", "simulated"}, {"n_iters", 6}}, 201);
    const std::string id = sim.at("id");
    const json r = call(s, "POST", "/sessions/" + id + "/auto", json{{"steps", 10}});
    EXPECT_EQ(r.at("iteration"), 6);
    EXPECT_TRUE(r.at("complete").get<bool>());
    call(s, "POST", "/sessions/" + id + "/auto", json{{"steps", 0}}, 400);

    const SyntheticOperator op = parse_session_spec(sim.at("config"), 0).op();
    const SessionState st = s.session_state(id);
    for (const auto& h : st.history) {
        const double du = latent_utility(op, h.x2) - latent_utility(op, h.x1);
        if (std::abs(du) > 0.2) {
            EXPECT_EQ(h.pi, du > 0 ? 1 : -1);
        }
    }
}

TEST(ServiceSessions, SubscribersHearEveryChange) {
    Service s(temp_config("notify"), counting_clock());
    const std::string id = call(s, "POST", "/sessions", json::object(), 201).at("id");
    std::vector<json> heard;
    const auto token = s.subscribe(id, [&](const std::string& m) { heard.push_back(json::parse(m)); });
    EXPECT_THROW((void)s.subscribe("nope", [](const std::string&) {}), NotFound);
    call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", 1}}, 200, "x");
    call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", 1}}, 200, "x");
    call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", -1}});
    ASSERT_EQ(heard.size(), 2U);
    EXPECT_EQ(heard[0].at("type"), "state_changed");
    EXPECT_EQ(heard[1].at("iteration"), 2);
    s.unsubscribe(token);
    call(s, "POST", "/sessions/" + id + "/preference", json{{"pi", -1}});
    EXPECT_EQ(heard.size(), 2U);
}

TEST(ServiceJobs, TrainThenExplain) {
    const ServiceConfig cfg = temp_config("jobs");
    std::string train_id;
    {
        Service s(cfg, counting_clock());
        call(s, "POST", "/pipeline/explain", json{{"run", "j000042"}}, 404);
        call(s, "POST", "/pipeline/explain", json::object(), 400);
        call(s, "POST", "/pipeline/train", json{{"sede", 1}}, 400);

        const json job = call(s, "POST", "/pipeline/train", json{{"config", small_run(5)}}, 202, "t1");
        train_id = job.at("id");
        const json same = call(s, "POST", "/pipeline/train", json{{"config", small_run(5)}}, 202, "t1");
        EXPECT_EQ(same.at("id"), train_id);
        const json early = s.report(train_id);
        if (early.at("status") != "done") {
            call(s, "POST", "/pipeline/explain", json{{"run", train_id}}, 409);
        }
        s.wait_idle();
        const json rep = call(s, "GET", "/reports/" + train_id);
        ASSERT_EQ(rep.at("status"), "done") << rep.dump();
        EXPECT_EQ(rep.at("history"), json({"queued", "running", "done"}));
        const auto eval = rep.at("report").at("eval").at("voting").get<EvalReport>();
        EXPECT_GT(eval.accuracy, 0.0);

        const json ex = call(s, "POST", "/pipeline/explain", json{{"run", train_id}}, 202);
        call(s, "POST", "/pipeline/explain", json{{"run", ex.at("id")}}, 409);  // not a train run
        s.wait_idle();
        const json er = call(s, "GET", "/reports/" + ex.at("id").get<std::string>());
        ASSERT_EQ(er.at("status"), "done") << er.dump();
        EXPECT_FALSE(er.at("report").at("global").empty());
        EXPECT_EQ(er.at("report").at("personalized").size(), 4U);

        RunConfig broken = small_run(6);
        broken.n_operators = 1;  // 15 rows: too few for the importance forest
        const json bad = call(s, "POST", "/pipeline/train", json{{"config", broken}}, 202);
        s.wait_idle();
        const json br = call(s, "GET", "/reports/" + bad.at("id").get<std::string>());
        EXPECT_EQ(br.at("status"), "failed");
        EXPECT_FALSE(br.at("error").get<std::string>().empty());
        EXPECT_EQ(br.at("history"), json({"queued", "running", "failed"}));
        EXPECT_EQ(call(s, "GET", "/reports").at("reports").size(), 3U);
    }
    Service again(cfg, counting_clock());
    EXPECT_EQ(call(again, "GET", "/reports/" + train_id).at("status"), "done");
    call(again, "GET", "/reports/j999999", nullptr, 404);
}

TEST(ServiceJobs, InterruptedJobsFailOnRestart) {
    const ServiceConfig cfg = temp_config("interrupted");
    fs::create_directories(cfg.data_dir / "jobs");
    write_json_file(cfg.data_dir / "jobs" / "j000001.json",
                    json{{"id", "j000001"}, {"kind", "train"}, {"run", "j000001"}, {"request", json::object()},
                         {"status", "running"}, {"history", {"queued", "running"}}});
    Service s(cfg, counting_clock());
    const json r = s.report("j000001");
    EXPECT_EQ(r.at("status"), "failed");
    EXPECT_EQ(r.at("history"), json({"queued", "running", "failed"}));
    const json next = call(s, "POST", "/pipeline/train", json{{"config", small_run(1)}}, 202);
    EXPECT_EQ(next.at("id"), "j000002");
    s.wait_idle();
}

TEST(ServiceHttp, StaticFilesAndHealth) {
    ServiceConfig cfg = temp_config("static");
    cfg.static_dir = cfg.data_dir / "ui";
    write_text_file(cfg.static_dir / "index.html", "<html>ui</html>");
    Service s(cfg, counting_clock());
    const auto r = s.handle({"GET", "/", {}, {}});
    EXPECT_EQ(r.status, 200);
    EXPECT_EQ(r.body, "<html>ui</html>");
    EXPECT_EQ(r.content_type.rfind("text/html", 0), 0U);
    EXPECT_EQ(s.handle({"GET", "/../secret", {}, {}}).status, 400);
    EXPECT_EQ(s.handle({"GET", "/missing.js", {}, {}}).status, 404);
    EXPECT_EQ(call(s, "GET", "/healthz").at("status"), "ok");
}

TEST(ServiceHttp, RoundTripOverSockets) {
    namespace beast = boost::beast;
    namespace http = beast::http;
    namespace net = boost::asio;
    using tcp = net::ip::tcp;

    Service service(temp_config("socket"), counting_clock());
    HttpServer server(service, "127.0.0.1", 0, 2);
    server.start();
    const std::string port = std::to_string(server.port());

    net::io_context ioc;
    tcp::resolver resolver(ioc);
    const auto endpoints = resolver.resolve("127.0.0.1", port);
    const auto send = [&](http::verb verb, const std::string& target, const std::string& body,
                          const std::string& key = {}) {
        beast::tcp_stream stream(ioc);
        stream.connect(endpoints);
        http::request<http::string_body> req{verb, target, 11};
        req.set(http::field::host, "127.0.0.1");
        req.set(http::field::content_type, "application/json");
        if (!key.empty()) {
            req.set("Idempotency-Key", key);
        }
        req.body() = body;
        req.prepare_payload();
        http::write(stream, req);
        beast::flat_buffer buf;
        http::response<http::string_body> res;
        http::read(stream, buf, res);
        beast::error_code ec;
        stream.socket().shutdown(tcp::socket::shutdown_both, ec);
        return std::make_pair(static_cast<int>(res.result_int()), res.body());
    };

    const auto created = send(http::verb::post, "/sessions", "{}");
    ASSERT_EQ(created.first, 201) << created.second;
    const std::string id = json::parse(created.second).at("id");

    beast::websocket::stream<tcp::socket> ws(ioc);
    net::connect(ws.next_layer(), endpoints);
    ws.handshake("127.0.0.1:" + port, "/sessions/" + id + "/events");
    beast::flat_buffer wbuf;
    ws.read(wbuf);
    EXPECT_EQ(json::parse(beast::buffers_to_string(wbuf.data())).at("type"), "subscribed");
    wbuf.consume(wbuf.size());

    const auto pref = send(http::verb::post, "/sessions/" + id + "/preference", R"({"pi": 1})", "retry-me");
    EXPECT_EQ(pref.first, 200) << pref.second;
    EXPECT_EQ(send(http::verb::post, "/sessions/" + id + "/preference", R"({"pi": 1})", "retry-me").first, 200);
    ws.read(wbuf);
    const json event = json::parse(beast::buffers_to_string(wbuf.data()));
    EXPECT_EQ(event.at("type"), "state_changed");
    EXPECT_EQ(event.at("iteration"), 1);
    EXPECT_EQ(service.session_state(id).iteration, 1);

    const auto pair = send(http::verb::get, "/sessions/" + id + "/pair", "");
    EXPECT_EQ(pair.first, 200);
    EXPECT_EQ(json::parse(pair.second).at("iteration"), 1);
    EXPECT_EQ(send(http::verb::get, "/sessions/nope", "").first, 404);

    beast::websocket::stream<tcp::socket> bad(ioc);
    net::connect(bad.next_layer(), endpoints);
    beast::error_code ec;
    bad.handshake("127.0.0.1:" + port, "/sessions/nope/events", ec);
    EXPECT_TRUE(ec);

    ws.close(beast::websocket::close_code::normal);
    server.stop();
}
