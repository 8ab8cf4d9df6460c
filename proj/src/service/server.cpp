#include "hrtrust/service/server.hpp"

#include <algorithm>
#include <cctype>
#include <csignal>
#include <deque>
#include <optional>
#include <thread>
#include <vector>

#include <boost/asio/dispatch.hpp>
#include <boost/asio/ip/tcp.hpp>
#include <boost/asio/post.hpp>
#include <boost/asio/signal_set.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

namespace hrtrust {

namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
namespace net = boost::asio;
using tcp = net::ip::tcp;

namespace {

/// Returns the session id when target is /sessions/{id}/events.
std::optional<std::string> events_target(std::string_view target) {
    target = target.substr(0, target.find('?'));
    constexpr std::string_view prefix = "/sessions/";
    constexpr std::string_view suffix = "/events";
    if (target.size() <= prefix.size() + suffix.size() || target.substr(0, prefix.size()) != prefix ||
        target.substr(target.size() - suffix.size()) != suffix) {
        return std::nullopt;
    }
    std::string id(target.substr(prefix.size(), target.size() - prefix.size() - suffix.size()));
    if (id.find('/') != std::string::npos) {
        return std::nullopt;
    }
    return id;
}

class WsSession : public std::enable_shared_from_this<WsSession> {
public:
    WsSession(tcp::socket&& socket, Service& service, std::string session)
        : ws_(std::move(socket)), service_(service), session_(std::move(session)) {}

    ~WsSession() {
        if (token_ != 0) {
            service_.unsubscribe(token_);
        }
    }

    void run(http::request<http::string_body> req) {
        ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
        ws_.async_accept(req, beast::bind_front_handler(&WsSession::on_accept, shared_from_this()));
    }

    void send(std::string message) {
        net::post(ws_.get_executor(), [self = shared_from_this(), m = std::move(message)]() mutable {
            self->queue_.push_back(std::move(m));
            if (self->queue_.size() == 1) {
                self->do_write();
            }
        });
    }

private:
    void on_accept(beast::error_code ec) {
        if (ec) {
            return;
        }
        std::weak_ptr<WsSession> weak = shared_from_this();
        try {
            token_ = service_.subscribe(session_, [weak](const std::string& m) {
                if (auto self = weak.lock()) {
                    self->send(m);
                }
            });
        } catch (const std::exception&) {
            ws_.async_close(websocket::close_code::policy_error, [self = shared_from_this()](beast::error_code) {});
            return;
        }
        send(json{{"type", "subscribed"}, {"session", session_}}.dump());
        do_read();
    }

    void do_read() { ws_.async_read(buffer_, beast::bind_front_handler(&WsSession::on_read, shared_from_this())); }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec) {
            return;
        }
        buffer_.consume(buffer_.size());
        do_read();
    }

    void do_write() {
        ws_.text(true);
        ws_.async_write(net::buffer(queue_.front()),
                        beast::bind_front_handler(&WsSession::on_write, shared_from_this()));
    }

    void on_write(beast::error_code ec, std::size_t) {
        if (ec) {
            queue_.clear();
            return;
        }
        queue_.pop_front();
        if (!queue_.empty()) {
            do_write();
        }
    }

    websocket::stream<beast::tcp_stream> ws_;
    Service& service_;
    std::string session_;
    std::size_t token_ = 0;
    beast::flat_buffer buffer_;
    std::deque<std::string> queue_;
};

class HttpSession : public std::enable_shared_from_this<HttpSession> {
public:
    HttpSession(tcp::socket&& socket, Service& service) : stream_(std::move(socket)), service_(service) {}

    void run() {
        net::dispatch(stream_.get_executor(), beast::bind_front_handler(&HttpSession::do_read, shared_from_this()));
    }

private:
    void do_read() {
        parser_.emplace();
        parser_->body_limit(64 * 1024 * 1024);
        stream_.expires_after(std::chrono::seconds(60));
        http::async_read(stream_, buffer_, *parser_,
                         beast::bind_front_handler(&HttpSession::on_read, shared_from_this()));
    }

    void on_read(beast::error_code ec, std::size_t) {
        if (ec == http::error::end_of_stream) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        if (ec) {
            return;
        }
        http::request<http::string_body> req = parser_->release();

        if (websocket::is_upgrade(req)) {
            const auto id = events_target(std::string_view(req.target().data(), req.target().size()));
            if (id && service_.handle(HttpRequest{"GET", "/sessions/" + *id, {}, {}}).status == 200) {
                stream_.expires_never();
                std::make_shared<WsSession>(stream_.release_socket(), service_, *id)->run(std::move(req));
                return;
            }
            write(req, {404, "application/json", json{{"error", "no event stream at this path"}}.dump()});
            return;
        }

        HttpRequest r;
        r.method = std::string(req.method_string());
        r.target = std::string(req.target());
        for (const auto& f : req) {
            std::string name(f.name_string());
            std::transform(name.begin(), name.end(), name.begin(),
                           [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
            r.headers[name] = std::string(f.value());
        }
        r.body = req.body();
        write(req, service_.handle(r));
    }

    void write(const http::request<http::string_body>& req, const HttpResponse& out) {
        auto res = std::make_shared<http::response<http::string_body>>(static_cast<http::status>(out.status),
                                                                       req.version());
        res->set(http::field::server, "hrtrust");
        res->set(http::field::content_type, out.content_type);
        res->keep_alive(req.keep_alive());
        res->body() = out.body;
        res->prepare_payload();
        http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code ec, std::size_t) {
            self->on_write(res->need_eof(), ec);
        });
    }

    void on_write(bool close, beast::error_code ec) {
        if (ec) {
            return;
        }
        if (close) {
            stream_.socket().shutdown(tcp::socket::shutdown_send, ec);
            return;
        }
        do_read();
    }

    beast::tcp_stream stream_;
    beast::flat_buffer buffer_;
    Service& service_;
    std::optional<http::request_parser<http::string_body>> parser_;
};

}  // namespace

struct HttpServer::Impl {
    Impl(Service& s, unsigned n) : service(s), threads(std::max(1U, n)), ioc(static_cast<int>(threads)), acceptor(ioc) {}

    void do_accept() {
        acceptor.async_accept(net::make_strand(ioc), [this](beast::error_code ec, tcp::socket socket) {
            if (!ec) {
                std::make_shared<HttpSession>(std::move(socket), service)->run();
            }
            if (acceptor.is_open()) {
                do_accept();
            }
        });
    }

    Service& service;
    unsigned threads;
    net::io_context ioc;
    tcp::acceptor acceptor;
    std::vector<std::thread> pool;
    bool started = false;
};

HttpServer::HttpServer(Service& service, const std::string& bind, unsigned short port, unsigned threads)
    : impl_(std::make_unique<Impl>(service, threads)) {
    beast::error_code ec;
    const auto address = net::ip::make_address(bind, ec);
    if (ec) {
        throw InvalidInput("invalid bind address '" + bind + "'");
    }
    const tcp::endpoint ep(address, port);
    impl_->acceptor.open(ep.protocol());
    impl_->acceptor.set_option(net::socket_base::reuse_address(true));
    impl_->acceptor.bind(ep, ec);
    if (ec) {
        throw Error("cannot bind " + bind + ":" + std::to_string(port) + ": " + ec.message());
    }
    impl_->acceptor.listen(net::socket_base::max_listen_connections);
}

HttpServer::~HttpServer() { stop(); }

unsigned short HttpServer::port() const { return impl_->acceptor.local_endpoint().port(); }

void HttpServer::start() {
    if (impl_->started) {
        return;
    }
    impl_->started = true;
    impl_->do_accept();
    for (unsigned i = 0; i < impl_->threads; ++i) {
        impl_->pool.emplace_back([this] { impl_->ioc.run(); });
    }
}

void HttpServer::run() {
    net::signal_set signals(impl_->ioc, SIGINT, SIGTERM);
    signals.async_wait([this](beast::error_code, int) { impl_->ioc.stop(); });
    start();
    for (auto& t : impl_->pool) {
        t.join();
    }
    impl_->pool.clear();
}

void HttpServer::stop() {
    impl_->ioc.stop();
    for (auto& t : impl_->pool) {
        if (t.joinable() && t.get_id() != std::this_thread::get_id()) {
            t.join();
        }
    }
    impl_->pool.clear();
}

}  // namespace hrtrust
