#include "server.hpp"

#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>

#include <boost/asio/steady_timer.hpp>
#include <boost/asio/strand.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>
#include <spdlog/spdlog.h>

#include <trustnav/protocol.hpp>

namespace trustnav::server {

namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace websocket = beast::websocket;
using tcp = asio::ip::tcp;
namespace fs = std::filesystem;

class WsConnection;

class HostedSession : public std::enable_shared_from_this<HostedSession> {
 public:
  HostedSession(Server& server, std::string id, std::uint64_t seed)
      : server_(server),
        id_(std::move(id)),
        tick_timer_(server.context()),
        grace_timer_(server.context()),
        origin_(std::chrono::steady_clock::now()) {
    const auto& opts = server.options();
    fs::create_directories(opts.log_dir);
    const auto path = fs::path(opts.log_dir) / (id_ + ".jsonl");
    log_.open(path, std::ios::binary | std::ios::trunc);
    if (!log_) throw std::runtime_error("cannot open log '" + path.string() + "'");
    sink_ = std::make_unique<StreamEventSink>(log_);
    auto plan = build_session_plan(server.library(), opts.condition, seed, id_, opts.session);
    protocol_ = std::make_unique<ProtocolSession>(server.library(), std::move(plan), opts.session,
                                                  *sink_, opts.instrument);
  }

  const std::string& id() const noexcept { return id_; }

  void attach(const std::shared_ptr<WsConnection>& conn);
  void on_message(std::string_view text);
  // Only the currently attached connection can detach the session.
  void detach(const WsConnection* conn);

 private:
  std::int64_t now_ms() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 origin_)
        .count();
  }
  void send(const ProtocolSession::Messages& messages);
  void schedule_tick();
  void expire();

  Server& server_;
  std::string id_;
  std::ofstream log_;
  std::unique_ptr<StreamEventSink> sink_;
  std::unique_ptr<ProtocolSession> protocol_;
  asio::steady_timer tick_timer_;
  asio::steady_timer grace_timer_;
  std::chrono::steady_clock::time_point origin_;
  std::weak_ptr<WsConnection> conn_;
  bool started_ = false;
};

class WsConnection : public std::enable_shared_from_this<WsConnection> {
 public:
  explicit WsConnection(tcp::socket&& socket) : ws_(std::move(socket)) {}

  void run(http::request<http::string_body> req, std::shared_ptr<HostedSession> session) {
    session_ = std::move(session);
    ws_.set_option(websocket::stream_base::timeout::suggested(beast::role_type::server));
    ws_.async_accept(req, [self = shared_from_this()](beast::error_code ec) {
      if (ec) {
        spdlog::warn("websocket handshake failed: {}", ec.message());
        self->session_->detach(self.get());
        return;
      }
      self->session_->attach(self);
      self->read();
    });
  }

  void send(std::string text) {
    if (closed_) return;
    queue_.push_back(std::move(text));
    if (queue_.size() == 1) write_next();
  }

 private:
  void read() {
    ws_.async_read(buffer_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (ec) {
        self->closed_ = true;
        self->session_->detach(self.get());
        return;
      }
      const std::string text = beast::buffers_to_string(self->buffer_.data());
      self->buffer_.consume(self->buffer_.size());
      self->session_->on_message(text);
      self->read();
    });
  }

  void write_next() {
    ws_.text(true);
    ws_.async_write(asio::buffer(queue_.front()),
                    [self = shared_from_this()](beast::error_code ec, std::size_t) {
                      if (ec) {
                        self->closed_ = true;
                        self->queue_.clear();
                        return;
                      }
                      self->queue_.pop_front();
                      if (!self->queue_.empty()) self->write_next();
                    });
  }

  websocket::stream<beast::tcp_stream> ws_;
  beast::flat_buffer buffer_;
  std::deque<std::string> queue_;
  std::shared_ptr<HostedSession> session_;
  bool closed_ = false;
};

void HostedSession::attach(const std::shared_ptr<WsConnection>& conn) {
  grace_timer_.cancel();
  conn_ = conn;
  if (!started_) {
    started_ = true;
    spdlog::info("session {} started", id_);
    send(protocol_->start(now_ms()));
  } else {
    spdlog::info("session {} resumed", id_);
    send(protocol_->resume());
  }
  schedule_tick();
}

void HostedSession::on_message(std::string_view text) { send(protocol_->handle_text(text, now_ms())); }

void HostedSession::send(const ProtocolSession::Messages& messages) {
  auto conn = conn_.lock();
  if (!conn) return;
  for (const auto& m : messages) conn->send(m.dump());
}

void HostedSession::schedule_tick() {
  tick_timer_.expires_after(std::chrono::milliseconds(server_.options().session.cadence_ms));
  tick_timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (ec || self->conn_.expired() || self->protocol_->complete()) return;
    if (self->protocol_->autonomy_active()) self->send(self->protocol_->tick(self->now_ms()));
    self->schedule_tick();
  });
}

void HostedSession::detach(const WsConnection* conn) {
  if (!started_) {
    server_.release(id_);
    return;
  }
  if (conn_.lock().get() != conn) return;
  conn_.reset();
  tick_timer_.cancel();
  if (protocol_->complete()) {
    spdlog::info("session {} closed", id_);
    server_.release(id_);
    return;
  }
  spdlog::info("session {} disconnected; grace {} ms", id_, server_.options().grace.count());
  grace_timer_.expires_after(server_.options().grace);
  grace_timer_.async_wait([self = shared_from_this()](beast::error_code ec) {
    if (!ec) self->expire();
  });
}

void HostedSession::expire() {
  if (!conn_.expired()) return;
  protocol_->disconnect(now_ms());
  log_.flush();
  spdlog::info("session {} abandoned; running task aborted", id_);
  server_.release(id_);
}

namespace {

std::string_view mime_type(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".html" || ext == ".htm") return "text/html";
  if (ext == ".js" || ext == ".mjs") return "application/javascript";
  if (ext == ".css") return "text/css";
  if (ext == ".json") return "application/json";
  if (ext == ".svg") return "image/svg+xml";
  if (ext == ".png") return "image/png";
  if (ext == ".ico") return "image/x-icon";
  return "application/octet-stream";
}

std::string query_param(std::string_view target, std::string_view key) {
  const auto q = target.find('?');
  if (q == std::string_view::npos) return {};
  std::string_view query = target.substr(q + 1);
  while (!query.empty()) {
    const std::size_t amp = std::min(query.find('&'), query.size());
    const std::string_view pair(query.data(), amp);
    const std::size_t eq = pair.find('=');
    if (eq != std::string_view::npos && pair.substr(0, eq) == key) return std::string(pair.substr(eq + 1));
    query.remove_prefix(std::min(amp + 1, query.size()));
  }
  return {};
}

class HttpConnection : public std::enable_shared_from_this<HttpConnection> {
 public:
  HttpConnection(tcp::socket&& socket, Server& server) : stream_(std::move(socket)), server_(server) {}

  void run() {
    stream_.expires_after(std::chrono::seconds(30));
    http::async_read(stream_, buffer_, req_, [self = shared_from_this()](beast::error_code ec, std::size_t) {
      if (!ec) self->dispatch();
    });
  }

 private:
  void dispatch() {
    const std::string target(req_.target());
    const std::string path = target.substr(0, target.find('?'));
    if (websocket::is_upgrade(req_)) {
      if (path != "/ws") return respond(http::status::not_found, "text/plain", "unknown endpoint\n");
      std::shared_ptr<HostedSession> session;
      if (const auto id = query_param(target, "session"); !id.empty()) {
        session = server_.find_session(id);
        if (!session) return respond(http::status::not_found, "text/plain", "no such session\n");
      } else {
        try {
          session = server_.open_session();
        } catch (const std::exception& e) {
          spdlog::error("cannot open session: {}", e.what());
          return respond(http::status::internal_server_error, "text/plain", "cannot open session\n");
        }
      }
      stream_.expires_never();
      std::make_shared<WsConnection>(stream_.release_socket())->run(std::move(req_), std::move(session));
      return;
    }
    if (req_.method() != http::verb::get && req_.method() != http::verb::head) {
      return respond(http::status::method_not_allowed, "text/plain", "GET only\n");
    }
    if (path == "/survey.json") {
      return respond(http::status::ok, "application/json", server_.options().instrument.to_json().dump());
    }
    serve_file(path);
  }

  void serve_file(const std::string& path) {
    const auto& root = server_.options().static_dir;
    if (root.empty() || path.find("..") != std::string::npos) {
      return respond(http::status::not_found, "text/plain", "not found\n");
    }
    fs::path file = fs::path(root) / fs::path(path == "/" ? "index.html" : path.substr(1));
    if (fs::is_directory(file)) file /= "index.html";
    std::ifstream in(file, std::ios::binary);
    if (!in) return respond(http::status::not_found, "text/plain", "not found\n");
    std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    respond(http::status::ok, mime_type(file), std::move(body));
  }

  void respond(http::status status, std::string_view type, std::string body) {
    auto res = std::make_shared<http::response<http::string_body>>(status, req_.version());
    res->set(http::field::content_type, beast::string_view(type.data(), type.size()));
    res->keep_alive(false);
    if (req_.method() != http::verb::head) res->body() = std::move(body);
    res->prepare_payload();
    http::async_write(stream_, *res, [self = shared_from_this(), res](beast::error_code, std::size_t) {
      beast::error_code ignored;
      self->stream_.socket().shutdown(tcp::socket::shutdown_send, ignored);
    });
  }

  beast::tcp_stream stream_;
  Server& server_;
  beast::flat_buffer buffer_;
  http::request<http::string_body> req_;
};

}  // namespace

Server::Server(asio::io_context& ioc, const TaskLibrary& library, ServerOptions options)
    : ioc_(ioc), library_(library), options_(std::move(options)), acceptor_(ioc) {}

Server::~Server() = default;

void Server::start() {
  const tcp::endpoint endpoint(asio::ip::make_address(options_.address), options_.port);
  acceptor_.open(endpoint.protocol());
  acceptor_.set_option(asio::socket_base::reuse_address(true));
  acceptor_.bind(endpoint);
  acceptor_.listen();
  bound_port_ = acceptor_.local_endpoint().port();
  spdlog::info("listening on {}:{}", options_.address, bound_port_);
  accept();
}

void Server::stop() {
  beast::error_code ignored;
  acceptor_.close(ignored);
}

void Server::accept() {
  acceptor_.async_accept(ioc_, [this](beast::error_code ec, tcp::socket socket) {
    if (ec) {
      if (ec != asio::error::operation_aborted) spdlog::warn("accept failed: {}", ec.message());
      if (!acceptor_.is_open()) return;
    } else {
      std::make_shared<HttpConnection>(std::move(socket), *this)->run();
    }
    accept();
  });
}

std::shared_ptr<HostedSession> Server::open_session() {
  const std::uint64_t n = next_session_++;
  char id[32];
  std::snprintf(id, sizeof id, "live-%05llu", static_cast<unsigned long long>(n));
  auto session = std::make_shared<HostedSession>(*this, id, derive_seed(options_.seed, n));
  sessions_.emplace(id, session);
  return session;
}

std::shared_ptr<HostedSession> Server::find_session(const std::string& id) {
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

void Server::release(const std::string& id) { sessions_.erase(id); }

}  // namespace trustnav::server
