#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <boost/asio/connect.hpp>
#include <boost/beast/core.hpp>
#include <boost/beast/http.hpp>
#include <boost/beast/websocket.hpp>

#include <server.hpp>
#include <trustnav/event_log.hpp>

using namespace trustnav;
namespace asio = boost::asio;
namespace beast = boost::beast;
namespace http = beast::http;
namespace fs = std::filesystem;
using asio::ip::tcp;
using nlohmann::json;

namespace {

const TaskLibrary& corridors() {
  static const TaskLibrary lib = [] {
    std::vector<GridConfig> c;
    for (int i = 0; i < 8; ++i) c.push_back(parse_grid("S...G\n.....", "c" + std::to_string(i)));
    return TaskLibrary::build(c);
  }();
  return lib;
}

class LiveServer {
 public:
  explicit LiveServer(server::ServerOptions opts) : server_(ioc_, corridors(), std::move(opts)) {
    server_.start();
    thread_ = std::thread([this] { ioc_.run(); });
  }
  ~LiveServer() {
    asio::post(ioc_, [this] { server_.stop(); });
    ioc_.stop();
    thread_.join();
  }
  unsigned short port() const { return server_.port(); }

 private:
  asio::io_context ioc_;
  server::Server server_;
  std::thread thread_;
};

class WsClient {
 public:
  WsClient(unsigned short port, const std::string& target) : ws_(ioc_) {
    tcp::resolver resolver(ioc_);
    asio::connect(ws_.next_layer(), resolver.resolve("127.0.0.1", std::to_string(port)));
    ws_.handshake("127.0.0.1", target);
  }
  void send(const json& m) { ws_.write(asio::buffer(m.dump())); }
  json read() {
    beast::flat_buffer buf;
    ws_.read(buf);
    return json::parse(beast::buffers_to_string(buf.data()));
  }
  json read_until(std::string_view type) {
    for (;;) {
      auto m = read();
      if (m["type"] == type) return m;
    }
  }
  void close() { ws_.close(beast::websocket::close_code::normal); }

 private:
  asio::io_context ioc_;
  beast::websocket::stream<tcp::socket> ws_;
};

http::response<http::string_body> get(unsigned short port, const std::string& target) {
  asio::io_context ioc;
  tcp::socket sock(ioc);
  tcp::resolver resolver(ioc);
  asio::connect(sock, resolver.resolve("127.0.0.1", std::to_string(port)));
  http::request<http::empty_body> req{http::verb::get, target, 11};
  req.set(http::field::host, "127.0.0.1");
  http::write(sock, req);
  beast::flat_buffer buf;
  http::response<http::string_body> res;
  http::read(sock, buf, res);
  return res;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / ("trustnav-srv-" + std::to_string(::getpid()) + "-" +
                                                std::to_string(counter()++))) {
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  static int& counter() {
    static int n = 0;
    return n;
  }
};

server::ServerOptions options(const TempDir& dir) {
  server::ServerOptions o;
  o.address = "127.0.0.1";
  o.port = 0;
  o.log_dir = (dir.path / "logs").string();
  o.static_dir = (dir.path / "www").string();
  o.session.cadence_ms = 20;
  o.grace = std::chrono::milliseconds(150);
  fs::create_directories(o.static_dir);
  std::ofstream(dir.path / "www" / "index.html") << "<html>console</html>";
  return o;
}

std::vector<Event> read_log(const fs::path& file) {
  std::ifstream in(file);
  return read_event_log(in).events;
}

}  // namespace

TEST(Server, ScriptedTaskOverWebSocket) {
  TempDir dir;
  LiveServer srv(options(dir));
  WsClient c(srv.port(), "/ws");
  auto s = c.read();
  ASSERT_EQ(s["type"], "state_update");
  EXPECT_EQ(s["mode"], "manual");
  const std::string id = s["session"];
  for (int i = 0; i < 4; ++i) c.send({{"type", "move"}, {"direction", "right"}});
  const auto end = c.read_until("task_end");
  EXPECT_EQ(end["outcome"], "success");
  EXPECT_DOUBLE_EQ(end["score"].get<double>(), 4.6);
  const auto next = c.read();
  EXPECT_EQ(next["type"], "state_update");
  EXPECT_EQ(next["task"], 1);
  c.close();
  std::this_thread::sleep_for(std::chrono::milliseconds(400));
  const auto events = read_log(dir.path / "logs" / (id + ".jsonl"));
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.front().type, EventType::TaskStart);
}

TEST(Server, MoveRejectedInAutomatic) {
  TempDir dir;
  auto opts = options(dir);
  opts.session.cadence_ms = 60'000;  // keep the robot still
  LiveServer srv(opts);
  WsClient c(srv.port(), "/ws");
  c.read();
  c.send({{"type", "set_mode"}, {"mode", "automatic"}});
  EXPECT_EQ(c.read()["mode"], "automatic");
  c.send({{"type", "move"}, {"direction", "right"}});
  const auto err = c.read();
  EXPECT_EQ(err["type"], "error");
  EXPECT_EQ(err["request"], "move");
  c.close();
}

TEST(Server, AutomaticModeTicks) {
  TempDir dir;
  LiveServer srv(options(dir));
  WsClient c(srv.port(), "/ws");
  c.read();
  c.send({{"type", "set_mode"}, {"mode", "automatic"}});
  const auto end = c.read_until("task_end");
  EXPECT_EQ(end["outcome"], "success");
  EXPECT_DOUBLE_EQ(end["score"].get<double>(), 5.0);
  c.close();
}

TEST(Server, DisconnectPastGraceAbortsTask) {
  TempDir dir;
  LiveServer srv(options(dir));
  std::string id;
  {
    WsClient c(srv.port(), "/ws");
    id = c.read()["session"];
    c.send({{"type", "move"}, {"direction", "right"}});
    c.read();
    c.close();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(600));
  const auto events = read_log(dir.path / "logs" / (id + ".jsonl"));
  ASSERT_FALSE(events.empty());
  EXPECT_EQ(events.back().type, EventType::TaskEnd);
  EXPECT_EQ(events.back().payload["outcome"], "abort");
  EXPECT_EQ(get(srv.port(), "/ws?session=" + id).result(), http::status::not_found);
}

TEST(Server, ReconnectWithinGraceResumes) {
  TempDir dir;
  auto opts = options(dir);
  opts.grace = std::chrono::milliseconds(5'000);
  LiveServer srv(opts);
  std::string id;
  {
    WsClient c(srv.port(), "/ws");
    id = c.read()["session"];
    c.send({{"type", "move"}, {"direction", "down"}});
    EXPECT_EQ(c.read()["pose"], json::parse("[0,1]"));
    c.close();
  }
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  WsClient again(srv.port(), "/ws?session=" + id);
  const auto s = again.read();
  EXPECT_EQ(s["type"], "state_update");
  EXPECT_EQ(s["session"], id);
  EXPECT_EQ(s["pose"], json::parse("[0,1]"));
  EXPECT_DOUBLE_EQ(s["score"].get<double>(), 4.9);
  again.close();
}

TEST(Server, StaticFilesAndSurvey) {
  TempDir dir;
  LiveServer srv(options(dir));
  auto res = get(srv.port(), "/");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(res.body(), "<html>console</html>");
  EXPECT_EQ(res[http::field::content_type], "text/html");
  EXPECT_EQ(get(srv.port(), "/missing.js").result(), http::status::not_found);
  EXPECT_EQ(get(srv.port(), "/../secret").result(), http::status::not_found);
  res = get(srv.port(), "/survey.json");
  EXPECT_EQ(res.result(), http::status::ok);
  EXPECT_EQ(json::parse(res.body())["items"].size(), 8u);
  EXPECT_EQ(get(srv.port(), "/ws?session=live-99999").result(), http::status::not_found);
}
