#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include <boost/asio/io_context.hpp>
#include <boost/asio/ip/tcp.hpp>

#include <trustnav/session.hpp>

namespace trustnav::server {

struct ServerOptions {
  std::string address = "0.0.0.0";
  unsigned short port = 8080;  // 0 picks a free port
  std::string static_dir;      // console assets; empty serves none
  std::string log_dir = "logs";
  StudyCondition condition;
  SessionOptions session;
  SurveyInstrument instrument = SurveyInstrument::placeholder();
  std::uint64_t seed = 0;
  std::chrono::milliseconds grace{60'000};
};

class HostedSession;

// WebSocket endpoint /ws hosts one session per connection; /ws?session=<id>
// reattaches to a session still inside its disconnect grace period. Other
// GET paths serve files from static_dir, plus /survey.json. Everything runs
// on the io_context it was given, which must be driven by a single thread.
class Server {
 public:
  Server(boost::asio::io_context& ioc, const TaskLibrary& library, ServerOptions options);
  ~Server();

  // Binds and starts accepting. Throws boost::system::system_error when the
  // port is unavailable.
  void start();
  void stop();
  unsigned short port() const noexcept { return bound_port_; }

  // Internal; used by connections.
  std::shared_ptr<HostedSession> open_session();
  std::shared_ptr<HostedSession> find_session(const std::string& id);
  void release(const std::string& id);
  const TaskLibrary& library() const noexcept { return library_; }
  const ServerOptions& options() const noexcept { return options_; }
  boost::asio::io_context& context() noexcept { return ioc_; }

 private:
  void accept();

  boost::asio::io_context& ioc_;
  const TaskLibrary& library_;
  ServerOptions options_;
  boost::asio::ip::tcp::acceptor acceptor_;
  unsigned short bound_port_ = 0;
  std::uint64_t next_session_ = 0;
  std::map<std::string, std::shared_ptr<HostedSession>> sessions_;
};

}  // namespace trustnav::server
