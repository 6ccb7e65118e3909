#pragma once

#include <atomic>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <httplib.h>
#include <json.hpp>

namespace amg::testing {

// Loopback chat-completions server. The handler decides status and
// assistant text per request; every request body is recorded.
class VlmStub {
 public:
  struct Reply {
    int status = 200;
    std::string content;
    std::string raw_body;  // used verbatim when non-empty
  };
  using Handler = std::function<Reply(int request_index)>;

  explicit VlmStub(Handler handler) : handler_(std::move(handler)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      int index = 0;
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
        index = static_cast<int>(bodies_.size()) - 1;
      }
      const Reply r = handler_(index);
      res.status = r.status;
      if (!r.raw_body.empty()) {
        res.set_content(r.raw_body, "application/json");
        return;
      }
      nlohmann::json j = {{"id", "stub"},
                          {"object", "chat.completion"},
                          {"choices", {{{"index", 0},
                                        {"message", {{"role", "assistant"}, {"content", r.content}}},
                                        {"finish_reason", "stop"}}}}};
      res.set_content(j.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }

  ~VlmStub() {
    server_.stop();
    if (thread_.joinable()) thread_.join();
  }

  VlmStub(const VlmStub&) = delete;
  VlmStub& operator=(const VlmStub&) = delete;

  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1/chat/completions"; }
  int port() const { return port_; }

  std::vector<std::string> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<std::string> auth_headers() const {
    std::lock_guard lock(mutex_);
    return auth_;
  }
  std::size_t requests() const {
    std::lock_guard lock(mutex_);
    return bodies_.size();
  }

 private:
  Handler handler_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

// A loopback port with nothing listening, for connection-failure tests.
// A loopback port that refuses connections: bound to learn a free number,
// then closed without listening.
inline int closed_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr);
  socklen_t len = sizeof addr;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  ::close(fd);
  return ntohs(addr.sin_port);
}

}  // namespace amg::testing
