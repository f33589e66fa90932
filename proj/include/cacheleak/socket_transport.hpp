#pragma once

#include <atomic>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "cacheleak/client.hpp"
#include "cacheleak/engine.hpp"

namespace cacheleak {

struct SocketServerOptions {
  std::string path;
  /// Sleep until each event's virtual emit time before writing it.
  bool realtime = false;
  std::uint64_t noise_seed = 0x5eed;
};

/// NDJSON server on a Unix stream socket. One thread per connection; every
/// connection gets its own noise stream seeded from (noise_seed, accept order).
class SocketServer {
 public:
  SocketServer(Engine& engine, SocketServerOptions options);
  ~SocketServer();
  SocketServer(const SocketServer&) = delete;
  SocketServer& operator=(const SocketServer&) = delete;

  /// Binds and starts accepting. Throws TransportError on socket failures.
  void start();
  /// Blocks until stop() is called from another thread or a signal handler.
  void wait();
  void stop();

 private:
  void accept_loop();
  void serve_connection(int fd, std::uint64_t seed);

  Engine& engine_;
  SocketServerOptions options_;
  int listen_fd_ = -1;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex workers_mu_;
  std::vector<std::thread> workers_;
  std::vector<int> connection_fds_;
};

class SocketClient : public ServingClient {
 public:
  /// Throws TransportError when the server is unreachable.
  explicit SocketClient(const std::string& path);
  ~SocketClient() override;
  SocketClient(const SocketClient&) = delete;
  SocketClient& operator=(const SocketClient&) = delete;

  std::vector<StreamEvent> send(const ChatRequest& request) override;

 private:
  std::string read_line();

  int fd_ = -1;
  std::string buffer_;
};

}  // namespace cacheleak
