#include "cacheleak/socket_transport.hpp"

#include <sys/socket.h>
#include <sys/un.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "cacheleak/wire.hpp"

namespace cacheleak {

namespace {

sockaddr_un make_address(const std::string& path) {
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) throw TransportError("socket path too long: " + path);
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  return addr;
}

[[noreturn]] void fail(const std::string& what) { throw TransportError(what + ": " + std::strerror(errno)); }

bool write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    const ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      return false;
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

std::uint64_t connection_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t x = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

SocketServer::SocketServer(Engine& engine, SocketServerOptions options)
    : engine_(engine), options_(std::move(options)) {}

SocketServer::~SocketServer() { stop(); }

void SocketServer::start() {
  const auto addr = make_address(options_.path);
  listen_fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (listen_fd_ < 0) fail("socket");
  ::unlink(options_.path.c_str());
  if (::bind(listen_fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) fail("bind " + options_.path);
  if (::listen(listen_fd_, 16) < 0) fail("listen");
  running_ = true;
  acceptor_ = std::thread([this] { accept_loop(); });
}

void SocketServer::accept_loop() {
  std::uint64_t index = 0;
  while (running_) {
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) {
      if (errno == EINTR) continue;
      break;
    }
    std::lock_guard lock(workers_mu_);
    if (!running_) {
      ::close(fd);
      break;
    }
    connection_fds_.push_back(fd);
    workers_.emplace_back([this, fd, seed = connection_seed(options_.noise_seed, index++)] {
      serve_connection(fd, seed);
    });
  }
}

void SocketServer::serve_connection(int fd, std::uint64_t seed) {
  NoiseSource noise(seed);
  std::string buffer;
  char chunk[4096];
  while (true) {
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n <= 0) break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      const std::string line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      if (line.empty()) continue;
      const auto received = std::chrono::steady_clock::now();
      std::string out;
      try {
        const auto request = wire::decode_request(nlohmann::json::parse(line));
        const auto events = engine_.handle(request, noise);
        for (const auto& e : events) {
          const std::string record = wire::encode_event(e).dump() + "\n";
          if (options_.realtime) {
            std::this_thread::sleep_until(received + std::chrono::duration_cast<std::chrono::steady_clock::duration>(e.emit_time));
            if (!write_all(fd, record)) return;
          } else {
            out += record;
          }
        }
      } catch (const std::exception& e) {
        out += wire::encode_error(e.what()).dump() + "\n";
      }
      if (!out.empty() && !write_all(fd, out)) return;
    }
  }
}

void SocketServer::wait() {
  if (acceptor_.joinable()) acceptor_.join();
}

void SocketServer::stop() {
  if (!running_.exchange(false)) {
    if (acceptor_.joinable()) acceptor_.join();
    return;
  }
  if (listen_fd_ >= 0) {
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  if (acceptor_.joinable() && acceptor_.get_id() != std::this_thread::get_id()) acceptor_.join();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(workers_mu_);
    for (int fd : connection_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
  for (int fd : connection_fds_) ::close(fd);
  connection_fds_.clear();
  ::unlink(options_.path.c_str());
}

SocketClient::SocketClient(const std::string& path) {
  const auto addr = make_address(path);
  fd_ = ::socket(AF_UNIX, SOCK_STREAM, 0);
  if (fd_ < 0) fail("socket");
  if (::connect(fd_, reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0) {
    const int saved = errno;
    ::close(fd_);
    fd_ = -1;
    errno = saved;
    fail("connect " + path);
  }
}

SocketClient::~SocketClient() {
  if (fd_ >= 0) ::close(fd_);
}

std::string SocketClient::read_line() {
  std::size_t nl;
  char chunk[4096];
  while ((nl = buffer_.find('\n')) == std::string::npos) {
    const ssize_t n = ::recv(fd_, chunk, sizeof(chunk), 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw TransportError("connection closed by server");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
  std::string line = buffer_.substr(0, nl);
  buffer_.erase(0, nl + 1);
  return line;
}

std::vector<StreamEvent> SocketClient::send(const ChatRequest& request) {
  ++sent_;
  if (!write_all(fd_, wire::encode_request(request).dump() + "\n")) fail("send");
  std::vector<StreamEvent> events;
  while (true) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(read_line());
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("bad event: ") + e.what());
    }
    try {
      events.push_back(wire::decode_event(j));
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("bad event: ") + e.what());
    } catch (const std::runtime_error& e) {
      throw TransportError(e.what());
    }
    if (events.back().kind == EventKind::eos) return events;
  }
}

}  // namespace cacheleak
