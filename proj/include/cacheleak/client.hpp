#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "cacheleak/engine.hpp"

namespace cacheleak {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// What an attacker (or victim) sees of the service: submit a request, get the
/// event stream back.
class ServingClient {
 public:
  virtual ~ServingClient() = default;
  virtual std::vector<StreamEvent> send(const ChatRequest& request) = 0;
  std::uint64_t requests_sent() const noexcept { return sent_; }

 protected:
  std::uint64_t sent_ = 0;
};

/// Direct function-call client with its own noise stream.
class InProcessClient : public ServingClient {
 public:
  InProcessClient(Engine& engine, std::uint64_t noise_seed) : engine_(engine), noise_(noise_seed) {}
  std::vector<StreamEvent> send(const ChatRequest& request) override {
    ++sent_;
    return engine_.handle(request, noise_);
  }
  Engine& engine() noexcept { return engine_; }

 private:
  Engine& engine_;
  NoiseSource noise_;
};

}  // namespace cacheleak
