#pragma once

#include <functional>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cacheleak/anonymizer.hpp"
#include "cacheleak/latency.hpp"
#include "cacheleak/prefix_cache.hpp"
#include "cacheleak/semantic_cache.hpp"
#include "cacheleak/tokenizer.hpp"

namespace cacheleak {

class MalformedRequest : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class EngineShuttingDown : public std::runtime_error {
 public:
  EngineShuttingDown() : std::runtime_error("engine is shutting down") {}
};

enum class RequestMode { direct, synthesized };
enum class Role { system, user };

struct Message {
  Role role = Role::user;
  std::string text;
};

struct ChatRequest {
  RequestMode mode = RequestMode::direct;
  std::vector<Message> messages;
  int max_tokens = 1;
  double temperature = 0.0;
  bool stream = true;
  /// When false the request is served but nothing is written to the semantic
  /// cache (read-only probing).
  bool cache_store = true;

  static ChatRequest direct(std::string text, int max_tokens = 1);
  static ChatRequest synthesized(std::string system_text, std::string user_text, int max_tokens = 1);
};

/// Role template used to flatten synthesized requests into one prompt.
struct PromptTemplate {
  std::string system_prefix = "<|system|> ";
  std::string separator = " <|end|> ";
  std::string user_prefix = "<|user|> ";
};

/// system_prefix + system_text + separator + user_prefix + user_text.
std::string synthesize_prompt(const PromptTemplate& tmpl, std::string_view system_text, std::string_view user_text);

enum class EventKind { token, eos };

struct StreamEvent {
  EventKind kind = EventKind::token;
  std::string text;
  Millis emit_time{0.0};  // since request receipt, virtual
};

/// Emit time of the first token event. Throws std::runtime_error if none.
Millis time_to_first_token(const std::vector<StreamEvent>& events);

enum class FlushTarget { kv, semantic, both };

struct EngineConfig {
  LatencyParams latency;
  bool kv_enabled = true;
  PrefixCacheConfig kv;
  bool semantic_enabled = false;
  SemanticCacheConfig semantic;
  bool anonymize = false;
  std::vector<std::string> name_gazetteer;
  PromptTemplate prompt_template;
  std::size_t response_tokens = 8;
};

/// Where a request was served from; for tests and reports, never sent to clients.
struct RequestOutcome {
  bool semantic_hit = false;
  std::size_t hit_tokens = 0;
  std::size_t miss_tokens = 0;
  std::size_t prompt_tokens = 0;
};

/// Mock LLM service. Semantic cache (optional) sits in front of the prefix
/// cache; the prefix cache drives prefill latency; responses come from a
/// deterministic babbler so content never depends on cache state.
/// All cache access is serialised by one mutex.
class Engine {
 public:
  explicit Engine(EngineConfig config);

  /// Throws MalformedRequest or EngineShuttingDown.
  std::vector<StreamEvent> handle(const ChatRequest& request, NoiseSource& noise,
                                  RequestOutcome* outcome = nullptr);

  using ReorderHook = std::function<void(std::vector<std::size_t>& order, const std::vector<ChatRequest>& batch,
                                         const Engine& engine)>;
  /// Serves a batch in the order chosen by the reorder hook (FIFO when none is
  /// set). Results are returned in submission order.
  std::vector<std::vector<StreamEvent>> handle_batch(const std::vector<ChatRequest>& batch, NoiseSource& noise);
  void set_reorder_hook(ReorderHook hook);

  void admin_flush(FlushTarget which);
  void shutdown();

  /// Full prompt text the model would see (after anonymisation, if enabled).
  std::string render(const ChatRequest& request) const;
  /// Cached prefix length for `text`, without touching LRU state.
  std::size_t peek_shared_prefix(std::string_view text) const;
  PrefixCacheStats kv_stats() const;
  std::size_t semantic_entries() const;
  nlohmann::json dump_kv() const;
  nlohmann::json dump_semantic() const;
  const EngineConfig& config() const noexcept { return config_; }

 private:
  void validate(const ChatRequest& request) const;
  std::string render_unlocked(const ChatRequest& request, const std::string* user_override) const;
  std::string babble(std::string_view key_text, const std::string& prompt, double temperature) const;

  EngineConfig config_;
  mutable std::mutex mu_;
  mutable Vocab vocab_;
  PrefixCache kv_;
  SemanticCache semantic_;
  Anonymizer anonymizer_;
  ReorderHook reorder_;
  bool shutting_down_ = false;
};

/// Reorder hook that serves requests sharing at least `k` cached prefix
/// tokens first, keeping FIFO order inside each group.
Engine::ReorderHook prioritize_shared_prefix(std::size_t k);

}  // namespace cacheleak
