#include "cacheleak/engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cacheleak {

namespace {

const std::vector<std::string>& babble_lexicon() {
  static const std::vector<std::string> kWords = {
      "sure",    "here",     "is",     "a",      "plan",     "that",    "covers",  "the",     "main",
      "points",  "first",    "then",   "next",   "finally",  "we",      "will",    "review",  "each",
      "step",    "carefully", "and",   "note",   "details",  "overall", "this",    "should",  "help",
      "you",     "get",      "started", "today", "quickly",  "with",    "clear",   "goals",   "summary"};
  return kWords;
}

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t hash_text(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix(h);
}

const std::string& user_text_of(const ChatRequest& r) {
  for (auto it = r.messages.rbegin(); it != r.messages.rend(); ++it)
    if (it->role == Role::user) return it->text;
  return r.messages.back().text;
}

}  // namespace

ChatRequest ChatRequest::direct(std::string text, int max_tokens) {
  ChatRequest r;
  r.mode = RequestMode::direct;
  r.messages.push_back({Role::user, std::move(text)});
  r.max_tokens = max_tokens;
  return r;
}

ChatRequest ChatRequest::synthesized(std::string system_text, std::string user_text, int max_tokens) {
  ChatRequest r;
  r.mode = RequestMode::synthesized;
  r.messages.push_back({Role::system, std::move(system_text)});
  r.messages.push_back({Role::user, std::move(user_text)});
  r.max_tokens = max_tokens;
  return r;
}

std::string synthesize_prompt(const PromptTemplate& tmpl, std::string_view system_text, std::string_view user_text) {
  std::string out;
  out.reserve(tmpl.system_prefix.size() + system_text.size() + tmpl.separator.size() + tmpl.user_prefix.size() +
              user_text.size());
  out += tmpl.system_prefix;
  out += system_text;
  out += tmpl.separator;
  out += tmpl.user_prefix;
  out += user_text;
  return out;
}

Millis time_to_first_token(const std::vector<StreamEvent>& events) {
  for (const auto& e : events)
    if (e.kind == EventKind::token) return e.emit_time;
  throw std::runtime_error("response carried no token event");
}

Engine::Engine(EngineConfig config)
    : config_(std::move(config)),
      kv_(config_.kv),
      semantic_(config_.semantic),
      anonymizer_(config_.name_gazetteer) {
  config_.latency.validate();
  if (config_.response_tokens == 0) throw std::invalid_argument("engine: response_tokens must be positive");
}

void Engine::validate(const ChatRequest& r) const {
  if (r.max_tokens < 1) throw MalformedRequest("max_tokens must be >= 1");
  if (!(r.temperature >= 0.0)) throw MalformedRequest("temperature must be >= 0");
  if (r.mode == RequestMode::direct) {
    if (r.messages.size() != 1) throw MalformedRequest("direct requests carry exactly one text");
  } else {
    if (std::none_of(r.messages.begin(), r.messages.end(), [](const Message& m) { return m.role == Role::user; }))
      throw MalformedRequest("synthesized requests need at least one user message");
  }
}

std::string Engine::render_unlocked(const ChatRequest& r, const std::string* user_override) const {
  if (r.mode == RequestMode::direct) return user_override ? *user_override : r.messages.front().text;
  const auto& t = config_.prompt_template;
  std::string system_text;
  std::string user_text;
  const std::string& last_user = user_text_of(r);
  for (const auto& m : r.messages) {
    if (m.role == Role::system) {
      if (!system_text.empty()) system_text += ' ';
      system_text += m.text;
    } else {
      const std::string& text = (user_override && &m.text == &last_user) ? *user_override : m.text;
      if (!user_text.empty()) user_text += t.separator;
      user_text += text;
    }
  }
  return synthesize_prompt(t, system_text, user_text);
}

std::string Engine::render(const ChatRequest& r) const {
  validate(r);
  if (!config_.anonymize) return render_unlocked(r, nullptr);
  auto anon = anonymizer_.anonymize(user_text_of(r)).text;
  return render_unlocked(r, &anon);
}

std::string Engine::babble(std::string_view key_text, const std::string& prompt, double temperature) const {
  const auto& lex = babble_lexicon();
  const auto quantized = static_cast<std::uint64_t>(std::llround(temperature * 100.0));
  std::uint64_t h = mix(hash_text(prompt) ^ mix(quantized));
  std::string out;
  std::size_t emitted = 0;
  // Echo a few request words so anonymiser identifiers round-trip through
  // cached responses.
  for (auto w : split_words(key_text)) {
    if (emitted >= std::min<std::size_t>(4, config_.response_tokens)) break;
    if (emitted) out += ' ';
    out += w;
    ++emitted;
  }
  for (std::size_t i = emitted; i < config_.response_tokens; ++i) {
    h = mix(h + i);
    if (!out.empty()) out += ' ';
    out += lex[h % lex.size()];
  }
  return out;
}

std::vector<StreamEvent> Engine::handle(const ChatRequest& request, NoiseSource& noise, RequestOutcome* outcome) {
  std::lock_guard lock(mu_);
  if (shutting_down_) throw EngineShuttingDown();
  validate(request);

  const auto& p = config_.latency;
  RequestOutcome local;
  std::string key_text = user_text_of(request);
  RestoreMap restore_map;
  if (config_.anonymize) {
    auto anon = anonymizer_.anonymize(key_text);
    key_text = std::move(anon.text);
    restore_map = std::move(anon.map);
  }

  Millis ttft{0.0};
  std::string response;
  bool semantic_hit = false;
  Embedding key_embedding;
  if (config_.semantic_enabled) {
    key_embedding = embed(key_text, config_.semantic.embedding);
    if (auto hit = semantic_.lookup(key_embedding)) {
      semantic_hit = true;
      response = hit->response_text;
      ttft = semantic_ttft(p, true, noise);
    }
  }

  if (!semantic_hit) {
    const std::string prompt = render_unlocked(request, config_.anonymize ? &key_text : nullptr);
    const TokenSeq ids = encode_interning(prompt, vocab_);
    local.prompt_tokens = ids.size();
    if (config_.kv_enabled) {
      local.hit_tokens = kv_.match_prefix(ids).shared_len;
      const std::size_t keep = std::min(ids.size(), kv_.capacity_tokens());
      kv_.insert(std::span<const TokenId>(ids).first(keep));
    }
    local.miss_tokens = ids.size() - local.hit_tokens;
    // With a semantic front end the miss path is a full backend LLM call.
    ttft = config_.semantic_enabled ? semantic_ttft(p, false, noise)
                                    : prefill_ttft(p, local.hit_tokens, local.miss_tokens, noise);
    response = babble(key_text, prompt, request.temperature);
    if (config_.semantic_enabled && request.cache_store) semantic_.insert(key_text, response);
  }
  local.semantic_hit = semantic_hit;

  if (config_.anonymize) response = Anonymizer::restore(response, restore_map).text;

  std::vector<StreamEvent> events;
  const auto words = split_words(response);
  const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(request.max_tokens), words.size());
  Millis t = ttft;
  for (std::size_t i = 0; i < n; ++i) {
    events.push_back({EventKind::token, std::string(words[i]), t});
    t += p.t_decode_per_token;
  }
  events.push_back({EventKind::eos, {}, t});
  if (outcome) *outcome = local;
  return events;
}

std::vector<std::vector<StreamEvent>> Engine::handle_batch(const std::vector<ChatRequest>& batch,
                                                           NoiseSource& noise) {
  std::vector<std::size_t> order(batch.size());
  std::iota(order.begin(), order.end(), 0);
  ReorderHook hook;
  {
    std::lock_guard lock(mu_);
    hook = reorder_;
  }
  if (hook) hook(order, batch, *this);
  std::vector<std::vector<StreamEvent>> out(batch.size());
  for (auto i : order) out[i] = handle(batch[i], noise);
  return out;
}

void Engine::set_reorder_hook(ReorderHook hook) {
  std::lock_guard lock(mu_);
  reorder_ = std::move(hook);
}

void Engine::admin_flush(FlushTarget which) {
  std::lock_guard lock(mu_);
  if (which == FlushTarget::kv || which == FlushTarget::both) kv_.flush();
  if (which == FlushTarget::semantic || which == FlushTarget::both) semantic_.flush();
}

void Engine::shutdown() {
  std::lock_guard lock(mu_);
  shutting_down_ = true;
}

std::size_t Engine::peek_shared_prefix(std::string_view text) const {
  std::lock_guard lock(mu_);
  TokenSeq ids;
  for (auto w : split_words(text)) {
    auto id = vocab_.find(w);
    if (!id) break;  // an unseen word cannot be cached
    ids.push_back(*id);
  }
  return kv_.peek_prefix(ids);
}

PrefixCacheStats Engine::kv_stats() const {
  std::lock_guard lock(mu_);
  return kv_.stats();
}

std::size_t Engine::semantic_entries() const {
  std::lock_guard lock(mu_);
  return semantic_.size();
}

nlohmann::json Engine::dump_kv() const {
  std::lock_guard lock(mu_);
  return kv_.dump();
}

nlohmann::json Engine::dump_semantic() const {
  std::lock_guard lock(mu_);
  return semantic_.dump();
}

Engine::ReorderHook prioritize_shared_prefix(std::size_t k) {
  return [k](std::vector<std::size_t>& order, const std::vector<ChatRequest>& batch, const Engine& engine) {
    std::stable_partition(order.begin(), order.end(), [&](std::size_t i) {
      return engine.peek_shared_prefix(engine.render(batch[i])) >= k;
    });
  };
}

}  // namespace cacheleak
