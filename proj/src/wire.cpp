#include "cacheleak/wire.hpp"

namespace cacheleak::wire {

using nlohmann::json;

json encode_request(const ChatRequest& r) {
  json msgs = json::array();
  for (const auto& m : r.messages)
    msgs.push_back({{"role", m.role == Role::system ? "system" : "user"}, {"text", m.text}});
  json j = {{"mode", r.mode == RequestMode::direct ? "direct" : "synthesized"},
            {"messages", std::move(msgs)},
            {"max_tokens", r.max_tokens},
            {"temperature", r.temperature},
            {"stream", r.stream}};
  if (!r.cache_store) j["cache_store"] = false;
  return j;
}

ChatRequest decode_request(const json& j) {
  try {
    ChatRequest r;
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "direct")
      r.mode = RequestMode::direct;
    else if (mode == "synthesized")
      r.mode = RequestMode::synthesized;
    else
      throw MalformedRequest("unknown mode '" + mode + "'");
    for (const auto& m : j.at("messages")) {
      const auto role = m.at("role").get<std::string>();
      if (role != "system" && role != "user") throw MalformedRequest("unknown role '" + role + "'");
      r.messages.push_back({role == "system" ? Role::system : Role::user, m.at("text").get<std::string>()});
    }
    r.max_tokens = j.value("max_tokens", 1);
    r.temperature = j.value("temperature", 0.0);
    r.stream = j.value("stream", true);
    r.cache_store = j.value("cache_store", true);
    return r;
  } catch (const json::exception& e) {
    throw MalformedRequest(std::string("bad request: ") + e.what());
  }
}

json encode_event(const StreamEvent& e) {
  if (e.kind == EventKind::eos) return {{"event", "eos"}, {"t_ms", e.emit_time.count()}};
  return {{"event", "token"}, {"text", e.text}, {"t_ms", e.emit_time.count()}};
}

json encode_error(const std::string& message) { return {{"event", "error"}, {"message", message}}; }

StreamEvent decode_event(const json& j) {
  const auto kind = j.at("event").get<std::string>();
  if (kind == "error") throw std::runtime_error(j.value("message", std::string("server error")));
  StreamEvent e;
  e.emit_time = Millis(j.at("t_ms").get<double>());
  if (kind == "token") {
    e.kind = EventKind::token;
    e.text = j.at("text").get<std::string>();
  } else if (kind == "eos") {
    e.kind = EventKind::eos;
  } else {
    throw std::runtime_error("unknown event '" + kind + "'");
  }
  return e;
}

}  // namespace cacheleak::wire
