#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "cacheleak/engine.hpp"

namespace cacheleak::wire {

nlohmann::json encode_request(const ChatRequest& request);
/// Throws MalformedRequest on missing or mistyped fields.
ChatRequest decode_request(const nlohmann::json& j);

nlohmann::json encode_event(const StreamEvent& event);
nlohmann::json encode_error(const std::string& message);
/// Throws std::runtime_error carrying the server message for error events.
StreamEvent decode_event(const nlohmann::json& j);

}  // namespace cacheleak::wire
