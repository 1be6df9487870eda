#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace bootroute {

enum class Role { system, user, assistant };

const char* to_string(Role r);

struct ChatMessage {
  Role role = Role::user;
  std::string content;
};

/// Wire-level chat-completions request. `session_key` scopes mock replay
/// state to one routed query so concurrent pipelines stay deterministic; it
/// never goes on the wire.
struct ChatRequest {
  std::string model_id;
  std::vector<ChatMessage> messages;
  std::int64_t max_tokens = 0;  // 0 = omit from the wire request
  bool stream = false;
  std::optional<double> temperature;
  std::string session_key;
};

/// Events a transport feeds to the stream accumulator. A sink returning
/// false aborts the upstream connection.
struct StreamEvent {
  enum class Kind { content, usage, done, error };
  Kind kind = Kind::content;
  std::string text;                  // content delta
  std::int64_t prompt_tokens = 0;    // usage
  std::int64_t completion_tokens = 0;
  std::string finish_reason;         // done
  std::string detail;                // error
};

using EventSink = std::function<bool(const StreamEvent&)>;

// Whitespace-delimited token estimate used when a provider reports no usage:
// one count per field, at least 1 for any non-empty text. Chunk-granular
// budgeting and billing both use this rule.
std::int64_t count_tokens(const std::string& text);

// Estimate for the prompt side of a request (sum over message contents).
std::int64_t estimate_prompt_tokens(const std::vector<ChatMessage>& messages);

}  // namespace bootroute
