#include "bootroute/chat.hpp"

#include <cctype>

namespace bootroute {

const char* to_string(Role r) {
  switch (r) {
    case Role::system: return "system";
    case Role::user: return "user";
    case Role::assistant: return "assistant";
  }
  return "user";
}

std::int64_t count_tokens(const std::string& text) {
  std::int64_t count = 0;
  bool in_field = false;
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      in_field = false;
    } else if (!in_field) {
      in_field = true;
      ++count;
    }
  }
  if (count == 0 && !text.empty()) count = 1;
  return count;
}

std::int64_t estimate_prompt_tokens(const std::vector<ChatMessage>& messages) {
  std::int64_t total = 0;
  for (const auto& m : messages) total += count_tokens(m.content);
  return total;
}

}  // namespace bootroute
