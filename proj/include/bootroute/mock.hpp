#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/chat.hpp"

namespace bootroute {

/**
 * Scripted stand-in for a chat-completions endpoint, selected per model via
 * the reserved endpoint scheme `mock://<script-name>`. The whole pipeline
 * runs against it in CI with zero network access.
 *
 * Script file format (JSON):
 *
 *   {
 *     "version": 1,
 *     "scripts": {
 *       "<script-name>": { "replies": [ <reply>, ... ] }
 *     }
 *   }
 *
 * reply fields:
 *   chunks          array of strings streamed in order (required)
 *   delay_ms        sleep before the first chunk (default 0)
 *   chunk_delay_ms  sleep before every chunk (default 0)
 *   error_at        1-based chunk index at which the stream errors; chunks
 *                   1..error_at-1 are delivered first (optional)
 *   error_detail    message attached to the injected error (optional)
 *   finish_reason   reported at end of stream (default "stop")
 *   report_usage    emit a provider usage record at end of stream
 *                   (default true)
 *   when_contains   reply is eligible only when this substring occurs in
 *                   the request messages (optional)
 *
 * Reply selection: when_contains replies matching the request shadow the
 * unconditional ones; within the eligible set, replies are taken in script
 * order, one per call, keyed by (session_key, script); once exhausted the
 * last eligible reply repeats. Replay is deterministic per session
 * regardless of how concurrent sessions interleave.
 *
 * Streaming calls deliberately ignore request max_tokens so the client's
 * budget cancellation is exercised; non-streaming calls truncate at
 * max_tokens with finish_reason "length", like a real server.
 */
class MockBackend {
 public:
  struct Reply {
    std::vector<std::string> chunks;
    int delay_ms = 0;
    int chunk_delay_ms = 0;
    std::optional<std::size_t> error_at;  // 1-based
    std::string error_detail;
    std::string finish_reason = "stop";
    bool report_usage = true;
    std::string when_contains;
  };

  void load(const nlohmann::json& doc);
  void load_file(const std::string& path);

  bool has_script(const std::string& name) const;
  std::size_t script_count() const { return scripts_.size(); }

  // Streams the selected reply's chunks to `sink` until the sink aborts,
  // the deadline passes, or the reply ends.
  void stream(const std::string& script, const ChatRequest& request,
              std::chrono::steady_clock::time_point deadline, const EventSink& sink);

  void reset_sessions();  // clears replay counters and captures (tests)

  // Request capture for assertions on what a model was shown. Off by
  // default; captured requests accumulate until reset_sessions().
  void set_capture(bool on);
  std::vector<ChatRequest> captured(const std::string& script) const;

 private:
  const Reply& pick_reply(const std::string& script, const ChatRequest& request);

  std::map<std::string, std::vector<Reply>> scripts_;
  std::map<std::string, std::size_t> call_counts_;  // (session \x1f script) -> calls
  std::map<std::string, std::vector<ChatRequest>> captured_;
  bool capture_ = false;
  mutable std::mutex mutex_;
};

}  // namespace bootroute
