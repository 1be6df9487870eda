#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bootroute/chat.hpp"
#include "bootroute/mock.hpp"
#include "bootroute/types.hpp"

namespace bootroute {

/// Every probe failed; carries the per-model responses for the trace.
class AllCandidatesFailed : public std::runtime_error {
 public:
  explicit AllCandidatesFailed(std::vector<BootResponse> responses)
      : std::runtime_error("all_candidates_failed"), responses_(std::move(responses)) {}
  const std::vector<BootResponse>& responses() const { return responses_; }

 private:
  std::vector<BootResponse> responses_;
};

struct ClientOptions {
  // Extra attempts after a transport error (not after a timeout). The
  // selector and aggregator own their single prompt-level retry, so this
  // stays 0 unless an endpoint is known-flaky.
  int transport_retries = 0;
  std::shared_ptr<MockBackend> mocks;  // serves mock:// endpoints
};

/**
 * Streaming client for OpenAI-compatible chat-completions endpoints.
 *
 * Counts completion tokens per server-sent chunk and aborts the upstream
 * connection on the first chunk that reaches the token budget, so an
 * endpoint scripted for thousands of tokens bills only the probe prefix.
 * Endpoints with the mock:// scheme are served by the scripted backend.
 *
 * Shareable across concurrent pipelines; each call is independent and
 * cancellation of one stream never affects another. Per-call failures come
 * back as responses with termination error/timeout, never as exceptions.
 */
class ModelClient {
 public:
  explicit ModelClient(ClientOptions options = {});

  // Streams until the budget is reached, the stream ends, or the timeout
  // expires. Token counts come from the provider usage record when the
  // stream carries one, otherwise from chunk counting (estimated_usage).
  CompletionResult stream_completion(const ModelSpec& model, const ChatRequest& request,
                                     std::int64_t token_budget, Millis timeout) const;

  // Non-streaming call (selector/aggregator): the full reply is needed, so
  // cancellation buys nothing.
  CompletionResult complete(const ModelSpec& model, const ChatRequest& request,
                            std::int64_t max_tokens, Millis timeout) const;

  // Probes every model concurrently with the boot budget; returns one
  // response per model, input order, once all complete or time out. Throws
  // AllCandidatesFailed only if no model produced a usable response.
  std::vector<BootResponse> dispatch_boot(const Query& query, const std::vector<ModelSpec>& models,
                                          std::int64_t boot_budget, Millis timeout,
                                          std::optional<double> temperature = {}) const;

  // Full generation for a selected candidate, capped at max_final_tokens.
  FullResponse complete_full(const ModelSpec& model, const ChatRequest& request,
                             std::int64_t max_final_tokens, Millis timeout) const;

  MockBackend* mocks() const { return options_.mocks.get(); }

 private:
  CompletionResult run_stream_once(const ModelSpec& model, const ChatRequest& request,
                                   std::int64_t token_budget, Millis timeout) const;
  CompletionResult run_complete_once(const ModelSpec& model, const ChatRequest& request,
                                     std::int64_t max_tokens, Millis timeout) const;

  ClientOptions options_;
};

}  // namespace bootroute
