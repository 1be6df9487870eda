#pragma once

#include <string>
#include <vector>

#include "bootroute/client.hpp"
#include "bootroute/types.hpp"

namespace bootroute {

struct AggregateInput {
  struct Answer {
    std::string source_label;  // informational; the prompt uses positional labels
    std::string text;
  };
  std::string query_text;
  std::vector<Answer> answers;  // ranked best-first by the selector
  int layer_index = 1;
  std::string session_key;
};

// Renders the synthesis prompt: one "LLM<i>'s answer: <text>" block per
// input answer in order, then the query.
std::string build_aggregate_prompt(const AggregateInput& input);

struct AggregateOutcome {
  std::string text;
  std::int64_t tokens = 0;  // completion tokens of the merge call
  bool degraded = false;    // aggregator failed; best-ranked input returned
  std::vector<CompletionResult> aggregator_calls;  // for the ledger and trace
};

// One non-streamed call to the aggregator model, retried once on failure.
// If both attempts fail the highest-ranked input answer is returned verbatim
// with degraded set: the pipeline always produces an answer while at least
// one candidate answered.
AggregateOutcome aggregate(const AggregateInput& input, const ModelSpec& aggregator_model,
                           const ModelClient& client, std::int64_t max_tokens, Millis timeout);

}  // namespace bootroute
