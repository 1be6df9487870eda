#include "bootroute/aggregator.hpp"

#include <stdexcept>

#include "bootroute/prompts.hpp"

namespace bootroute {

std::string build_aggregate_prompt(const AggregateInput& input) {
  if (input.answers.empty()) {
    throw std::invalid_argument("aggregate over empty answer list");
  }
  std::string blocks;
  for (std::size_t i = 0; i < input.answers.size(); ++i) {
    if (i > 0) blocks += "\n\n";
    blocks += "LLM" + std::to_string(i + 1) + "'s answer: " + input.answers[i].text;
  }
  return render_template(aggregator_template(), {
                                                    {"answers", blocks},
                                                    {"query", input.query_text},
                                                });
}

AggregateOutcome aggregate(const AggregateInput& input, const ModelSpec& aggregator_model,
                           const ModelClient& client, std::int64_t max_tokens, Millis timeout) {
  std::string prompt = build_aggregate_prompt(input);
  AggregateOutcome outcome;
  for (int attempt = 0; attempt < 2; ++attempt) {
    ChatRequest request;
    request.model_id = aggregator_model.model_id;
    request.messages = {{Role::user, prompt}};
    request.session_key = input.session_key;
    CompletionResult call = client.complete(aggregator_model, request, max_tokens, timeout);
    outcome.aggregator_calls.push_back(call);
    if (call.usable()) {
      outcome.text = call.text;
      outcome.tokens = call.completion_tokens;
      return outcome;
    }
  }
  // Both attempts failed: anchor on the best-ranked candidate answer.
  outcome.degraded = true;
  outcome.text = input.answers.front().text;
  outcome.tokens = 0;
  return outcome;
}

}  // namespace bootroute
