#pragma once

#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bootroute/client.hpp"
#include "bootroute/types.hpp"

namespace bootroute {

class NoCandidatesError : public std::runtime_error {
 public:
  NoCandidatesError() : std::runtime_error("no_candidates") {}
};

/**
 * Candidates as presented to the selector model. Labels LLM1..LLMn are
 * assigned in randomized order per call so the selector cannot key on pool
 * position or model identity; the bijection is kept for decoding.
 */
struct SelectorPromptContext {
  struct Candidate {
    std::string label;     // "LLM3"
    std::string model_id;  // label_map entry for this label
    std::string boot_text;
  };
  std::string query_text;
  std::vector<Candidate> candidates;  // label order LLM1..LLMn

  const Candidate* by_label(const std::string& label) const;
};

struct BuiltSelectorPrompt {
  SelectorPromptContext context;
  std::string prompt;
};

// Renders the ranking prompt over the usable boots: instructions, the
// required output-format line, the query, then one "LLM<i>: <boot text>"
// block per candidate. Label assignment is drawn from `rng`.
// Throws NoCandidatesError when boots is empty.
BuiltSelectorPrompt build_selector_prompt(const Query& query,
                                          const std::vector<BootResponse>& boots,
                                          std::mt19937_64& rng);

// Extracts the ranking from an arbitrary selector reply: first bracketed
// list of LLM<digits> labels, else any labels anywhere; deduplicates
// keeping first occurrence; labels the reply omitted are appended in
// context order. Always a full permutation of the presented candidates.
// nullopt when the reply carries no recognizable label at all.
std::optional<std::vector<std::string>> parse_ranking(const std::string& selector_reply,
                                                      const SelectorPromptContext& context);

struct SelectorOptions {
  std::int64_t max_tokens = 512;  // the reply is a bare list; keep it cheap
  Millis timeout{60'000};
  std::optional<double> temperature;
};

struct SelectionOutcome {
  SelectionResult result;
  SelectorPromptContext context;
  std::vector<CompletionResult> selector_calls;  // for the ledger and trace
};

// Ranks usable boots with one selector call; retries once with a stricter
// reminder if the reply does not parse; after that falls back to ranking by
// ascending unit price (ties by input order) with fallback_used set.
// selected = first min(k, usable) of the ranking.
SelectionOutcome select_top_k(const Query& query, const std::vector<BootResponse>& boots,
                              int k, const ModelSpec& selector_model, const ModelClient& client,
                              const std::vector<ModelSpec>& pool, std::mt19937_64& rng,
                              const SelectorOptions& options = {});

}  // namespace bootroute
