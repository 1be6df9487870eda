#include "bootroute/selector.hpp"

#include <algorithm>
#include <cctype>

#include "bootroute/prompts.hpp"

namespace bootroute {

namespace {

struct LabelHit {
  std::size_t position;
  std::size_t label_index;  // 1-based LLM<i>
};

// All LLM<digits> tokens in text, case-insensitive, in order of appearance.
std::vector<LabelHit> find_labels(const std::string& text, std::size_t from, std::size_t to) {
  std::vector<LabelHit> hits;
  for (std::size_t i = from; i + 3 < to; ++i) {
    if ((text[i] == 'L' || text[i] == 'l') && (text[i + 1] == 'L' || text[i + 1] == 'l') &&
        (text[i + 2] == 'M' || text[i + 2] == 'm') &&
        std::isdigit(static_cast<unsigned char>(text[i + 3]))) {
      std::size_t digits_end = i + 3;
      std::size_t value = 0;
      while (digits_end < to && std::isdigit(static_cast<unsigned char>(text[digits_end]))) {
        value = value * 10 + (text[digits_end] - '0');
        if (value > 1'000'000) break;
        ++digits_end;
      }
      hits.push_back({i, value});
      i = digits_end - 1;
    }
  }
  return hits;
}

std::string candidate_blocks(const SelectorPromptContext& context) {
  std::string out;
  for (std::size_t i = 0; i < context.candidates.size(); ++i) {
    if (i > 0) out += "\n\n";
    out += context.candidates[i].label + ": " + context.candidates[i].boot_text;
  }
  return out;
}

std::string format_line(std::size_t n) {
  std::string out = "[";
  for (std::size_t i = 1; i <= n; ++i) {
    if (i > 1) out += ", ";
    out += "LLM" + std::to_string(i);
  }
  out += "]";
  return out;
}

constexpr const char* kRetryReminder =
    "Reminder: output only the ranking list in the exact format "
    "[LLM1, LLM2, ...] covering every candidate, with no other text.";

}  // namespace

const SelectorPromptContext::Candidate* SelectorPromptContext::by_label(
    const std::string& label) const {
  for (const auto& c : candidates) {
    if (c.label == label) return &c;
  }
  return nullptr;
}

BuiltSelectorPrompt build_selector_prompt(const Query& query,
                                          const std::vector<BootResponse>& boots,
                                          std::mt19937_64& rng) {
  if (boots.empty()) throw NoCandidatesError();

  // Fisher-Yates over candidate indices; label i+1 names the shuffled slot.
  std::vector<std::size_t> order(boots.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  for (std::size_t i = order.size(); i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }

  BuiltSelectorPrompt built;
  built.context.query_text = query.text;
  for (std::size_t slot = 0; slot < order.size(); ++slot) {
    const BootResponse& boot = boots[order[slot]];
    built.context.candidates.push_back(
        {"LLM" + std::to_string(slot + 1), boot.model_id, boot.text});
  }
  built.prompt = render_template(
      selector_template(),
      {
          {"count", spell_count(static_cast<int>(boots.size()))},
          {"format_line", format_line(boots.size())},
          {"query", query.text},
          {"candidates", candidate_blocks(built.context)},
      });
  return built;
}

std::optional<std::vector<std::string>> parse_ranking(const std::string& selector_reply,
                                                      const SelectorPromptContext& context) {
  const std::size_t n = context.candidates.size();

  // Prefer the first bracketed list that names at least one label.
  std::vector<LabelHit> hits;
  std::size_t search = 0;
  while (true) {
    auto open = selector_reply.find('[', search);
    if (open == std::string::npos) break;
    auto close = selector_reply.find(']', open + 1);
    if (close == std::string::npos) break;
    hits = find_labels(selector_reply, open + 1, close);
    if (!hits.empty()) break;
    search = open + 1;
  }
  if (hits.empty()) hits = find_labels(selector_reply, 0, selector_reply.size());
  if (hits.empty()) return std::nullopt;

  std::vector<std::string> ranking;
  std::vector<bool> seen(n, false);
  for (const auto& hit : hits) {
    if (hit.label_index < 1 || hit.label_index > n) continue;  // label not presented
    if (seen[hit.label_index - 1]) continue;                   // dedupe, first occurrence wins
    seen[hit.label_index - 1] = true;
    ranking.push_back(context.candidates[hit.label_index - 1].model_id);
  }
  if (ranking.empty()) return std::nullopt;
  for (std::size_t i = 0; i < n; ++i) {
    if (!seen[i]) ranking.push_back(context.candidates[i].model_id);
  }
  return ranking;
}

SelectionOutcome select_top_k(const Query& query, const std::vector<BootResponse>& boots,
                              int k, const ModelSpec& selector_model, const ModelClient& client,
                              const std::vector<ModelSpec>& pool, std::mt19937_64& rng,
                              const SelectorOptions& options) {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  std::vector<BootResponse> usable;
  for (const auto& b : boots) {
    if (b.usable()) usable.push_back(b);
  }
  if (usable.empty()) throw NoCandidatesError();

  SelectionOutcome outcome;
  auto built = build_selector_prompt(query, usable, rng);
  outcome.context = built.context;

  std::optional<std::vector<std::string>> ranking;
  std::string last_reply;
  for (int attempt = 0; attempt < 2 && !ranking; ++attempt) {
    std::string prompt = built.prompt;
    if (attempt == 1) prompt += std::string("\n\n") + kRetryReminder;
    ChatRequest request;
    request.model_id = selector_model.model_id;
    request.messages = {{Role::user, prompt}};
    request.temperature = options.temperature;
    request.session_key = query.query_id;
    CompletionResult call =
        client.complete(selector_model, request, options.max_tokens, options.timeout);
    outcome.selector_calls.push_back(call);
    if (call.usable()) {
      last_reply = call.text;
      ranking = parse_ranking(call.text, built.context);
    }
  }

  SelectionResult& result = outcome.result;
  result.selector_raw = last_reply;
  if (ranking) {
    result.ranking = std::move(*ranking);
  } else {
    // Quality signal unavailable: prefer the cheapest continuation set.
    // Stable sort keeps input (pool) order among equal prices.
    result.fallback_used = true;
    auto price_of = [&pool](const std::string& model_id) {
      for (const auto& spec : pool) {
        if (spec.model_id == model_id) return spec.price_per_million_tokens;
      }
      return Money::from_units(1'000'000);  // unknown model sorts last
    };
    std::vector<std::string> order;
    for (const auto& b : usable) order.push_back(b.model_id);
    std::stable_sort(order.begin(), order.end(),
                     [&](const std::string& a, const std::string& b) {
                       return price_of(a) < price_of(b);
                     });
    result.ranking = std::move(order);
  }
  std::size_t width = std::min<std::size_t>(static_cast<std::size_t>(k), usable.size());
  result.selected.assign(result.ranking.begin(), result.ranking.begin() + width);
  return outcome;
}

}  // namespace bootroute
