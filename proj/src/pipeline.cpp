#include "bootroute/pipeline.hpp"

#include <algorithm>
#include <thread>

#include "bootroute/aggregator.hpp"
#include "bootroute/selector.hpp"

namespace bootroute {

namespace {

constexpr const char* kRefineInstruction =
    "Refine and improve your answer to the query above, taking the intermediate "
    "answer into account. Provide your complete final answer.";

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

const ModelSpec& resolve_or_throw(const RouterConfig& config, const std::string& model_id) {
  const ModelSpec* spec = config.find_model(model_id);
  if (spec == nullptr) throw ConfigError("no model entry for '" + model_id + "'");
  return *spec;
}

// Full generations for the given specs, concurrently, one result per spec.
std::vector<FullResponse> generate_concurrently(const ModelClient& client,
                                                const std::vector<ModelSpec>& specs,
                                                const std::vector<ChatMessage>& messages,
                                                const RouterConfig& config,
                                                const std::string& session_key) {
  std::vector<FullResponse> out(specs.size());
  std::vector<std::thread> workers;
  workers.reserve(specs.size());
  for (std::size_t i = 0; i < specs.size(); ++i) {
    workers.emplace_back([&, i] {
      ChatRequest request;
      request.model_id = specs[i].model_id;
      request.messages = messages;
      request.temperature = config.temperature;
      request.session_key = session_key;
      out[i] = client.complete_full(specs[i], request, config.max_final_tokens,
                                    config.request_timeout);
    });
  }
  for (auto& w : workers) w.join();
  return out;
}

// Orders usable responses by the selection ranking; ranked ids missing a
// usable response are skipped.
std::vector<FullResponse> in_ranking_order(const std::vector<FullResponse>& responses,
                                           const std::vector<std::string>& ranking) {
  std::vector<FullResponse> ordered;
  for (const auto& model_id : ranking) {
    for (const auto& r : responses) {
      if (r.model_id == model_id && r.usable()) {
        ordered.push_back(r);
        break;
      }
    }
  }
  return ordered;
}

}  // namespace

std::uint64_t derive_query_seed(const RouterConfig& config, const Query& query) {
  return splitmix64(config.seed.value_or(0) ^ fnv1a(query.query_id));
}

RouterConfig apply_overrides(const RouterConfig& config, const RouteOverrides& overrides) {
  RouterConfig effective = config;
  if (overrides.k) effective.k = *overrides.k;
  if (overrides.layers) effective.layers = *overrides.layers;
  if (overrides.boot_budget) effective.boot_budget = *overrides.boot_budget;
  if (effective.k < 1) throw ConfigError("override k: k must be >= 1");
  if (effective.k > static_cast<int>(effective.pool.size())) {
    throw ConfigError("override k: k exceeds pool size");
  }
  if (effective.layers < 1) throw ConfigError("override layers must be >= 1");
  if (effective.boot_budget < 1) throw ConfigError("override boot_budget must be >= 1");
  return effective;
}

RoutingTrace route_with_overrides(const Query& query, const RouterConfig& config,
                                  const ModelClient& client, const RouteOverrides& overrides) {
  return route(query, apply_overrides(config, overrides), client);
}

RoutingTrace route(const Query& query, const RouterConfig& config, const ModelClient& client) {
  if (query.text.empty()) throw std::invalid_argument("query text must be non-empty");
  const ModelSpec& selector_spec = resolve_or_throw(config, config.selector_model);
  const ModelSpec& aggregator_spec = resolve_or_throw(config, config.aggregator_model);

  RoutingTrace trace;
  trace.query = query;
  trace.config_snapshot = serialize_config(config);
  trace.seed = derive_query_seed(config, query);
  std::mt19937_64 rng(trace.seed);

  EligibleSet eligible = eligible_models(query, config.pool);
  trace.capability_fallback = eligible.used_fallback;

  SelectorOptions selector_options;
  selector_options.timeout = config.request_timeout;

  // Layer 1: probe everyone, keep the promising few.
  LayerRecord layer1;
  layer1.layer_index = 1;
  std::vector<BootResponse> boots;
  try {
    boots = client.dispatch_boot(query, eligible.models, config.boot_budget,
                                 config.request_timeout, config.temperature);
  } catch (const AllCandidatesFailed& e) {
    for (std::size_t i = 0; i < e.responses().size(); ++i) {
      trace.record_call(layer1, CallPurpose::boot,
                        eligible.models[i].price_per_million_tokens, e.responses()[i]);
      trace.disqualified.push_back(e.responses()[i].model_id);
    }
    trace.layers.push_back(std::move(layer1));
    trace.error = "all_candidates_failed";
    throw RouteError("all_candidates_failed", std::move(trace));
  }
  for (std::size_t i = 0; i < boots.size(); ++i) {
    trace.record_call(layer1, CallPurpose::boot, eligible.models[i].price_per_million_tokens,
                      boots[i]);
    if (!boots[i].usable()) trace.disqualified.push_back(boots[i].model_id);
  }

  std::vector<std::string> active_set;  // layer-1 selected ids, the generating set
  std::string previous_aggregate;

  for (int layer_index = 1; layer_index <= config.layers; ++layer_index) {
    LayerRecord layer;
    LayerRecord* record = layer_index == 1 ? &layer1 : &layer;
    record->layer_index = layer_index;

    // Fresh generations for this layer.
    std::vector<FullResponse> generations;
    if (layer_index == 1) {
      SelectionOutcome selection = select_top_k(query, boots, config.k, selector_spec, client,
                                                eligible.models, rng, selector_options);
      for (const auto& call : selection.selector_calls) {
        trace.record_call(*record, CallPurpose::selection,
                          selector_spec.price_per_million_tokens, call);
      }
      record->selection = selection.result;
      active_set = selection.result.selected;

      std::vector<ModelSpec> specs;
      for (const auto& id : active_set) specs.push_back(resolve_or_throw(config, id));
      generations = generate_concurrently(client, specs, {{Role::user, query.text}}, config,
                                          query.query_id);
      for (std::size_t i = 0; i < generations.size(); ++i) {
        trace.record_call(*record, CallPurpose::continuation,
                          specs[i].price_per_million_tokens, generations[i]);
      }
    } else {
      std::vector<ModelSpec> specs;
      for (const auto& id : active_set) specs.push_back(resolve_or_throw(config, id));
      std::vector<ChatMessage> messages = {
          {Role::user, query.text},
          {Role::assistant, previous_aggregate},
          {Role::user, kRefineInstruction},
      };
      generations = generate_concurrently(client, specs, messages, config, query.query_id);
      for (std::size_t i = 0; i < generations.size(); ++i) {
        trace.record_call(*record, CallPurpose::continuation,
                          specs[i].price_per_million_tokens, generations[i]);
      }
      // Re-rank the fresh continuations; the generating set is unchanged.
      std::vector<FullResponse> usable;
      for (const auto& g : generations) {
        if (g.usable()) usable.push_back(g);
      }
      if (!usable.empty()) {
        SelectionOutcome selection = select_top_k(query, usable, config.k, selector_spec,
                                                  client, eligible.models, rng, selector_options);
        for (const auto& call : selection.selector_calls) {
          trace.record_call(*record, CallPurpose::selection,
                            selector_spec.price_per_million_tokens, call);
        }
        record->selection = selection.result;
      }
    }

    std::vector<FullResponse> ranked = in_ranking_order(generations, record->selection.ranking);
    if (ranked.empty()) {
      trace.error = "all_candidates_failed";
      trace.layers.push_back(std::move(*record));
      throw RouteError("all_candidates_failed", std::move(trace));
    }

    AggregateInput input;
    input.query_text = query.text;
    input.layer_index = layer_index;
    input.session_key = query.query_id;
    for (const auto& r : ranked) input.answers.push_back({r.model_id, r.text});
    AggregateOutcome merged = aggregate(input, aggregator_spec, client, config.max_final_tokens,
                                        config.request_timeout);
    for (const auto& call : merged.aggregator_calls) {
      trace.record_call(*record, CallPurpose::aggregation,
                        aggregator_spec.price_per_million_tokens, call);
    }
    record->aggregate_text = merged.text;
    record->aggregate_tokens = merged.tokens;
    record->aggregator_degraded = merged.degraded;
    previous_aggregate = merged.text;

    trace.layers.push_back(std::move(*record));
  }

  trace.final_text = previous_aggregate;
  return trace;
}

}  // namespace bootroute
