#pragma once

#include <optional>
#include <stdexcept>

#include "bootroute/client.hpp"
#include "bootroute/config.hpp"
#include "bootroute/trace.hpp"

namespace bootroute {

/// Routing aborted; the trace collected so far rides along for audit.
class RouteError : public std::runtime_error {
 public:
  RouteError(const std::string& code, RoutingTrace partial)
      : std::runtime_error(code), partial_(std::move(partial)) {}
  const RoutingTrace& partial_trace() const { return partial_; }

 private:
  RoutingTrace partial_;
};

struct RouteOverrides {
  std::optional<int> k;
  std::optional<int> layers;
  std::optional<int> boot_budget;
};

/**
 * Runs the full l-layer route for one query:
 *
 *   layer 1:   boot-probe every eligible model at the boot budget, rank the
 *              usable probes with the selector, generate full answers from
 *              the top-k, merge them with the aggregator;
 *   layers 2+: the selected set refines against the previous layer's
 *              aggregate, the selector re-ranks the fresh continuations
 *              (aggregation emphasis only; the set is not re-drawn), and the
 *              aggregator merges again.
 *
 * The final answer is the last layer's aggregate. Every model call lands in
 * the trace and the ledger, 1:1. Selector and aggregator degradations are
 * recorded, not fatal; only a layer with zero usable candidates aborts
 * (RouteError "all_candidates_failed").
 *
 * Decision logic is single-threaded per query; model calls fan out
 * concurrently within a layer. Safe to run for many queries concurrently
 * over the shared config and client.
 */
RoutingTrace route(const Query& query, const RouterConfig& config, const ModelClient& client);

// route() with per-call substitution of k / layers / boot_budget; invalid
// overrides throw ConfigError before any model is called.
RoutingTrace route_with_overrides(const Query& query, const RouterConfig& config,
                                  const ModelClient& client, const RouteOverrides& overrides);

// The substituted config, revalidated. Throws ConfigError on invalid values.
RouterConfig apply_overrides(const RouterConfig& config, const RouteOverrides& overrides);

// Label-randomization seed for one query: config seed mixed with query_id.
std::uint64_t derive_query_seed(const RouterConfig& config, const Query& query);

}  // namespace bootroute
