#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "bootroute/money.hpp"

namespace bootroute {

enum class CallPurpose {
  boot,
  continuation,
  selection,
  aggregation,
};

const char* to_string(CallPurpose p);
CallPurpose call_purpose_from_string(const std::string& s);

/// One billed model invocation. Unit price is copied from the ModelSpec at
/// call time so the ledger stays meaningful if prices change later.
struct LedgerEntry {
  std::int64_t call_id = 0;
  std::string model_id;
  CallPurpose purpose = CallPurpose::boot;
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;
  bool estimated = false;  // client-side chunk counting, no provider usage record
  Money unit_price;        // per 10^6 tokens

  std::int64_t total_tokens() const { return prompt_tokens + completion_tokens; }
  Money currency() const {
    return Money::cost_for_tokens(total_tokens(), unit_price);
  }
};

/// Append-only record of every call made while routing one query. Totals are
/// always recomputable from the entries; merging ledgers is concatenation.
class CostLedger {
 public:
  std::int64_t append(LedgerEntry entry);  // assigns call_id, returns it

  const std::vector<LedgerEntry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }

  void extend(const CostLedger& other);  // re-ids appended entries

  // Restores a deserialized ledger, keeping recorded call_ids.
  static CostLedger from_entries(std::vector<LedgerEntry> entries);

 private:
  std::vector<LedgerEntry> entries_;
  std::int64_t next_call_id_ = 1;
};

// Sum of prompt + completion tokens over all entries.
std::int64_t total_tokens(const CostLedger& ledger);

// Sum of per-entry token cost at the entry's unit price, exact decimal.
Money total_currency(const CostLedger& ledger);

// Per-purpose completion-token subtotal (boot-vs-generation breakdowns).
std::int64_t completion_tokens_for(const CostLedger& ledger, CallPurpose purpose);
std::int64_t total_tokens_for(const CostLedger& ledger, CallPurpose purpose);

// expected_consistency - lambda * total_cost. lambda must be >= 0.
double objective(double expected_consistency, double total_cost, double lambda);

// Exhaustive argmax of the objective over the shared key set; the smallest k
// attaining the maximum wins ties (cheaper configuration preferred).
int optimal_k(const std::map<int, double>& expected_consistency_by_k,
              const std::map<int, double>& cost_by_k, double lambda);

struct ParetoPoint {
  std::string label;
  double score = 0.0;
  double cost = 0.0;
};

// Points not dominated by any other (dominated: another point has >= score
// and <= cost with at least one strict). Output sorted by cost ascending.
std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points);

void to_json(nlohmann::json& j, const LedgerEntry& e);
void from_json(const nlohmann::json& j, LedgerEntry& e);
void to_json(nlohmann::json& j, const CostLedger& l);
void from_json(const nlohmann::json& j, CostLedger& l);

}  // namespace bootroute
