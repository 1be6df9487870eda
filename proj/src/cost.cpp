#include "bootroute/cost.hpp"

#include <algorithm>
#include <stdexcept>

namespace bootroute {

const char* to_string(CallPurpose p) {
  switch (p) {
    case CallPurpose::boot: return "boot";
    case CallPurpose::continuation: return "continuation";
    case CallPurpose::selection: return "selection";
    case CallPurpose::aggregation: return "aggregation";
  }
  return "boot";
}

CallPurpose call_purpose_from_string(const std::string& s) {
  if (s == "boot") return CallPurpose::boot;
  if (s == "continuation") return CallPurpose::continuation;
  if (s == "selection") return CallPurpose::selection;
  if (s == "aggregation") return CallPurpose::aggregation;
  throw std::invalid_argument("unknown call purpose: " + s);
}

std::int64_t CostLedger::append(LedgerEntry entry) {
  if (entry.prompt_tokens < 0 || entry.completion_tokens < 0) {
    throw std::invalid_argument("ledger entry with negative token count");
  }
  entry.call_id = next_call_id_++;
  entries_.push_back(std::move(entry));
  return entries_.back().call_id;
}

void CostLedger::extend(const CostLedger& other) {
  for (LedgerEntry entry : other.entries()) {
    entry.call_id = next_call_id_++;
    entries_.push_back(std::move(entry));
  }
}

CostLedger CostLedger::from_entries(std::vector<LedgerEntry> entries) {
  CostLedger ledger;
  for (const auto& e : entries) {
    ledger.next_call_id_ = std::max(ledger.next_call_id_, e.call_id + 1);
  }
  ledger.entries_ = std::move(entries);
  return ledger;
}

std::int64_t total_tokens(const CostLedger& ledger) {
  std::int64_t sum = 0;
  for (const auto& e : ledger.entries()) sum += e.total_tokens();
  return sum;
}

Money total_currency(const CostLedger& ledger) {
  Money sum;
  for (const auto& e : ledger.entries()) sum += e.currency();
  return sum;
}

std::int64_t completion_tokens_for(const CostLedger& ledger, CallPurpose purpose) {
  std::int64_t sum = 0;
  for (const auto& e : ledger.entries()) {
    if (e.purpose == purpose) sum += e.completion_tokens;
  }
  return sum;
}

std::int64_t total_tokens_for(const CostLedger& ledger, CallPurpose purpose) {
  std::int64_t sum = 0;
  for (const auto& e : ledger.entries()) {
    if (e.purpose == purpose) sum += e.total_tokens();
  }
  return sum;
}

double objective(double expected_consistency, double total_cost, double lambda) {
  if (lambda < 0) throw std::invalid_argument("lambda must be >= 0");
  return expected_consistency - lambda * total_cost;
}

int optimal_k(const std::map<int, double>& expected_consistency_by_k,
              const std::map<int, double>& cost_by_k, double lambda) {
  if (expected_consistency_by_k.empty()) {
    throw std::invalid_argument("optimal_k: empty consistency map");
  }
  if (expected_consistency_by_k.size() != cost_by_k.size()) {
    throw std::invalid_argument("optimal_k: maps must share the same key set");
  }
  int best_k = 0;
  double best_value = 0.0;
  bool first = true;
  for (const auto& [k, consistency] : expected_consistency_by_k) {
    auto cost_it = cost_by_k.find(k);
    if (cost_it == cost_by_k.end()) {
      throw std::invalid_argument("optimal_k: maps must share the same key set");
    }
    double value = objective(consistency, cost_it->second, lambda);
    // std::map iterates keys ascending, so strict improvement keeps the
    // smallest k among ties.
    if (first || value > best_value) {
      best_k = k;
      best_value = value;
      first = false;
    }
  }
  return best_k;
}

std::vector<ParetoPoint> pareto_frontier(const std::vector<ParetoPoint>& points) {
  auto dominates = [](const ParetoPoint& a, const ParetoPoint& b) {
    return a.score >= b.score && a.cost <= b.cost &&
           (a.score > b.score || a.cost < b.cost);
  };
  std::vector<ParetoPoint> frontier;
  for (const auto& candidate : points) {
    bool dominated = false;
    for (const auto& other : points) {
      if (dominates(other, candidate)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) frontier.push_back(candidate);
  }
  std::stable_sort(frontier.begin(), frontier.end(),
                   [](const ParetoPoint& a, const ParetoPoint& b) {
                     if (a.cost != b.cost) return a.cost < b.cost;
                     return a.score < b.score;
                   });
  return frontier;
}

void to_json(nlohmann::json& j, const LedgerEntry& e) {
  j = nlohmann::json{
      {"call_id", e.call_id},
      {"model_id", e.model_id},
      {"purpose", to_string(e.purpose)},
      {"prompt_tokens", e.prompt_tokens},
      {"completion_tokens", e.completion_tokens},
      {"estimated", e.estimated},
      {"unit_price", e.unit_price.to_string()},
  };
}

void from_json(const nlohmann::json& j, LedgerEntry& e) {
  e.call_id = j.at("call_id").get<std::int64_t>();
  e.model_id = j.at("model_id").get<std::string>();
  e.purpose = call_purpose_from_string(j.at("purpose").get<std::string>());
  e.prompt_tokens = j.at("prompt_tokens").get<std::int64_t>();
  e.completion_tokens = j.at("completion_tokens").get<std::int64_t>();
  e.estimated = j.value("estimated", false);
  e.unit_price = Money::parse(j.at("unit_price").get<std::string>());
}

void to_json(nlohmann::json& j, const CostLedger& l) {
  j = nlohmann::json{
      {"entries", l.entries()},
      {"total_tokens", total_tokens(l)},
      {"total_currency", total_currency(l).to_string()},
  };
}

void from_json(const nlohmann::json& j, CostLedger& l) {
  l = CostLedger::from_entries(j.at("entries").get<std::vector<LedgerEntry>>());
}

}  // namespace bootroute
