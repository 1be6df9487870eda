#include <doctest.h>

#include <algorithm>
#include <random>

#include "bootroute/cost.hpp"
#include "bootroute/money.hpp"

using namespace bootroute;

TEST_SUITE_BEGIN("cost");

namespace {

LedgerEntry entry(std::int64_t prompt, std::int64_t completion, const std::string& price,
                  CallPurpose purpose = CallPurpose::boot) {
  LedgerEntry e;
  e.model_id = "m";
  e.purpose = purpose;
  e.prompt_tokens = prompt;
  e.completion_tokens = completion;
  e.unit_price = Money::parse(price);
  return e;
}

// Independent brute-force argmax over the objective, coded apart from
// optimal_k: scans keys in descending order and keeps >=, so the smallest
// arg wins ties through a different route.
int brute_force_optimal_k(const std::map<int, double>& consistency,
                          const std::map<int, double>& cost, double lambda) {
  std::vector<int> keys;
  for (const auto& [k, v] : consistency) keys.push_back(k);
  std::sort(keys.rbegin(), keys.rend());
  int best = keys.front();
  double best_value = consistency.at(best) - lambda * cost.at(best);
  for (int k : keys) {
    double value = consistency.at(k) - lambda * cost.at(k);
    if (value >= best_value) {
      best = k;
      best_value = value;
    }
  }
  return best;
}

bool dominates(const ParetoPoint& a, const ParetoPoint& b) {
  return a.score >= b.score && a.cost <= b.cost && (a.score > b.score || a.cost < b.cost);
}

}  // namespace

TEST_CASE("money parses and prints exact decimal amounts") {
  CHECK(Money::parse("1.10").pico() == 1'100'000'000'000LL);
  CHECK(Money::parse("0.0011").pico() == 1'100'000'000LL);
  CHECK(Money::parse("30").pico() == 30'000'000'000'000LL);
  CHECK(Money::parse("1.10").to_string() == "1.100000");
  CHECK_THROWS(Money::parse("1.1234567"));  // beyond micro resolution
  CHECK_THROWS(Money::parse("abc"));
  CHECK(Money::from_double_micro(1.10) == Money::parse("1.10"));
}

TEST_CASE("total_tokens sums prompt and completion") {
  CostLedger ledger;
  for (std::int64_t completion : {200, 200, 450, 300}) {
    ledger.append(entry(50, completion, "1.10"));
  }
  CHECK(total_tokens(ledger) == 1350);

  CostLedger empty;
  CHECK(total_tokens(empty) == 0);

  CostLedger single;
  single.append(entry(10, 90, "1.10"));
  CHECK(total_tokens(single) == 100);
}

TEST_CASE("currency arithmetic is exact decimal") {
  CostLedger ledger;
  ledger.append(entry(0, 1'000'000, "1.10"));
  CHECK(total_currency(ledger) == Money::parse("1.10"));

  CostLedger small;
  small.append(entry(0, 1'000, "1.10"));
  CHECK(total_currency(small) == Money::parse("0.0011"));

  CostLedger mixed;
  mixed.append(entry(0, 500, "0.88"));
  mixed.append(entry(0, 500, "0.80"));
  CHECK(total_currency(mixed) == Money::parse("0.00084"));
}

TEST_CASE("ledger additivity over randomized splits") {
  std::mt19937_64 rng(7);
  const char* prices[] = {"0.88", "1.32", "1.65", "0.80", "1.10"};
  for (int round = 0; round < 200; ++round) {
    std::vector<LedgerEntry> entries;
    int n = 1 + static_cast<int>(rng() % 12);
    for (int i = 0; i < n; ++i) {
      entries.push_back(entry(static_cast<std::int64_t>(rng() % 1000),
                              static_cast<std::int64_t>(rng() % 5000), prices[rng() % 5]));
    }
    std::size_t cut = rng() % (entries.size() + 1);
    CostLedger whole, left, right;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      whole.append(entries[i]);
      (i < cut ? left : right).append(entries[i]);
    }
    CHECK(total_tokens(whole) == total_tokens(left) + total_tokens(right));
    CHECK(total_currency(whole) == total_currency(left) + total_currency(right));

    CostLedger merged;
    merged.extend(left);
    merged.extend(right);
    CHECK(total_currency(merged) == total_currency(whole));
  }
}

TEST_CASE("objective is consistency minus weighted cost") {
  CHECK(objective(0.86, 0.003, 25.0) == doctest::Approx(0.785).epsilon(1e-12));
  CHECK(objective(0.5, 0.02, 25.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(objective(0.77, 123.0, 0.0) == 0.77);
  CHECK_THROWS(objective(0.5, 0.1, -1.0));
}

TEST_CASE("optimal_k worked example picks k=2") {
  std::map<int, double> consistency{{1, 0.80}, {2, 0.86}, {3, 0.88}, {4, 0.885}};
  std::map<int, double> cost{{1, 0.002}, {2, 0.003}, {3, 0.004}, {4, 0.005}};
  CHECK(optimal_k(consistency, cost, 25.0) == 2);
}

TEST_CASE("optimal_k boundary behavior") {
  std::map<int, double> consistency{{1, 0.5}, {2, 0.6}, {3, 0.7}, {4, 0.8}};
  std::map<int, double> cost{{1, 0.01}, {2, 0.02}, {3, 0.03}, {4, 0.04}};
  CHECK(optimal_k(consistency, cost, 0.0) == 4);  // lambda 0 ignores cost

  std::map<int, double> flat{{1, 0.7}, {2, 0.7}, {3, 0.7}};
  std::map<int, double> rising{{1, 0.01}, {2, 0.02}, {3, 0.03}};
  CHECK(optimal_k(flat, rising, 5.0) == 1);  // pure cost minimization

  CHECK_THROWS(optimal_k({}, {}, 1.0));
  CHECK_THROWS(optimal_k(flat, {{1, 0.1}}, 1.0));
}

TEST_CASE("optimal_k matches an independent brute-force evaluator") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int instance = 0; instance < 1000; ++instance) {
    int n = 1 + static_cast<int>(rng() % 8);
    std::map<int, double> consistency, cost;
    for (int k = 1; k <= n; ++k) {
      consistency[k] = unit(rng);
      cost[k] = unit(rng) * 0.01;
    }
    double lambda = unit(rng) * 50.0;
    CHECK(optimal_k(consistency, cost, lambda) ==
          brute_force_optimal_k(consistency, cost, lambda));
  }
}

TEST_CASE("pareto_frontier worked examples") {
  std::vector<ParetoPoint> points{{"A", 9.0, 0.003}, {"B", 9.2, 0.004}, {"C", 8.9, 0.005}};
  auto frontier = pareto_frontier(points);
  REQUIRE(frontier.size() == 2);
  CHECK(frontier[0].label == "A");
  CHECK(frontier[1].label == "B");

  auto single = pareto_frontier({{"only", 1.0, 1.0}});
  REQUIRE(single.size() == 1);
  CHECK(single[0].label == "only");

  auto equal_score = pareto_frontier({{"cheap", 5.0, 1.0}, {"dear", 5.0, 2.0}});
  REQUIRE(equal_score.size() == 1);
  CHECK(equal_score[0].label == "cheap");
}

TEST_CASE("pareto_frontier equals exhaustive dominance on random sets") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int instance = 0; instance < 1000; ++instance) {
    std::vector<ParetoPoint> points;
    int n = 1 + static_cast<int>(rng() % 20);
    for (int i = 0; i < n; ++i) {
      points.push_back({"p" + std::to_string(i), unit(rng), unit(rng)});
    }
    auto frontier = pareto_frontier(points);

    // mutually non-dominated
    for (const auto& a : frontier) {
      for (const auto& b : frontier) {
        CHECK_FALSE(dominates(a, b));
      }
    }
    // excluded points are dominated by someone included
    for (const auto& p : points) {
      bool included = std::any_of(frontier.begin(), frontier.end(),
                                  [&](const ParetoPoint& f) { return f.label == p.label; });
      if (included) continue;
      bool covered = std::any_of(frontier.begin(), frontier.end(),
                                 [&](const ParetoPoint& f) { return dominates(f, p); });
      CHECK(covered);
    }
    // sorted by cost ascending
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      CHECK(frontier[i - 1].cost <= frontier[i].cost);
    }
  }
}

TEST_CASE("ledger json round-trip preserves ids and totals") {
  CostLedger ledger;
  ledger.append(entry(10, 20, "0.88", CallPurpose::boot));
  ledger.append(entry(30, 40, "1.10", CallPurpose::aggregation));
  nlohmann::json j = ledger;
  auto back = j.get<CostLedger>();
  REQUIRE(back.entries().size() == 2);
  CHECK(back.entries()[0].call_id == ledger.entries()[0].call_id);
  CHECK(back.entries()[1].purpose == CallPurpose::aggregation);
  CHECK(total_currency(back) == total_currency(ledger));
}

TEST_SUITE_END();
