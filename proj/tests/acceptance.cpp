// Acceptance suite: one self-contained check per release criterion, one
// pass/fail line each, non-zero exit on any failure. Oracles here are
// independent of the library paths they check (closed forms, brute-force
// evaluators, scripted mocks).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "bootroute/cost.hpp"
#include "bootroute/harness.hpp"
#include "bootroute/pipeline.hpp"
#include "bootroute/selector.hpp"
#include "bootroute/sim.hpp"
#include "helpers.hpp"

using namespace bootroute;
using nlohmann::json;

namespace {

int g_failures = 0;

void report(int number, const std::string& label, bool ok, const std::string& detail) {
  std::printf("[%s] C%-2d %-28s %s\n", ok ? "PASS" : "FAIL", number, label.c_str(),
              detail.c_str());
  if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), pattern, a, b, c);
  return buf;
}

// --- C1: merged variance tracks sigma^2/k ---------------------------------

void criterion_variance_law() {
  auto start = std::chrono::steady_clock::now();
  sim::ConsistencyModel model;
  model.family = sim::ConsistencyModel::Family::bernoulli_mixture;  // exact moments, no clip
  model.mu = 0.8;
  model.sigma2 = 0.04;
  model.seed = 20'250'101;
  bool ok = true;
  double worst = 0.0;
  for (int k : {1, 2, 4, 8}) {
    auto stats = sim::simulate_merge_variance(model, k, 100'000);
    double expected = model.sigma2 / k;
    double rel = std::abs(stats.empirical_variance - expected) / expected;
    worst = std::max(worst, rel);
    ok = ok && rel < 0.10 && !stats.clip_warning;
  }
  double elapsed = seconds_since(start);
  ok = ok && elapsed < 10.0;
  report(1, "variance law sigma^2/k", ok,
         fmt("worst relative error %.4f over k in {1,2,4,8}, %.2fs", worst, elapsed));
}

// --- C2: mean-merge equality, best-of under max ---------------------------

void criterion_mean_bound() {
  std::mt19937_64 rng(2025);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool ok = true;
  double worst = 0.0;
  for (int round = 0; round < 10'000; ++round) {
    int k = 1 + static_cast<int>(rng() % 10);
    std::vector<double> scores;
    double sum = 0.0;
    for (int i = 0; i < k; ++i) {
      scores.push_back(unit(rng));
      sum += scores.back();
    }
    double mean = sum / k;
    double merged = sim::merge_scores(sim::MergePolicy{}, scores);
    worst = std::max(worst, std::abs(merged - mean));
    ok = ok && std::abs(merged - mean) <= 1e-12;
    ok = ok && sim::check_mean_bound(scores, merged);

    sim::MergePolicy best{sim::MergePolicy::Kind::best_of, {}};
    double top = sim::merge_scores(best, scores);
    ok = ok && top <= *std::max_element(scores.begin(), scores.end());
  }
  report(2, "mean bound under merging", ok,
         fmt("max |mean-merge - mean| = %.2e over 10^4 sets; best-of <= max", worst));
}

// --- C3: cumulative error -------------------------------------------------

void criterion_cumulative_error() {
  double value = sim::cumulative_error(std::vector<double>{0.9, 0.9});
  bool exact = std::abs(value - 0.19) <= 1e-15;

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool monotone = true;
  for (int round = 0; round < 10'000; ++round) {
    int m = 1 + static_cast<int>(rng() % 8);
    std::vector<double> steps;
    for (int i = 0; i < m; ++i) steps.push_back(unit(rng));
    double before = sim::cumulative_error(steps);
    steps.push_back(unit(rng));
    monotone = monotone && sim::cumulative_error(steps) >= before - 1e-15;
  }
  report(3, "cumulative error", exact && monotone,
         fmt("1 - 0.9*0.9 = %.17f (|diff| <= 1e-15); monotone on 10^4 extensions", value));
}

// --- C4: optimal k --------------------------------------------------------

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

void criterion_optimal_k() {
  std::map<int, double> consistency{{1, 0.80}, {2, 0.86}, {3, 0.88}, {4, 0.885}};
  std::map<int, double> cost{{1, 0.002}, {2, 0.003}, {3, 0.004}, {4, 0.005}};
  bool worked = optimal_k(consistency, cost, 25.0) == 2;

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool property = true;
  for (int instance = 0; instance < 1000; ++instance) {
    int n = 1 + static_cast<int>(rng() % 9);
    std::map<int, double> e, c;
    for (int k = 1; k <= n; ++k) {
      e[k] = unit(rng);
      c[k] = unit(rng) * 0.02;
    }
    double lambda = unit(rng) * 40.0;
    property = property && optimal_k(e, c, lambda) == brute_force_optimal_k(e, c, lambda);
  }
  report(4, "optimal-k search", worked && property,
         "worked example k*=2; equals brute force on 10^3 random instances");
}

// --- C5: exact currency ---------------------------------------------------

void criterion_currency() {
  LedgerEntry entry;
  entry.model_id = "deepseek-v3";
  entry.purpose = CallPurpose::continuation;
  entry.unit_price = Money::parse("1.10");

  CostLedger million;
  entry.completion_tokens = 1'000'000;
  million.append(entry);
  bool exact_million = total_currency(million) == Money::parse("1.10");

  CostLedger thousand;
  entry.completion_tokens = 1'000;
  thousand.append(entry);
  bool exact_thousand = total_currency(thousand) == Money::parse("0.0011");

  std::mt19937_64 rng(5);
  const char* prices[] = {"0.88", "1.32", "1.65", "0.80", "1.10", "2.20", "4.40", "30"};
  bool additive = true;
  for (int round = 0; round < 500; ++round) {
    CostLedger whole, left, right;
    int n = 1 + static_cast<int>(rng() % 10);
    std::size_t cut = rng() % (static_cast<std::size_t>(n) + 1);
    for (int i = 0; i < n; ++i) {
      LedgerEntry e;
      e.model_id = "m";
      e.prompt_tokens = static_cast<std::int64_t>(rng() % 2000);
      e.completion_tokens = static_cast<std::int64_t>(rng() % 8000);
      e.unit_price = Money::parse(prices[rng() % 8]);
      whole.append(e);
      (static_cast<std::size_t>(i) < cut ? left : right).append(e);
    }
    additive = additive &&
               total_currency(whole) == total_currency(left) + total_currency(right) &&
               total_tokens(whole) == total_tokens(left) + total_tokens(right);
  }
  report(5, "exact decimal accounting", exact_million && exact_thousand && additive,
         "10^6 tokens @1.10 = 1.10; 10^3 = 0.0011; additive over randomized splits");
}

// --- C6: call-count law ---------------------------------------------------

void criterion_call_count() {
  RouterConfig config = load_config(testutil::five_model_config());
  auto thirteen_client = testutil::make_client(testutil::default_scripts());
  auto trace = route({"count the calls", {}, "acc-c6"}, config, thirteen_client);
  bool thirteen = testutil::count_calls(trace) == 13 &&
                  testutil::count_calls(trace, CallPurpose::boot) == 5 &&
                  testutil::count_calls(trace, CallPurpose::continuation) == 4 &&
                  testutil::count_calls(trace, CallPurpose::selection) == 2 &&
                  testutil::count_calls(trace, CallPurpose::aggregation) == 2;

  bool grid = true;
  for (int k = 1; k <= 4 && grid; ++k) {
    for (int layers = 1; layers <= 4 && grid; ++layers) {
      auto client = testutil::make_client(testutil::default_scripts());
      RouteOverrides overrides;
      overrides.k = k;
      overrides.layers = layers;
      auto t = route_with_overrides(
          {"grid", {}, "acc-c6-" + std::to_string(k) + "-" + std::to_string(layers)}, config,
          client, overrides);
      grid = testutil::count_calls(t) == 5 + k * layers + 2 * layers;
    }
  }
  report(6, "call-count law", thirteen && grid,
         "n=5,k=2,l=2 -> 13 calls; grid k,l in 1..4 matches n + k*l + 2l");
}

// --- C7: early-cancellation economics --------------------------------------

void criterion_cancellation_economics() {
  const int kScriptTokens = 2000;
  const int kPerChunk = 8;
  RouterConfig config = load_config(testutil::five_model_config());

  json scripts = testutil::default_scripts(kScriptTokens, kPerChunk);
  scripts["scripts"]["agg"]["replies"] = json::array({testutil::text_reply("merged")});

  std::vector<TaskRecord> one_task = parse_dataset_jsonl(
      R"({"task_id": "acc-c7", "prompt": "long generation", "reference": "merged", "scorer": "exact_match"})"
      "\n");

  auto router_client = testutil::make_client(scripts);
  auto router = run_benchmark(one_task, config, router_client, {});
  auto baseline_client = testutil::make_client(scripts);
  auto baseline = run_baseline(one_task, config, baseline_client, BaselineKind::all_full);

  auto completion_sum = [](const RunOutput& output) {
    double sum = 0;
    for (const auto& trace : output.traces) {
      for (const auto& e : trace.ledger.entries()) {
        sum += static_cast<double>(e.completion_tokens);
      }
    }
    return sum;
  };
  double router_tokens = completion_sum(router);
  double baseline_tokens = completion_sum(baseline);

  double selector_reply_tokens = 5;  // "[LLM1, LLM2, LLM3, LLM4, LLM5]"
  double agg_reply_tokens = 1;       // "merged"
  double predicted_router = 5.0 * 200 + 2.0 * 2 * kScriptTokens +
                            2 * selector_reply_tokens + 2 * agg_reply_tokens;
  double predicted_baseline = 5.0 * kScriptTokens + agg_reply_tokens;
  double predicted_ratio = predicted_router / predicted_baseline;
  double measured_ratio = router_tokens / baseline_tokens;
  bool ratio_ok = std::abs(measured_ratio - predicted_ratio) / predicted_ratio < 0.10;

  std::int64_t boot_tokens = 0;
  for (const auto& trace : router.traces) {
    boot_tokens += completion_tokens_for(trace.ledger, CallPurpose::boot);
  }
  bool boots_ok = boot_tokens <= 5 * (200 + (kPerChunk - 1));

  report(7, "early-cancellation economics", ratio_ok && boots_ok && router_tokens < baseline_tokens,
         fmt("router/baseline completion ratio %.4f vs predicted %.4f; boot tokens within "
             "5*(B+slack)",
             measured_ratio, predicted_ratio));
}

// --- C8: selector robustness -----------------------------------------------

void criterion_selector_robustness() {
  std::mt19937_64 rng(8);
  const std::vector<std::string> fillers = {
      "ranking:",  "best",  "[", "]", ",", "LLM", "llm12", "(see above)",
      "I refuse.", "42",    "model", "list", "\n", "  ", "quality"};
  bool permutations = true;
  for (int round = 0; round < 10'000 && permutations; ++round) {
    int n = 1 + static_cast<int>(rng() % 6);
    SelectorPromptContext context;
    context.query_text = "q";
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) {
      ids.push_back("m" + std::to_string(i));
      context.candidates.push_back({"LLM" + std::to_string(i + 1), ids.back(), "t"});
    }
    std::string reply;
    int pieces = static_cast<int>(rng() % 12);
    for (int p = 0; p < pieces; ++p) {
      if (rng() % 2 == 0) {
        reply += "LLM" + std::to_string(rng() % (static_cast<std::uint64_t>(n) + 4)) + ", ";
      } else {
        reply += fillers[rng() % fillers.size()] + " ";
      }
    }
    auto ranking = parse_ranking(reply, context);
    if (!ranking) continue;  // zero-signal replies go to fallback, checked below
    auto sorted = *ranking;
    std::sort(sorted.begin(), sorted.end());
    std::sort(ids.begin(), ids.end());
    permutations = sorted == ids;
  }

  // zero-signal reply -> fallback ranks by ascending unit price
  json scripts{{"scripts",
                {{"sel", {{"replies", json::array({testutil::text_reply("no idea"),
                                                   testutil::text_reply("still nothing")})}}}}}};
  auto client = testutil::make_client(scripts);
  std::vector<BootResponse> boots;
  std::vector<ModelSpec> pool;
  for (const auto& [id, price] : std::vector<std::pair<std::string, std::string>>{
           {"llama-70b", "0.88"}, {"mixtral-8x22b", "0.80"}, {"deepseek-v3", "1.10"},
           {"qwen-max", "1.32"}}) {
    BootResponse boot;
    boot.model_id = id;
    boot.text = "partial";
    boot.termination = Termination::budget_reached;
    boots.push_back(boot);
    pool.push_back(testutil::mock_model(id, price));
  }
  std::mt19937_64 label_rng(1);
  auto outcome =
      select_top_k({"q", {}, "acc-c8"}, boots, 2, testutil::mock_model("sel"), client, pool,
                   label_rng);
  bool fallback_ok = outcome.result.fallback_used &&
                     outcome.result.ranking ==
                         std::vector<std::string>{"mixtral-8x22b", "llama-70b", "deepseek-v3",
                                                  "qwen-max"} &&
                     outcome.result.selected ==
                         std::vector<std::string>{"mixtral-8x22b", "llama-70b"};

  report(8, "selector robustness", permutations && fallback_ok,
         "10^4 fuzzed replies parse to permutations; zero-signal falls back price-ascending");
}

// --- C9: pool pollution ----------------------------------------------------

void criterion_pool_pollution() {
  auto start = std::chrono::steady_clock::now();
  sim::ConsistencyModel good;
  good.family = sim::ConsistencyModel::Family::bernoulli_mixture;
  good.mu = 0.9;
  good.sigma2 = 0.01;
  good.seed = 91;
  sim::ConsistencyModel bad = good;
  bad.mu = 0.2;
  bad.seed = 92;

  sim::MergePolicy mean;
  auto unfiltered = sim::simulate_pool_pollution(good, bad, 3, 2, mean, false, 2, 100'000);
  auto filtered = sim::simulate_pool_pollution(good, bad, 3, 2, mean, true, 2, 100'000);
  double elapsed = seconds_since(start);

  bool ok = std::abs(unfiltered.mean_merged_score - 0.62) < 0.01 &&
            filtered.mean_merged_score > unfiltered.mean_merged_score && elapsed < 10.0;
  report(9, "pool-pollution filtering", ok,
         fmt("no-filter %.4f (closed form 0.62); with-filter %.4f; %.2fs",
             unfiltered.mean_merged_score, filtered.mean_merged_score, elapsed));
}

// --- C10: determinism and trace closure -------------------------------------

void criterion_determinism() {
  RouterConfig config = load_config(testutil::five_model_config());
  std::string lines;
  for (int i = 0; i < 20; ++i) {
    json row{{"task_id", "task-" + std::to_string(i)},
             {"prompt", "task-" + std::to_string(i) + ": question"},
             {"reference", "R" + std::to_string(i)},
             {"scorer", "exact_match"}};
    lines += row.dump() + "\n";
  }
  auto tasks = parse_dataset_jsonl(lines);

  auto run_at = [&](int concurrency) {
    auto client = testutil::make_client(testutil::default_scripts());
    RunOptions options;
    options.concurrency_limit = concurrency;
    return run_benchmark(tasks, config, client, options);
  };
  auto serial = run_at(1);
  auto parallel = run_at(8);
  bool identical =
      report_to_json(serial.report).dump() == report_to_json(parallel.report).dump();

  bool closed = true;
  Money ledger_cost;
  for (const auto& trace : serial.traces) {
    closed = closed && testutil::trace_ledger_closed(trace);
    ledger_cost += total_currency(trace.ledger);
  }
  bool totals = serial.report.total_cost == ledger_cost;

  report(10, "determinism and closure", identical && closed && totals,
         "20-task report bit-identical at concurrency {1,8}; ledger<->trace 1:1; cost sums equal");
}

// --- C11: pareto correctness -------------------------------------------------

void criterion_pareto() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool ok = true;
  for (int instance = 0; instance < 1000 && ok; ++instance) {
    int n = 1 + static_cast<int>(rng() % 20);
    std::vector<ParetoPoint> points;
    for (int i = 0; i < n; ++i) {
      points.push_back({"p" + std::to_string(i), unit(rng), unit(rng)});
    }
    auto frontier = pareto_frontier(points);
    auto dominates = [](const ParetoPoint& a, const ParetoPoint& b) {
      return a.score >= b.score && a.cost <= b.cost && (a.score > b.score || a.cost < b.cost);
    };
    for (const auto& p : points) {
      bool in_frontier = std::any_of(frontier.begin(), frontier.end(),
                                     [&](const ParetoPoint& f) { return f.label == p.label; });
      bool dominated = std::any_of(points.begin(), points.end(),
                                   [&](const ParetoPoint& q) { return dominates(q, p); });
      ok = ok && in_frontier == !dominated;
    }
    for (std::size_t i = 1; i < frontier.size(); ++i) {
      ok = ok && frontier[i - 1].cost <= frontier[i].cost;
    }
  }
  report(11, "pareto correctness", ok,
         "frontier equals exhaustive pairwise dominance on 10^3 instances of <= 20 points");
}

}  // namespace

int main() {
  std::printf("acceptance criteria\n-------------------\n");
  criterion_variance_law();
  criterion_mean_bound();
  criterion_cumulative_error();
  criterion_optimal_k();
  criterion_currency();
  criterion_call_count();
  criterion_cancellation_economics();
  criterion_selector_robustness();
  criterion_pool_pollution();
  criterion_determinism();
  criterion_pareto();
  std::printf("-------------------\n%s\n", g_failures == 0 ? "all criteria passed"
                                                           : "CRITERIA FAILED");
  return g_failures == 0 ? 0 : 1;
}
