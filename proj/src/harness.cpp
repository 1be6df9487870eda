#include "bootroute/harness.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bootroute/aggregator.hpp"

namespace bootroute {

namespace {

namespace fs = std::filesystem;

Query query_for_task(const TaskRecord& task) {
  Query query;
  query.text = task.prompt;
  query.query_id = task.task_id;
  if (task.metadata.is_object() && task.metadata.contains("capabilities")) {
    query.required_capabilities =
        task.metadata.at("capabilities").get<std::vector<std::string>>();
  }
  return query;
}

void score_task(const TaskRecord& task, TaskResult& result) {
  if (task.scorer == ScorerKind::external) {
    result.reason = "external scorer";
    return;
  }
  bool correct = score_answer(result.final_text, task);
  result.correct = correct;
  if (!correct && task.scorer == ScorerKind::numeric_match &&
      !extract_last_number(result.final_text)) {
    result.reason = "no numeral in answer";
  }
}

void finalize_report(RunReport& report) {
  for (const auto& task : report.tasks) {
    if (task.correct.has_value()) {
      ++report.scored;
      if (*task.correct) ++report.correct_count;
    }
    report.total_tokens += task.tokens;
    report.total_cost += task.currency;
  }
  report.accuracy = report.scored > 0
                        ? static_cast<double>(report.correct_count) /
                              static_cast<double>(report.scored)
                        : 0.0;
  if (!report.tasks.empty()) {
    report.mean_cost_per_query =
        report.total_cost.divided_by(static_cast<std::int64_t>(report.tasks.size()));
  }
}

void persist_output(const RunOutput& output, const std::string& out_dir) {
  if (out_dir.empty()) return;
  fs::create_directories(fs::path(out_dir) / "traces");
  for (std::size_t i = 0; i < output.traces.size(); ++i) {
    nlohmann::json doc = output.traces[i];
    std::ofstream file(fs::path(out_dir) / "traces" /
                       (output.report.tasks[i].task_id + ".json"));
    file << doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
  }
  std::ofstream report_file(fs::path(out_dir) / "report.json");
  report_file << report_to_json(output.report).dump(2, ' ', false,
                                                nlohmann::json::error_handler_t::replace)
              << '\n';
}

// One worker pool run over the dataset; `route_one` produces the trace for
// a task. Slot-indexed output keeps the report in dataset order whatever
// the interleaving.
template <typename RouteOne>
RunOutput run_tasks(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                    const RunOptions& options, const RouteOne& route_one) {
  if (dataset.empty()) throw DatasetError("empty dataset");
  RunOutput output;
  output.report.tasks.resize(dataset.size());
  output.traces.resize(dataset.size());
  output.report.config_snapshot = serialize_config(config);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    while (true) {
      std::size_t index = next.fetch_add(1);
      if (index >= dataset.size()) return;
      const TaskRecord& task = dataset[index];
      TaskResult& result = output.report.tasks[index];
      result.task_id = task.task_id;
      try {
        RoutingTrace trace = route_one(task);
        result.final_text = trace.final_text;
        result.tokens = total_tokens(trace.ledger);
        result.currency = total_currency(trace.ledger);
        score_task(task, result);
        output.traces[index] = std::move(trace);
      } catch (const RouteError& e) {
        result.correct = task.scorer == ScorerKind::external ? std::optional<bool>{} : false;
        result.reason = e.what();
        result.tokens = total_tokens(e.partial_trace().ledger);
        result.currency = total_currency(e.partial_trace().ledger);
        output.traces[index] = e.partial_trace();
      } catch (const std::exception& e) {
        result.correct = task.scorer == ScorerKind::external ? std::optional<bool>{} : false;
        result.reason = e.what();
      }
    }
  };

  int workers = std::max(1, options.concurrency_limit);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  for (auto& w : pool) w.join();

  finalize_report(output.report);
  persist_output(output, options.out_dir);
  return output;
}

}  // namespace

nlohmann::json report_to_json(const RunReport& report) {
  nlohmann::json tasks = nlohmann::json::array();
  for (const auto& t : report.tasks) {
    nlohmann::json row{
        {"task_id", t.task_id},
        {"final_text", t.final_text},
        {"correct", t.correct.has_value() ? nlohmann::json(*t.correct) : nlohmann::json()},
        {"tokens", t.tokens},
        {"currency", t.currency.to_string()},
    };
    if (!t.reason.empty()) row["reason"] = t.reason;
    tasks.push_back(std::move(row));
  }
  nlohmann::json doc{
      {"schema", "run-report/v1"},
      {"tasks", tasks},
      {"aggregate",
       {
           {"scored", report.scored},
           {"correct", report.correct_count},
           {"accuracy", report.accuracy},
           {"total_tokens", report.total_tokens},
           {"total_cost", report.total_cost.to_string()},
           {"mean_cost_per_query", report.mean_cost_per_query.to_string()},
       }},
      {"config", report.config_snapshot},
  };
  if (!report.sweep_axis.empty()) {
    doc["sweep"] = {{"axis", report.sweep_axis}, {"value", report.sweep_value}};
  }
  return doc;
}

RunOutput run_benchmark(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                        const ModelClient& client, const RunOptions& options) {
  return run_tasks(dataset, config, options, [&](const TaskRecord& task) {
    return route_with_overrides(query_for_task(task), config, client, options.overrides);
  });
}

const char* to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::k: return "k";
    case SweepAxis::boot_budget: return "boot_budget";
    case SweepAxis::layers: return "layers";
  }
  return "k";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  if (s == "k") return SweepAxis::k;
  if (s == "boot_budget") return SweepAxis::boot_budget;
  if (s == "layers") return SweepAxis::layers;
  throw std::invalid_argument("unknown sweep axis: " + s);
}

SweepResult run_sweep(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                      const ModelClient& client, SweepAxis axis, const std::vector<int>& values,
                      const RunOptions& options) {
  SweepResult sweep;
  sweep.axis = axis;
  for (int value : values) {
    SweepEntry entry;
    entry.value = value;
    RunOptions run_options = options;
    switch (axis) {
      case SweepAxis::k: run_options.overrides.k = value; break;
      case SweepAxis::boot_budget: run_options.overrides.boot_budget = value; break;
      case SweepAxis::layers: run_options.overrides.layers = value; break;
    }
    if (!run_options.out_dir.empty()) {
      run_options.out_dir = (fs::path(options.out_dir) /
                             (std::string(to_string(axis)) + "-" + std::to_string(value)))
                                .string();
    }
    try {
      apply_overrides(config, run_options.overrides);  // reject bad values up front
      entry.output = run_benchmark(dataset, config, client, run_options);
      entry.output.report.sweep_axis = to_string(axis);
      entry.output.report.sweep_value = value;
    } catch (const ConfigError& e) {
      entry.skipped = true;
      entry.reason = e.what();
    }
    sweep.entries.push_back(std::move(entry));
  }
  return sweep;
}

std::string sweep_to_csv(const SweepResult& sweep) {
  std::ostringstream out;
  out << "axis,value,accuracy,mean_cost\n";
  out.precision(9);
  for (const auto& entry : sweep.entries) {
    if (entry.skipped) continue;
    out << to_string(sweep.axis) << ',' << entry.value << ','
        << entry.output.report.accuracy << ','
        << entry.output.report.mean_cost_per_query.to_string() << '\n';
  }
  return out.str();
}

RunOutput run_baseline(const std::vector<TaskRecord>& dataset, const RouterConfig& config,
                       const ModelClient& client, BaselineKind kind,
                       const std::string& baseline_model, const RunOptions& options) {
  const ModelSpec& aggregator_spec = *config.find_model(config.aggregator_model);

  auto route_all_full = [&](const TaskRecord& task) {
    Query query = query_for_task(task);
    RoutingTrace trace;
    trace.query = query;
    trace.config_snapshot = serialize_config(config);
    LayerRecord layer;
    layer.layer_index = 1;

    std::vector<FullResponse> answers(config.pool.size());
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < config.pool.size(); ++i) {
      workers.emplace_back([&, i] {
        ChatRequest request;
        request.model_id = config.pool[i].model_id;
        request.messages = {{Role::user, query.text}};
        request.temperature = config.temperature;
        request.session_key = query.query_id;
        answers[i] = client.complete_full(config.pool[i], request, config.max_final_tokens,
                                          config.request_timeout);
      });
    }
    for (auto& w : workers) w.join();

    AggregateInput input;
    input.query_text = query.text;
    input.layer_index = 1;
    input.session_key = query.query_id;
    for (std::size_t i = 0; i < answers.size(); ++i) {
      trace.record_call(layer, CallPurpose::continuation,
                        config.pool[i].price_per_million_tokens, answers[i]);
      if (answers[i].usable()) input.answers.push_back({answers[i].model_id, answers[i].text});
    }
    if (input.answers.empty()) {
      trace.layers.push_back(std::move(layer));
      trace.error = "all_candidates_failed";
      throw RouteError("all_candidates_failed", std::move(trace));
    }
    AggregateOutcome merged = aggregate(input, aggregator_spec, client, config.max_final_tokens,
                                        config.request_timeout);
    for (const auto& call : merged.aggregator_calls) {
      trace.record_call(layer, CallPurpose::aggregation,
                        aggregator_spec.price_per_million_tokens, call);
    }
    layer.aggregate_text = merged.text;
    layer.aggregate_tokens = merged.tokens;
    layer.aggregator_degraded = merged.degraded;
    trace.layers.push_back(std::move(layer));
    trace.final_text = merged.text;
    return trace;
  };

  auto route_single = [&](const TaskRecord& task) {
    std::string model_id = baseline_model.empty() ? config.aggregator_model : baseline_model;
    const ModelSpec* spec = config.find_model(model_id);
    if (spec == nullptr) throw ConfigError("baseline model not in config: " + model_id);
    Query query = query_for_task(task);
    RoutingTrace trace;
    trace.query = query;
    trace.config_snapshot = serialize_config(config);
    LayerRecord layer;
    layer.layer_index = 1;
    ChatRequest request;
    request.model_id = spec->model_id;
    request.messages = {{Role::user, query.text}};
    request.temperature = config.temperature;
    request.session_key = query.query_id;
    FullResponse answer =
        client.complete_full(*spec, request, config.max_final_tokens, config.request_timeout);
    trace.record_call(layer, CallPurpose::continuation, spec->price_per_million_tokens, answer);
    if (!answer.usable()) {
      trace.layers.push_back(std::move(layer));
      trace.error = "all_candidates_failed";
      throw RouteError("all_candidates_failed", std::move(trace));
    }
    layer.aggregate_text = answer.text;
    trace.layers.push_back(std::move(layer));
    trace.final_text = answer.text;
    return trace;
  };

  if (kind == BaselineKind::all_full) {
    return run_tasks(dataset, config, options, route_all_full);
  }
  return run_tasks(dataset, config, options, route_single);
}

}  // namespace bootroute
