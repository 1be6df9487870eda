#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bootroute/harness.hpp"
#include "bootroute/pareto.hpp"
#include "bootroute/pipeline.hpp"
#include "bootroute/server.hpp"
#include "bootroute/sim.hpp"

using namespace bootroute;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string mock_scripts;
  std::string prices_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int concurrency = 4;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool with_concurrency = true) {
  cmd->add_option("--config", args.config_path, "configuration file")->required();
  cmd->add_option("--mock-scripts", args.mock_scripts,
                  "mock script file (overrides the config's mock_scripts)");
  cmd->add_option("--prices", args.prices_path, "price-table override file");
  cmd->add_option("--seed", args.seed, "label-randomization seed")
      ->each([&args](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out_dir, "output directory");
  if (with_concurrency) {
    cmd->add_option("--concurrency", args.concurrency, "bound on in-flight pipelines");
  }
}

RouterConfig load_effective_config(const CommonArgs& args) {
  RouterConfig config = load_config_file(args.config_path);
  if (args.seed_set) config.seed = args.seed;
  if (!args.prices_path.empty()) {
    std::ifstream in(args.prices_path);
    if (!in) throw ConfigError("cannot open price table: " + args.prices_path);
    json table;
    in >> table;
    std::vector<std::string> unmatched;
    config = apply_price_table(config, table, &unmatched);
    for (const auto& id : unmatched) {
      std::cerr << "warning: price table names unknown model '" << id << "'\n";
    }
  }
  return config;
}

ModelClient make_client(const CommonArgs& args, const RouterConfig& config) {
  ClientOptions options;
  std::string scripts = args.mock_scripts.empty() ? config.mock_scripts : args.mock_scripts;
  if (!scripts.empty()) {
    fs::path path(scripts);
    if (path.is_relative() && !fs::exists(path)) {
      // try resolving next to the config file
      fs::path beside = fs::path(args.config_path).parent_path() / path;
      if (fs::exists(beside)) path = beside;
    }
    options.mocks = std::make_shared<MockBackend>();
    options.mocks->load_file(path.string());
  }
  return ModelClient(options);
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path);
  out << content;
  std::cout << "wrote " << path.string() << "\n";
}

void print_cost_summary(const CostLedger& ledger) {
  std::printf("tokens: %lld (boot %lld, continuation %lld, selection %lld, aggregation %lld)\n",
              static_cast<long long>(total_tokens(ledger)),
              static_cast<long long>(total_tokens_for(ledger, CallPurpose::boot)),
              static_cast<long long>(total_tokens_for(ledger, CallPurpose::continuation)),
              static_cast<long long>(total_tokens_for(ledger, CallPurpose::selection)),
              static_cast<long long>(total_tokens_for(ledger, CallPurpose::aggregation)));
  std::printf("cost: %s\n", total_currency(ledger).to_string().c_str());
}

volatile std::sig_atomic_t g_stop_requested = 0;
RouteService* g_service = nullptr;

void handle_signal(int) {
  g_stop_requested = 1;
  if (g_service != nullptr) g_service->stop();
}

int cmd_route(const CommonArgs& args, const std::string& query_text,
              const std::string& query_file, std::string query_id,
              const std::vector<std::string>& capabilities) {
  RouterConfig config = load_effective_config(args);
  ModelClient client = make_client(args, config);

  Query query;
  if (!query_file.empty()) {
    std::ifstream in(query_file);
    if (!in) throw std::runtime_error("cannot open query file: " + query_file);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    query.text = buffer.str();
  } else {
    query.text = query_text;
  }
  if (query.text.empty()) throw std::runtime_error("provide --query or --query-file");
  query.required_capabilities = capabilities;
  query.query_id = query_id.empty() ? "cli-query" : query_id;

  try {
    RoutingTrace trace = route(query, config, client);
    std::printf("%s\n---\n", trace.final_text.c_str());
    print_cost_summary(trace.ledger);
    if (!args.out_dir.empty()) {
      json doc = trace;
      write_file(fs::path(args.out_dir) / "traces" / (query.query_id + ".json"),
                 doc.dump(2) + "\n");
    }
    return 0;
  } catch (const RouteError& e) {
    std::fprintf(stderr, "routing failed: %s\n", e.what());
    if (!args.out_dir.empty()) {
      json doc = e.partial_trace();
      write_file(fs::path(args.out_dir) / "traces" / (query.query_id + ".partial.json"),
                 doc.dump(2) + "\n");
    }
    return 1;
  }
}

void print_report_summary(const RunReport& report) {
  std::printf("tasks: %zu  scored: %lld  correct: %lld  accuracy: %.4f\n",
              report.tasks.size(), static_cast<long long>(report.scored),
              static_cast<long long>(report.correct_count), report.accuracy);
  std::printf("total tokens: %lld  total cost: %s  mean cost/query: %s\n",
              static_cast<long long>(report.total_tokens),
              report.total_cost.to_string().c_str(),
              report.mean_cost_per_query.to_string().c_str());
}

int cmd_bench(const CommonArgs& args, const std::string& dataset_path,
              const std::string& baseline, const std::string& baseline_model) {
  RouterConfig config = load_effective_config(args);
  ModelClient client = make_client(args, config);
  auto dataset = load_dataset_jsonl(dataset_path);

  RunOptions options;
  options.concurrency_limit = args.concurrency;
  options.out_dir = args.out_dir;

  RunOutput output;
  if (baseline.empty()) {
    output = run_benchmark(dataset, config, client, options);
  } else if (baseline == "all-full") {
    output = run_baseline(dataset, config, client, BaselineKind::all_full, baseline_model,
                          options);
  } else if (baseline == "single-best") {
    output = run_baseline(dataset, config, client, BaselineKind::single_best, baseline_model,
                          options);
  } else {
    throw std::runtime_error("unknown baseline: " + baseline);
  }
  print_report_summary(output.report);
  if (!args.out_dir.empty()) {
    std::cout << "report: " << (fs::path(args.out_dir) / "report.json").string() << "\n";
  }
  return 0;
}

int cmd_sweep(const CommonArgs& args, const std::string& dataset_path, const std::string& axis,
              const std::vector<int>& values) {
  RouterConfig config = load_effective_config(args);
  ModelClient client = make_client(args, config);
  auto dataset = load_dataset_jsonl(dataset_path);

  RunOptions options;
  options.concurrency_limit = args.concurrency;
  options.out_dir = args.out_dir;

  SweepResult sweep =
      run_sweep(dataset, config, client, sweep_axis_from_string(axis), values, options);
  for (const auto& entry : sweep.entries) {
    if (entry.skipped) {
      std::printf("%s=%d  skipped: %s\n", axis.c_str(), entry.value, entry.reason.c_str());
    } else {
      std::printf("%s=%d  accuracy: %.4f  mean cost: %s\n", axis.c_str(), entry.value,
                  entry.output.report.accuracy,
                  entry.output.report.mean_cost_per_query.to_string().c_str());
    }
  }
  std::string csv = sweep_to_csv(sweep);
  if (!args.out_dir.empty()) {
    write_file(fs::path(args.out_dir) / "sweep.csv", csv);
  } else {
    std::cout << csv;
  }
  return 0;
}

int cmd_simulate(const std::string& kind, const std::string& family, double mu, double sigma2,
                 std::uint64_t seed, std::int64_t trials, int k, int n, double mu_bad,
                 double cost_per_candidate, double merge_cost, double lambda,
                 double oracle_fidelity, bool serial, const std::string& out_dir) {
  sim::ConsistencyModel model;
  if (family == "uniform") {
    model.family = sim::ConsistencyModel::Family::uniform;
  } else if (family == "truncated_normal") {
    model.family = sim::ConsistencyModel::Family::truncated_normal;
  } else if (family == "bernoulli_mixture") {
    model.family = sim::ConsistencyModel::Family::bernoulli_mixture;
  } else {
    throw std::runtime_error("unknown family: " + family);
  }
  model.mu = mu;
  model.sigma2 = sigma2;
  model.seed = seed;
  if (model.clip_mass() > 0.01) {
    std::fprintf(stderr, "warning: %.2f%% of the score mass clips to [0,1]; moment checks "
                         "are biased\n",
                 100.0 * model.clip_mass());
  }

  if (kind == "variance") {
    auto stats = serial ? sim::reference::simulate_merge_variance(model, k, trials)
                        : sim::simulate_merge_variance(model, k, trials);
    std::printf("k=%d trials=%lld mean=%.6f variance=%.6f sigma2/k=%.6f\n", k,
                static_cast<long long>(trials), stats.empirical_mean, stats.empirical_variance,
                sigma2 / k);
    return 0;
  }
  if (kind == "pollution") {
    sim::ConsistencyModel bad = model;
    bad.mu = mu_bad;
    bad.seed = seed + 1;
    sim::MergePolicy policy;
    auto run = [&](bool with_filter) {
      return serial
                 ? sim::reference::simulate_pool_pollution(model, bad, n, k, policy, with_filter,
                                                           k, trials, oracle_fidelity)
                 : sim::simulate_pool_pollution(model, bad, n, k, policy, with_filter, k, trials,
                                                oracle_fidelity);
    };
    auto unfiltered = run(false);
    auto filtered = run(true);
    std::printf("good mu=%.3f x%d, bad mu=%.3f x%d, k=%d, oracle fidelity %.2f\n", mu, n,
                mu_bad, k, k, oracle_fidelity);
    std::printf("no filter:   mean merged %.6f\n", unfiltered.mean_merged_score);
    std::printf("with filter: mean merged %.6f\n", filtered.mean_merged_score);
    return 0;
  }
  if (kind == "ksweep") {
    auto rows = serial ? sim::reference::sweep_k_objective(model, cost_per_candidate, merge_cost,
                                                           lambda, n, trials)
                       : sim::sweep_k_objective(model, cost_per_candidate, merge_cost, lambda, n,
                                                trials);
    std::map<int, double> consistency, cost;
    for (const auto& [key, row] : rows) {
      consistency[key] = row.expected_consistency;
      cost[key] = row.total_cost;
    }
    std::string csv = sim::ksweep_to_csv(rows);
    std::cout << csv;
    std::printf("k* = %d at lambda %.3f\n", optimal_k(consistency, cost, lambda), lambda);
    if (!out_dir.empty()) write_file(fs::path(out_dir) / "ksweep.csv", csv);
    return 0;
  }
  throw std::runtime_error("unknown simulation kind: " + kind);
}

int cmd_pareto(const std::string& points_path, const std::vector<std::string>& report_paths,
               const std::string& ksweep_path, const std::string& out_dir) {
  std::vector<ParetoPoint> points;
  if (!points_path.empty()) {
    std::ifstream in(points_path);
    if (!in) throw std::runtime_error("cannot open points file: " + points_path);
    json doc;
    in >> doc;
    for (const auto& item : doc) {
      points.push_back({item.at("label").get<std::string>(), item.at("score").get<double>(),
                        item.at("cost").get<double>()});
    }
  }
  if (!ksweep_path.empty()) {
    std::ifstream in(ksweep_path);
    if (!in) throw std::runtime_error("cannot open ksweep csv: " + ksweep_path);
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string k, consistency, cost;
      std::getline(row, k, ',');
      std::getline(row, consistency, ',');
      std::getline(row, cost, ',');
      points.push_back({"k=" + k, std::stod(consistency), std::stod(cost)});
    }
  }
  for (const auto& path : report_paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json doc;
    in >> doc;
    points.push_back({fs::path(path).stem().string(),
                      doc.at("aggregate").at("accuracy").get<double>(),
                      std::stod(doc.at("aggregate").at("mean_cost_per_query")
                                    .get<std::string>())});
  }
  if (points.empty()) throw std::runtime_error("no points; pass --points, --report, or --ksweep");

  auto artifacts = emit_pareto(points);
  std::printf("frontier (%zu of %zu points):\n", artifacts.frontier.size(), points.size());
  for (const auto& p : artifacts.frontier) {
    std::printf("  %-20s score %.4f  cost %.6f\n", p.label.c_str(), p.score, p.cost);
  }
  fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
  write_file(dir / "pareto.csv", artifacts.csv);
  write_file(dir / "pareto.svg", artifacts.svg);
  return 0;
}

int cmd_serve(const CommonArgs& args, const std::string& bind) {
  RouterConfig config = load_effective_config(args);
  ModelClient client = make_client(args, config);

  ServeOptions options;
  options.concurrency = args.concurrency;
  options.out_dir = args.out_dir;
  auto colon = bind.rfind(':');
  if (colon == std::string::npos) throw std::runtime_error("--bind must be host:port");
  options.host = bind.substr(0, colon);
  options.port = std::stoi(bind.substr(colon + 1));

  RouteService service(config, client, options);
  if (!service.bind()) {
    std::fprintf(stderr, "cannot bind %s\n", bind.c_str());
    return 1;
  }
  g_service = &service;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::printf("listening on %s:%d\n", options.host.c_str(), service.port());
  service.run();
  g_service = nullptr;
  std::printf("drained, bye\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"boot-token router for pools of chat-completion models"};
  app.require_subcommand(1);

  CommonArgs route_args;
  std::string query_text, query_file, query_id;
  std::vector<std::string> capabilities;
  auto* route_cmd = app.add_subcommand("route", "route one query through the pool");
  add_common(route_cmd, route_args, /*with_concurrency=*/false);
  route_cmd->add_option("--query", query_text, "query text");
  route_cmd->add_option("--query-file", query_file, "file holding the query text");
  route_cmd->add_option("--id", query_id, "query id (defaults to cli-query)");
  route_cmd->add_option("--caps", capabilities, "required capability tags")->delimiter(',');

  CommonArgs bench_args;
  std::string dataset_path, baseline, baseline_model;
  auto* bench_cmd = app.add_subcommand("bench", "run a JSONL task dataset");
  add_common(bench_cmd, bench_args);
  bench_cmd->add_option("--dataset", dataset_path, "JSONL dataset")->required();
  bench_cmd->add_option("--baseline", baseline, "comparator: all-full or single-best");
  bench_cmd->add_option("--baseline-model", baseline_model,
                        "model for single-best (default: aggregator)");

  CommonArgs sweep_args;
  std::string sweep_dataset, sweep_axis;
  std::vector<int> sweep_values;
  auto* sweep_cmd = app.add_subcommand("sweep", "benchmark across one parameter axis");
  add_common(sweep_cmd, sweep_args);
  sweep_cmd->add_option("--dataset", sweep_dataset, "JSONL dataset")->required();
  sweep_cmd->add_option("--axis", sweep_axis, "k, boot_budget, or layers")->required();
  sweep_cmd->add_option("--values", sweep_values, "axis values")->delimiter(',')->required();

  std::string sim_kind = "variance", sim_family = "bernoulli_mixture", sim_out;
  double sim_mu = 0.8, sim_sigma2 = 0.04, sim_mu_bad = 0.2, sim_cost = 0.003,
         sim_merge_cost = 0.001, sim_lambda = 25.0, sim_fidelity = 1.0;
  std::uint64_t sim_seed = 1;
  std::int64_t sim_trials = 100'000;
  int sim_k = 2, sim_n = 5;
  bool sim_serial = false;
  auto* sim_cmd = app.add_subcommand("simulate", "statistical model of merging and selection");
  sim_cmd->add_option("--kind", sim_kind, "variance, pollution, or ksweep");
  sim_cmd->add_option("--family", sim_family, "uniform, truncated_normal, bernoulli_mixture");
  sim_cmd->add_option("--mu", sim_mu, "score mean");
  sim_cmd->add_option("--sigma2", sim_sigma2, "score variance");
  sim_cmd->add_option("--mu-bad", sim_mu_bad, "bad-candidate mean (pollution)");
  sim_cmd->add_option("--trials", sim_trials, "Monte-Carlo trials");
  sim_cmd->add_option("--seed", sim_seed, "RNG seed");
  sim_cmd->add_option("--k", sim_k, "merge width / filter width");
  sim_cmd->add_option("--n", sim_n, "pool size (ksweep, pollution goods)");
  sim_cmd->add_option("--cost-per-candidate", sim_cost, "ksweep per-candidate cost");
  sim_cmd->add_option("--merge-cost", sim_merge_cost, "ksweep merge-step cost");
  sim_cmd->add_option("--lambda", sim_lambda, "cost weight");
  sim_cmd->add_option("--oracle-fidelity", sim_fidelity, "1 = perfect ranking, 0 = random");
  sim_cmd->add_flag("--serial", sim_serial, "use the serial reference implementation");
  sim_cmd->add_option("--out", sim_out, "output directory for CSV");

  std::string pareto_points, pareto_ksweep, pareto_out;
  std::vector<std::string> pareto_reports;
  auto* pareto_cmd = app.add_subcommand("pareto", "frontier over labeled score/cost points");
  pareto_cmd->add_option("--points", pareto_points, "JSON array of {label, score, cost}");
  pareto_cmd->add_option("--report", pareto_reports, "run-report JSON (repeatable)");
  pareto_cmd->add_option("--ksweep", pareto_ksweep, "ksweep.csv from simulate");
  pareto_cmd->add_option("--out", pareto_out, "output directory");

  CommonArgs serve_args;
  std::string bind = "127.0.0.1:8080";
  auto* serve_cmd = app.add_subcommand("serve", "HTTP routing service");
  add_common(serve_cmd, serve_args);
  serve_cmd->add_option("--bind", bind, "host:port (default 127.0.0.1:8080)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (route_cmd->parsed()) {
      return cmd_route(route_args, query_text, query_file, query_id, capabilities);
    }
    if (bench_cmd->parsed()) {
      return cmd_bench(bench_args, dataset_path, baseline, baseline_model);
    }
    if (sweep_cmd->parsed()) {
      return cmd_sweep(sweep_args, sweep_dataset, sweep_axis, sweep_values);
    }
    if (sim_cmd->parsed()) {
      return cmd_simulate(sim_kind, sim_family, sim_mu, sim_sigma2, sim_seed, sim_trials, sim_k,
                          sim_n, sim_mu_bad, sim_cost, sim_merge_cost, sim_lambda, sim_fidelity,
                          sim_serial, sim_out);
    }
    if (pareto_cmd->parsed()) {
      return cmd_pareto(pareto_points, pareto_reports, pareto_ksweep, pareto_out);
    }
    if (serve_cmd->parsed()) return cmd_serve(serve_args, bind);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
