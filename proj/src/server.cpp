#include "bootroute/server.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <semaphore>

#include <httplib.h>

#include "bootroute/pipeline.hpp"

namespace bootroute {

namespace {

void json_response(httplib::Response& res, int status, const nlohmann::json& body) {
  res.status = status;
  res.set_content(body.dump(2, ' ', false, nlohmann::json::error_handler_t::replace),
                  "application/json");
}

}  // namespace

struct RouteService::Impl {
  Impl(RouterConfig config_in, const ModelClient& client_in, ServeOptions options_in)
      : config(std::move(config_in)),
        client(client_in),
        options(std::move(options_in)),
        slots(std::clamp(options.concurrency, 1, 256)) {}

  RouterConfig config;
  const ModelClient& client;
  ServeOptions options;
  std::counting_semaphore<256> slots;
  httplib::Server server;
  int bound_port = 0;

  std::mutex traces_mutex;
  std::map<std::string, nlohmann::json> traces;
  std::atomic<std::uint64_t> next_query = 1;

  std::string store_trace(const RoutingTrace& trace) {
    nlohmann::json doc = trace;
    std::string id = trace.query.query_id;
    {
      std::lock_guard<std::mutex> lock(traces_mutex);
      traces[id] = doc;
    }
    if (!options.out_dir.empty()) {
      namespace fs = std::filesystem;
      fs::create_directories(fs::path(options.out_dir) / "traces");
      std::ofstream file(fs::path(options.out_dir) / "traces" / (id + ".json"));
      file << doc.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) << '\n';
    }
    return id;
  }

  void handle_route(const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      json_response(res, 400, {{"error", "request body must be a JSON object"}});
      return;
    }
    if (!body.contains("text") || !body.at("text").is_string() ||
        body.at("text").get<std::string>().empty()) {
      json_response(res, 400, {{"error", "field 'text' must be a non-empty string"}});
      return;
    }
    Query query;
    query.text = body.at("text").get<std::string>();
    query.query_id = body.value("query_id", std::string{});
    if (query.query_id.empty()) {
      query.query_id = "q-" + std::to_string(next_query.fetch_add(1));
    }
    if (body.contains("required_capabilities")) {
      if (!body.at("required_capabilities").is_array()) {
        json_response(res, 400, {{"error", "field 'required_capabilities' must be an array"}});
        return;
      }
      query.required_capabilities =
          body.at("required_capabilities").get<std::vector<std::string>>();
    }

    slots.acquire();
    try {
      RoutingTrace trace = route(query, config, client);
      std::string id = store_trace(trace);
      slots.release();
      json_response(res, 200,
                    {
                        {"final_text", trace.final_text},
                        {"trace_id", id},
                        {"total_tokens", total_tokens(trace.ledger)},
                        {"total_currency", total_currency(trace.ledger).to_string()},
                    });
    } catch (const RouteError& e) {
      std::string id = store_trace(e.partial_trace());
      slots.release();
      json_response(res, 502, {{"error", e.what()}, {"trace_id", id}});
    } catch (const std::exception& e) {
      slots.release();
      json_response(res, 500, {{"error", e.what()}});
    }
  }

  void setup_routes() {
    server.Get("/healthz", [](const httplib::Request&, httplib::Response& res) {
      res.set_content("ok", "text/plain");
    });
    server.Get(R"(/trace/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
      std::string id = req.matches[1];
      std::lock_guard<std::mutex> lock(traces_mutex);
      auto it = traces.find(id);
      if (it == traces.end()) {
        json_response(res, 404, {{"error", "unknown trace id"}});
        return;
      }
      res.set_content(it->second.dump(2, ' ', false,
                                      nlohmann::json::error_handler_t::replace),
                      "application/json");
    });
    server.Post("/route", [this](const httplib::Request& req, httplib::Response& res) {
      handle_route(req, res);
    });
  }
};

RouteService::RouteService(RouterConfig config, const ModelClient& client, ServeOptions options)
    : impl_(std::make_unique<Impl>(std::move(config), client, std::move(options))) {
  impl_->setup_routes();
}

RouteService::~RouteService() { stop(); }

bool RouteService::bind() {
  if (impl_->options.port == 0) {
    impl_->bound_port = impl_->server.bind_to_any_port(impl_->options.host);
    return impl_->bound_port > 0;
  }
  if (!impl_->server.bind_to_port(impl_->options.host, impl_->options.port)) return false;
  impl_->bound_port = impl_->options.port;
  return true;
}

int RouteService::port() const { return impl_->bound_port; }

bool RouteService::run() { return impl_->server.listen_after_bind(); }

void RouteService::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace bootroute
