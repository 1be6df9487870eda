#pragma once

#include <memory>
#include <string>

#include "bootroute/client.hpp"
#include "bootroute/config.hpp"

namespace bootroute {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 8080;          // 0 = pick an ephemeral port
  int concurrency = 4;      // bound on in-flight pipelines
  std::string out_dir;      // traces persisted here when non-empty
};

/**
 * Long-running routing service.
 *
 *   POST /route        {"text": ..., "query_id"?, "required_capabilities"?}
 *                      -> 200 {"final_text", "trace_id", "total_tokens",
 *                              "total_currency"}
 *                      -> 400 on malformed body, 502 with a partial trace id
 *                         when every candidate failed
 *   GET  /trace/<id>   full RoutingTrace JSON, 404 when unknown
 *   GET  /healthz      200 "ok"
 *
 * stop() stops accepting new work and lets in-flight queries complete.
 */
class RouteService {
 public:
  RouteService(RouterConfig config, const ModelClient& client, ServeOptions options);
  ~RouteService();

  RouteService(const RouteService&) = delete;
  RouteService& operator=(const RouteService&) = delete;

  bool bind();        // returns false when the address is unavailable
  int port() const;   // actual port once bound
  bool run();         // blocking listen loop (call bind() first)
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace bootroute
