#include "bootroute/client.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace bootroute {

namespace {

using Clock = std::chrono::steady_clock;
using nlohmann::json;

struct ParsedUrl {
  std::string scheme;
  std::string origin;  // scheme://host[:port], httplib::Client target
  std::string path;    // "/v1/chat/completions"
  std::string mock_script;
};

ParsedUrl parse_endpoint(const std::string& endpoint) {
  ParsedUrl out;
  auto scheme_end = endpoint.find("://");
  if (scheme_end == std::string::npos) {
    throw std::invalid_argument("endpoint missing scheme: " + endpoint);
  }
  out.scheme = endpoint.substr(0, scheme_end);
  std::string rest = endpoint.substr(scheme_end + 3);
  if (out.scheme == "mock") {
    out.mock_script = rest;
    return out;
  }
  auto path_start = rest.find('/');
  std::string authority = path_start == std::string::npos ? rest : rest.substr(0, path_start);
  out.path = path_start == std::string::npos ? "/" : rest.substr(path_start);
  out.origin = out.scheme + "://" + authority;
  return out;
}

json wire_body(const ChatRequest& request, bool stream) {
  json messages = json::array();
  for (const auto& m : request.messages) {
    messages.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  }
  json body{{"model", request.model_id}, {"messages", messages}, {"stream", stream}};
  if (request.max_tokens > 0) body["max_tokens"] = request.max_tokens;
  if (request.temperature) body["temperature"] = *request.temperature;
  if (stream) body["stream_options"] = {{"include_usage", true}};
  return body;
}

/// Drives termination/counting decisions from transport events, shared by
/// the HTTP and mock paths.
class StreamAccumulator {
 public:
  StreamAccumulator(std::int64_t token_budget, Clock::time_point deadline)
      : budget_(token_budget), deadline_(deadline) {}

  // Transport sink; returning false aborts the upstream connection.
  bool on_event(const StreamEvent& ev) {
    if (Clock::now() >= deadline_) {
      timed_out_ = true;
      return false;
    }
    switch (ev.kind) {
      case StreamEvent::Kind::content:
        if (!ev.text.empty()) {
          text_ += ev.text;
          counted_tokens_ += count_tokens(ev.text);
          if (counted_tokens_ >= budget_) {
            budget_hit_ = true;
            return false;
          }
        }
        return true;
      case StreamEvent::Kind::usage:
        saw_usage_ = true;
        usage_prompt_ = ev.prompt_tokens;
        usage_completion_ = ev.completion_tokens;
        return true;
      case StreamEvent::Kind::done:
        saw_done_ = true;
        finish_reason_ = ev.finish_reason;
        return false;
      case StreamEvent::Kind::error:
        saw_error_ = true;
        error_detail_ = ev.detail;
        return false;
    }
    return true;
  }

  void on_transport_error(const std::string& detail) {
    if (saw_done_ || saw_error_ || budget_hit_ || timed_out_) return;
    if (Clock::now() >= deadline_) {
      timed_out_ = true;
    } else {
      saw_error_ = true;
      error_detail_ = detail;
    }
  }

  bool reached_terminal_state() const {
    return saw_done_ || saw_error_ || budget_hit_ || timed_out_;
  }

  CompletionResult finalize(const ChatRequest& request) const {
    CompletionResult out;
    out.model_id = request.model_id;
    out.text = text_;
    if (saw_error_) {
      out.termination = Termination::error;
      out.error_detail = error_detail_;
    } else if (timed_out_) {
      out.termination = Termination::timeout;
      out.error_detail = "deadline exceeded";
    } else if (budget_hit_) {
      out.termination = Termination::budget_reached;
    } else if (saw_done_) {
      std::int64_t completion = saw_usage_ ? usage_completion_ : counted_tokens_;
      out.termination = completion >= budget_ ? Termination::budget_reached
                                              : Termination::model_finished;
    } else {
      out.termination = Termination::error;
      out.error_detail = "stream ended without completion";
    }
    // A cancelled stream never sees the trailing usage record; billing
    // falls back to the chunk count.
    if (saw_usage_ && !budget_hit_) {
      out.prompt_tokens = usage_prompt_;
      out.completion_tokens = usage_completion_;
      out.estimated_usage = false;
    } else {
      out.prompt_tokens = estimate_prompt_tokens(request.messages);
      out.completion_tokens = counted_tokens_;
      out.estimated_usage = true;
    }
    return out;
  }

 private:
  std::int64_t budget_;
  Clock::time_point deadline_;
  std::string text_;
  std::int64_t counted_tokens_ = 0;
  bool budget_hit_ = false;
  bool timed_out_ = false;
  bool saw_done_ = false;
  bool saw_error_ = false;
  bool saw_usage_ = false;
  std::int64_t usage_prompt_ = 0;
  std::int64_t usage_completion_ = 0;
  std::string finish_reason_;
  std::string error_detail_;
};

/// Incremental server-sent-events parser. Emits one StreamEvent per data
/// frame; comment and event-name lines are ignored.
class SseParser {
 public:
  explicit SseParser(const EventSink& sink) : sink_(sink) {}

  // Returns false once the sink aborts or the stream is terminal.
  bool feed(const char* data, std::size_t length) {
    buffer_.append(data, length);
    std::size_t line_start = 0;
    while (true) {
      auto newline = buffer_.find('\n', line_start);
      if (newline == std::string::npos) break;
      std::string line = buffer_.substr(line_start, newline - line_start);
      line_start = newline + 1;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!handle_line(line)) {
        buffer_.clear();
        return false;
      }
    }
    buffer_.erase(0, line_start);
    return true;
  }

  // Some gateways close the stream after the final finish_reason frame
  // without a [DONE]; treat that as completion.
  void finish_if_terminated() {
    if (!finish_reason_.empty()) {
      StreamEvent done;
      done.kind = StreamEvent::Kind::done;
      done.finish_reason = finish_reason_;
      sink_(done);
    }
  }

 private:
  bool handle_line(const std::string& line) {
    if (line.empty() || line[0] == ':') return true;
    if (line.rfind("data:", 0) != 0) return true;  // event:/id: fields
    std::string payload = line.substr(5);
    if (!payload.empty() && payload.front() == ' ') payload.erase(0, 1);
    if (payload == "[DONE]") {
      StreamEvent done;
      done.kind = StreamEvent::Kind::done;
      done.finish_reason = finish_reason_;
      sink_(done);
      return false;
    }
    json frame = json::parse(payload, nullptr, false);
    if (frame.is_discarded()) {
      StreamEvent ev;
      ev.kind = StreamEvent::Kind::error;
      ev.detail = "malformed stream frame";
      sink_(ev);
      return false;
    }
    if (frame.contains("error")) {
      StreamEvent ev;
      ev.kind = StreamEvent::Kind::error;
      ev.detail = frame["error"].is_object()
                      ? frame["error"].value("message", frame["error"].dump())
                      : frame["error"].dump();
      sink_(ev);
      return false;
    }
    if (frame.contains("usage") && frame["usage"].is_object()) {
      StreamEvent ev;
      ev.kind = StreamEvent::Kind::usage;
      ev.prompt_tokens = frame["usage"].value("prompt_tokens", std::int64_t{0});
      ev.completion_tokens = frame["usage"].value("completion_tokens", std::int64_t{0});
      if (!sink_(ev)) return false;
    }
    if (frame.contains("choices") && frame["choices"].is_array() && !frame["choices"].empty()) {
      const auto& choice = frame["choices"][0];
      if (choice.contains("finish_reason") && choice["finish_reason"].is_string()) {
        finish_reason_ = choice["finish_reason"].get<std::string>();
      }
      if (choice.contains("delta") && choice["delta"].contains("content") &&
          choice["delta"]["content"].is_string()) {
        StreamEvent ev;
        ev.kind = StreamEvent::Kind::content;
        ev.text = choice["delta"]["content"].get<std::string>();
        if (!sink_(ev)) return false;
      }
    }
    return true;
  }

  const EventSink& sink_;
  std::string buffer_;
  std::string finish_reason_;
};

void set_timeouts(httplib::Client& cli, Millis timeout) {
  auto secs = timeout.count() / 1000;
  auto usecs = (timeout.count() % 1000) * 1000;
  cli.set_connection_timeout(secs, usecs);
  cli.set_read_timeout(secs, usecs);
  cli.set_write_timeout(secs, usecs);
}

void apply_auth(httplib::Request& req, const ModelSpec& model) {
  if (model.api_key_env.empty()) return;
  const char* key = std::getenv(model.api_key_env.c_str());
  if (key != nullptr && *key != '\0') {
    req.set_header("Authorization", std::string("Bearer ") + key);
  }
}

std::string excerpt(const std::string& body) {
  constexpr std::size_t kMax = 200;
  if (body.size() <= kMax) return body;
  return body.substr(0, kMax) + "...";
}

}  // namespace

ModelClient::ModelClient(ClientOptions options) : options_(std::move(options)) {}

CompletionResult ModelClient::run_stream_once(const ModelSpec& model, const ChatRequest& request,
                                              std::int64_t token_budget, Millis timeout) const {
  auto start = Clock::now();
  auto deadline = start + timeout;
  StreamAccumulator acc(token_budget, deadline);
  EventSink sink = [&acc](const StreamEvent& ev) { return acc.on_event(ev); };

  ParsedUrl url;
  try {
    url = parse_endpoint(model.endpoint);
  } catch (const std::exception& e) {
    acc.on_transport_error(e.what());
    auto out = acc.finalize(request);
    out.latency = std::chrono::duration_cast<Millis>(Clock::now() - start);
    return out;
  }

  if (!url.mock_script.empty()) {
    if (options_.mocks == nullptr || !options_.mocks->has_script(url.mock_script)) {
      acc.on_transport_error("no mock script registered for " + model.endpoint);
    } else {
      options_.mocks->stream(url.mock_script, request, deadline, sink);
      acc.on_transport_error("stream ended without completion");
    }
  } else if (url.scheme == "http" || url.scheme == "https") {
#ifndef BOOTROUTE_HAVE_OPENSSL
    if (url.scheme == "https") {
      acc.on_transport_error("https support not built (OpenSSL unavailable)");
      auto out = acc.finalize(request);
      out.latency = std::chrono::duration_cast<Millis>(Clock::now() - start);
      return out;
    }
#endif
    httplib::Client cli(url.origin);
    set_timeouts(cli, timeout);
    httplib::Request req;
    req.method = "POST";
    req.path = url.path;
    req.set_header("Content-Type", "application/json");
    req.set_header("Accept", "text/event-stream");
    apply_auth(req, model);
    req.body = wire_body(request, /*stream=*/true).dump();

    int http_status = 0;
    std::string error_body;
    SseParser parser(sink);
    req.response_handler = [&http_status](const httplib::Response& res) {
      http_status = res.status;
      return true;
    };
    req.content_receiver = [&](const char* data, std::size_t length, std::uint64_t,
                               std::uint64_t) {
      if (http_status != 200) {
        error_body.append(data, length);
        return error_body.size() < 65536;
      }
      if (Clock::now() >= deadline) return false;
      return parser.feed(data, length);
    };
    auto result = cli.send(req);
    if (http_status != 0 && http_status != 200) {
      acc.on_transport_error("HTTP " + std::to_string(http_status) + ": " + excerpt(error_body));
    } else if (result.error() != httplib::Error::Success &&
               result.error() != httplib::Error::Canceled) {
      acc.on_transport_error(httplib::to_string(result.error()));
    } else {
      if (!acc.reached_terminal_state()) parser.finish_if_terminated();
      acc.on_transport_error("stream ended without completion");
    }
  } else {
    acc.on_transport_error("unsupported endpoint scheme: " + url.scheme);
  }

  auto out = acc.finalize(request);
  out.latency = std::chrono::duration_cast<Millis>(Clock::now() - start);
  return out;
}

CompletionResult ModelClient::stream_completion(const ModelSpec& model, const ChatRequest& request,
                                                std::int64_t token_budget, Millis timeout) const {
  if (token_budget < 1) throw std::invalid_argument("token_budget must be >= 1");
  CompletionResult out = run_stream_once(model, request, token_budget, timeout);
  for (int attempt = 0; attempt < options_.transport_retries &&
                        out.termination == Termination::error;
       ++attempt) {
    out = run_stream_once(model, request, token_budget, timeout);
  }
  return out;
}

CompletionResult ModelClient::run_complete_once(const ModelSpec& model, const ChatRequest& request,
                                                std::int64_t max_tokens, Millis timeout) const {
  auto start = Clock::now();
  auto deadline = start + timeout;
  CompletionResult out;
  out.model_id = request.model_id;

  auto finish = [&](Termination t, const std::string& detail) {
    out.termination = t;
    out.error_detail = detail;
    out.latency = std::chrono::duration_cast<Millis>(Clock::now() - start);
    return out;
  };

  ParsedUrl url;
  try {
    url = parse_endpoint(model.endpoint);
  } catch (const std::exception& e) {
    return finish(Termination::error, e.what());
  }

  if (!url.mock_script.empty()) {
    if (options_.mocks == nullptr || !options_.mocks->has_script(url.mock_script)) {
      return finish(Termination::error, "no mock script registered for " + model.endpoint);
    }
    // Collect the scripted reply whole, honoring max_tokens like a real
    // server would (truncation with finish_reason "length"). Any injected
    // error fails the entire non-streamed call.
    std::string text;
    std::int64_t tokens = 0;
    bool truncated = false;
    bool errored = false;
    bool done = false;
    std::string detail;
    std::int64_t usage_prompt = -1;
    EventSink sink = [&](const StreamEvent& ev) {
      switch (ev.kind) {
        case StreamEvent::Kind::content: {
          if (truncated) return true;
          text += ev.text;
          tokens += count_tokens(ev.text);
          if (max_tokens > 0 && tokens >= max_tokens) truncated = true;
          return true;
        }
        case StreamEvent::Kind::usage:
          usage_prompt = ev.prompt_tokens;
          return true;
        case StreamEvent::Kind::done:
          done = true;
          return false;
        case StreamEvent::Kind::error:
          errored = true;
          detail = ev.detail;
          return false;
      }
      return true;
    };
    options_.mocks->stream(url.mock_script, request, deadline, sink);
    if (errored) return finish(Termination::error, detail);
    if (!done) return finish(Termination::timeout, "deadline exceeded");
    out.text = text;
    out.completion_tokens = tokens;
    out.prompt_tokens = usage_prompt >= 0 ? usage_prompt : estimate_prompt_tokens(request.messages);
    out.estimated_usage = usage_prompt < 0;
    return finish(truncated ? Termination::budget_reached : Termination::model_finished, "");
  }

  if (url.scheme != "http" && url.scheme != "https") {
    return finish(Termination::error, "unsupported endpoint scheme: " + url.scheme);
  }
#ifndef BOOTROUTE_HAVE_OPENSSL
  if (url.scheme == "https") {
    return finish(Termination::error, "https support not built (OpenSSL unavailable)");
  }
#endif

  httplib::Client cli(url.origin);
  set_timeouts(cli, timeout);
  httplib::Request req;
  req.method = "POST";
  req.path = url.path;
  req.set_header("Content-Type", "application/json");
  apply_auth(req, model);
  ChatRequest wire_request = request;
  wire_request.max_tokens = max_tokens;
  req.body = wire_body(wire_request, /*stream=*/false).dump();

  auto result = cli.send(req);
  if (!result) {
    bool late = Clock::now() >= deadline;
    return finish(late ? Termination::timeout : Termination::error,
                  late ? "deadline exceeded" : httplib::to_string(result.error()));
  }
  if (result->status != 200) {
    return finish(Termination::error,
                  "HTTP " + std::to_string(result->status) + ": " + excerpt(result->body));
  }
  json body = json::parse(result->body, nullptr, false);
  if (body.is_discarded() || !body.contains("choices") || body["choices"].empty()) {
    return finish(Termination::error, "malformed completion response");
  }
  const auto& choice = body["choices"][0];
  if (choice.contains("message") && choice["message"].contains("content") &&
      choice["message"]["content"].is_string()) {
    out.text = choice["message"]["content"].get<std::string>();
  }
  std::string finish_reason = choice.value("finish_reason", std::string{"stop"});
  if (body.contains("usage") && body["usage"].is_object()) {
    out.prompt_tokens = body["usage"].value("prompt_tokens", std::int64_t{0});
    out.completion_tokens = body["usage"].value("completion_tokens", std::int64_t{0});
    out.estimated_usage = false;
  } else {
    out.prompt_tokens = estimate_prompt_tokens(request.messages);
    out.completion_tokens = count_tokens(out.text);
    out.estimated_usage = true;
  }
  return finish(finish_reason == "length" ? Termination::budget_reached
                                          : Termination::model_finished,
                "");
}

CompletionResult ModelClient::complete(const ModelSpec& model, const ChatRequest& request,
                                       std::int64_t max_tokens, Millis timeout) const {
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  CompletionResult out = run_complete_once(model, request, max_tokens, timeout);
  for (int attempt = 0; attempt < options_.transport_retries &&
                        out.termination == Termination::error;
       ++attempt) {
    out = run_complete_once(model, request, max_tokens, timeout);
  }
  return out;
}

std::vector<BootResponse> ModelClient::dispatch_boot(const Query& query,
                                                     const std::vector<ModelSpec>& models,
                                                     std::int64_t boot_budget, Millis timeout,
                                                     std::optional<double> temperature) const {
  if (models.empty()) throw std::invalid_argument("dispatch_boot over empty model list");
  std::vector<BootResponse> out(models.size());
  std::vector<std::thread> workers;
  workers.reserve(models.size());
  for (std::size_t i = 0; i < models.size(); ++i) {
    workers.emplace_back([this, &query, &models, &out, i, boot_budget, timeout, temperature] {
      ChatRequest request;
      request.model_id = models[i].model_id;
      request.messages = {{Role::user, query.text}};
      request.max_tokens = boot_budget;
      request.stream = true;
      request.temperature = temperature;
      request.session_key = query.query_id;
      out[i] = stream_completion(models[i], request, boot_budget, timeout);
    });
  }
  for (auto& w : workers) w.join();
  bool any_usable = false;
  for (const auto& r : out) any_usable = any_usable || r.usable();
  if (!any_usable) throw AllCandidatesFailed(out);
  return out;
}

FullResponse ModelClient::complete_full(const ModelSpec& model, const ChatRequest& request,
                                        std::int64_t max_final_tokens, Millis timeout) const {
  ChatRequest streamed = request;
  streamed.stream = true;
  streamed.max_tokens = max_final_tokens;
  return stream_completion(model, streamed, max_final_tokens, timeout);
}

}  // namespace bootroute
