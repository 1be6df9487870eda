#include "bootroute/mock.hpp"

#include <fstream>
#include <stdexcept>
#include <thread>

namespace bootroute {

namespace {

using Clock = std::chrono::steady_clock;

// Sleeps in slices so a deadline can cut a scripted delay short.
// Returns false when the deadline passed.
bool sliced_sleep(int delay_ms, Clock::time_point deadline) {
  auto until = Clock::now() + std::chrono::milliseconds(delay_ms);
  while (Clock::now() < until) {
    if (Clock::now() >= deadline) return false;
    auto remaining = until - Clock::now();
    auto slice = std::min<Clock::duration>(remaining, std::chrono::milliseconds(5));
    std::this_thread::sleep_for(slice);
  }
  return Clock::now() < deadline;
}

}  // namespace

void MockBackend::load(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("scripts") || !doc.at("scripts").is_object()) {
    throw std::invalid_argument("mock script file must carry a 'scripts' object");
  }
  int version = doc.value("version", 1);
  if (version != 1) {
    throw std::invalid_argument("unsupported mock script version " + std::to_string(version));
  }
  std::lock_guard<std::mutex> lock(mutex_);
  for (auto it = doc.at("scripts").begin(); it != doc.at("scripts").end(); ++it) {
    const auto& body = it.value();
    if (!body.contains("replies") || !body.at("replies").is_array() ||
        body.at("replies").empty()) {
      throw std::invalid_argument("mock script '" + it.key() + "' needs a non-empty replies array");
    }
    std::vector<Reply> replies;
    for (const auto& r : body.at("replies")) {
      Reply reply;
      reply.chunks = r.at("chunks").get<std::vector<std::string>>();
      reply.delay_ms = r.value("delay_ms", 0);
      reply.chunk_delay_ms = r.value("chunk_delay_ms", 0);
      if (r.contains("error_at") && !r.at("error_at").is_null()) {
        reply.error_at = r.at("error_at").get<std::size_t>();
        if (*reply.error_at < 1) {
          throw std::invalid_argument("mock script '" + it.key() + "': error_at is 1-based");
        }
      }
      reply.error_detail = r.value("error_detail", std::string{"scripted error"});
      reply.finish_reason = r.value("finish_reason", std::string{"stop"});
      reply.report_usage = r.value("report_usage", true);
      reply.when_contains = r.value("when_contains", std::string{});
      replies.push_back(std::move(reply));
    }
    scripts_[it.key()] = std::move(replies);
  }
}

void MockBackend::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open mock script file: " + path);
  nlohmann::json doc;
  in >> doc;
  load(doc);
}

bool MockBackend::has_script(const std::string& name) const {
  return scripts_.count(name) > 0;
}

const MockBackend::Reply& MockBackend::pick_reply(const std::string& script,
                                                  const ChatRequest& request) {
  auto it = scripts_.find(script);
  if (it == scripts_.end()) {
    throw std::out_of_range("no mock script named '" + script + "'");
  }
  std::string request_text;
  for (const auto& m : request.messages) {
    request_text += m.content;
    request_text += '\n';
  }
  // Matching conditional replies shadow the unconditional ones, so a single
  // script can serve a model playing several roles (candidate, selector,
  // aggregator) keyed on prompt shape.
  std::vector<const Reply*> eligible;
  for (const auto& reply : it->second) {
    if (!reply.when_contains.empty() &&
        request_text.find(reply.when_contains) != std::string::npos) {
      eligible.push_back(&reply);
    }
  }
  bool conditional = !eligible.empty();
  if (!conditional) {
    for (const auto& reply : it->second) {
      if (reply.when_contains.empty()) eligible.push_back(&reply);
    }
  }
  if (eligible.empty()) {
    throw std::out_of_range("mock script '" + script + "' has no reply matching the request");
  }
  std::lock_guard<std::mutex> lock(mutex_);
  if (capture_) captured_[script].push_back(request);
  std::size_t& count = call_counts_[request.session_key + '\x1f' + script +
                                    (conditional ? "\x1f c" : "\x1f u")];
  std::size_t index = std::min(count, eligible.size() - 1);
  ++count;
  return *eligible[index];
}

void MockBackend::stream(const std::string& script, const ChatRequest& request,
                         Clock::time_point deadline, const EventSink& sink) {
  const Reply& reply = pick_reply(script, request);
  if (reply.delay_ms > 0 && !sliced_sleep(reply.delay_ms, deadline)) return;

  std::int64_t emitted_tokens = 0;
  std::size_t index = 0;
  for (const auto& chunk : reply.chunks) {
    ++index;
    if (reply.error_at && index == *reply.error_at) {
      StreamEvent ev;
      ev.kind = StreamEvent::Kind::error;
      ev.detail = reply.error_detail;
      sink(ev);
      return;
    }
    if (reply.chunk_delay_ms > 0 && !sliced_sleep(reply.chunk_delay_ms, deadline)) return;
    if (Clock::now() >= deadline) return;
    StreamEvent ev;
    ev.kind = StreamEvent::Kind::content;
    ev.text = chunk;
    emitted_tokens += count_tokens(chunk);
    if (!sink(ev)) return;  // client cancelled
  }
  if (reply.report_usage) {
    StreamEvent usage;
    usage.kind = StreamEvent::Kind::usage;
    usage.prompt_tokens = estimate_prompt_tokens(request.messages);
    usage.completion_tokens = emitted_tokens;
    if (!sink(usage)) return;
  }
  StreamEvent done;
  done.kind = StreamEvent::Kind::done;
  done.finish_reason = reply.finish_reason;
  sink(done);
}

void MockBackend::reset_sessions() {
  std::lock_guard<std::mutex> lock(mutex_);
  call_counts_.clear();
  captured_.clear();
}

void MockBackend::set_capture(bool on) {
  std::lock_guard<std::mutex> lock(mutex_);
  capture_ = on;
}

std::vector<ChatRequest> MockBackend::captured(const std::string& script) const {
  std::lock_guard<std::mutex> lock(mutex_);
  auto it = captured_.find(script);
  return it == captured_.end() ? std::vector<ChatRequest>{} : it->second;
}

}  // namespace bootroute
