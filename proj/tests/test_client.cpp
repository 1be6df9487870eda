#include <doctest.h>

#include <chrono>

#include "bootroute/client.hpp"
#include "helpers.hpp"

using namespace bootroute;
using namespace testutil;
using nlohmann::json;

TEST_SUITE_BEGIN("client");

namespace {

ChatRequest user_request(const std::string& model_id, const std::string& text,
                         const std::string& session = "s1") {
  ChatRequest req;
  req.model_id = model_id;
  req.messages = {{Role::user, text}};
  req.stream = true;
  req.session_key = session;
  return req;
}

constexpr Millis kTimeout{5'000};

}  // namespace

TEST_CASE("budget cancellation stops a long stream at chunk granularity") {
  json scripts{{"scripts", {{"m", {{"replies", json::array({long_reply(1000, 7)})}}}}}};
  auto client = make_client(scripts);
  auto result = client.stream_completion(mock_model("m"), user_request("m", "q"), 200, kTimeout);
  CHECK(result.termination == Termination::budget_reached);
  CHECK(result.completion_tokens >= 200);
  CHECK(result.completion_tokens < 200 + 7);
  CHECK(result.estimated_usage);  // cancelled streams never see the usage record
  CHECK(count_tokens(result.text) == result.completion_tokens);
}

TEST_CASE("a stream shorter than the budget finishes naturally") {
  json scripts{{"scripts", {{"m", {{"replies", json::array({long_reply(50, 7)})}}}}}};
  auto client = make_client(scripts);
  auto result = client.stream_completion(mock_model("m"), user_request("m", "q"), 200, kTimeout);
  CHECK(result.termination == Termination::model_finished);
  CHECK(result.completion_tokens == 50);
  CHECK_FALSE(result.estimated_usage);  // provider usage record consumed
}

TEST_CASE("scripted error surfaces with the partial prefix") {
  json reply{{"chunks", json::array({" one", " two", " three", " four"})}, {"error_at", 3}};
  json scripts{{"scripts", {{"m", {{"replies", json::array({reply})}}}}}};
  auto client = make_client(scripts);
  auto result = client.stream_completion(mock_model("m"), user_request("m", "q"), 100, kTimeout);
  CHECK(result.termination == Termination::error);
  CHECK(result.text == " one two");  // first two chunks only
  CHECK_FALSE(result.error_detail.empty());
}

TEST_CASE("a stalled mock times out near the deadline") {
  json reply = long_reply(20, 5);
  reply["delay_ms"] = 500;
  json scripts{{"scripts", {{"m", {{"replies", json::array({reply})}}}}}};
  auto client = make_client(scripts);
  auto start = std::chrono::steady_clock::now();
  auto result =
      client.stream_completion(mock_model("m"), user_request("m", "q"), 100, Millis{100});
  auto elapsed = std::chrono::steady_clock::now() - start;
  CHECK(result.termination == Termination::timeout);
  CHECK(std::chrono::duration_cast<Millis>(elapsed).count() < 400);
}

TEST_CASE("unknown scripts and schemes disqualify instead of throwing") {
  auto client = make_client(json{{"scripts", {{"m", {{"replies", json::array({text_reply("x")})}}}}}});
  auto r1 = client.stream_completion(mock_model("ghost"), user_request("ghost", "q"), 10, kTimeout);
  CHECK(r1.termination == Termination::error);

  ModelSpec weird = mock_model("m");
  weird.endpoint = "ftp://nope/chat";
  auto r2 = client.stream_completion(weird, user_request("m", "q"), 10, kTimeout);
  CHECK(r2.termination == Termination::error);
}

TEST_CASE("budget monotonicity over a shared script") {
  json scripts{{"scripts", {{"m", {{"replies", json::array({long_reply(600, 9)})}}}}}};
  std::int64_t previous = 0;
  for (std::int64_t budget : {1, 10, 100, 250, 400, 599, 600, 900}) {
    auto client = make_client(scripts);
    auto result =
        client.stream_completion(mock_model("m"), user_request("m", "q"), budget, kTimeout);
    CHECK(result.completion_tokens >= previous);
    previous = result.completion_tokens;
  }
}

TEST_CASE("identical scripts and requests yield byte-identical responses") {
  json scripts = default_scripts(300, 8);
  auto run = [&] {
    auto client = make_client(scripts);
    return client.stream_completion(mock_model("alpha"), user_request("alpha", "same question"),
                                    120, kTimeout);
  };
  auto a = run();
  auto b = run();
  CHECK(a.text == b.text);
  CHECK(a.completion_tokens == b.completion_tokens);
  CHECK(a.prompt_tokens == b.prompt_tokens);
  CHECK(a.termination == b.termination);
}

TEST_CASE("dispatch_boot probes every model concurrently, order preserved") {
  json scripts;
  for (const std::string& id : {"a", "b", "c", "d", "e"}) {
    json reply = long_reply(400, 8, id);
    reply["chunk_delay_ms"] = 1;
    scripts[id] = {{"replies", json::array({reply})}};
  }
  auto client = make_client(json{{"scripts", scripts}});
  std::vector<ModelSpec> models;
  for (const std::string& id : {"a", "b", "c", "d", "e"}) models.push_back(mock_model(id));
  Query query{"the question", {}, "q7"};

  auto start = std::chrono::steady_clock::now();
  auto boots = client.dispatch_boot(query, models, 200, kTimeout);
  auto wall = std::chrono::duration_cast<Millis>(std::chrono::steady_clock::now() - start);

  REQUIRE(boots.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(boots[i].model_id == models[i].model_id);
    CHECK(boots[i].completion_tokens <= 200 + 8);
  }
  // ~25 chunks x 1ms each serially per model; five models in parallel should
  // land near one model's time, not five.
  CHECK(wall.count() < 3 * 25 * 1 + 300);
}

TEST_CASE("dispatch_boot keeps per-model failures embedded") {
  json reply = long_reply(40, 4);
  reply["delay_ms"] = 400;
  json scripts{{"scripts",
                {{"ok1", {{"replies", json::array({long_reply(40, 4)})}}},
                 {"slow", {{"replies", json::array({reply})}}},
                 {"ok2", {{"replies", json::array({long_reply(40, 4)})}}}}}};
  auto client = make_client(scripts);
  std::vector<ModelSpec> models{mock_model("ok1"), mock_model("slow"), mock_model("ok2")};
  Query query{"q", {}, "q1"};
  auto boots = client.dispatch_boot(query, models, 100, Millis{120});
  REQUIRE(boots.size() == 3);
  CHECK(boots[0].termination == Termination::model_finished);
  CHECK(boots[1].termination == Termination::timeout);
  CHECK(boots[2].termination == Termination::model_finished);
}

TEST_CASE("dispatch_boot with a single model preserves the singleton") {
  auto client = make_client(default_scripts());
  Query query{"q", {}, "q1"};
  auto boots = client.dispatch_boot(query, {mock_model("alpha")}, 50, kTimeout);
  REQUIRE(boots.size() == 1);
  CHECK(boots[0].model_id == "alpha");
}

TEST_CASE("dispatch_boot fails only when every candidate fails") {
  json scripts{{"scripts",
                {{"bad1", {{"replies", json::array({error_reply(1)})}}},
                 {"bad2", {{"replies", json::array({error_reply(1)})}}}}}};
  auto client = make_client(scripts);
  Query query{"q", {}, "q1"};
  CHECK_THROWS_AS(
      client.dispatch_boot(query, {mock_model("bad1"), mock_model("bad2")}, 50, kTimeout),
      AllCandidatesFailed);
}

TEST_CASE("complete_full returns whole short answers and truncates long ones") {
  json scripts{{"scripts",
                {{"short", {{"replies", json::array({long_reply(300, 8)})}}},
                 {"long", {{"replies", json::array({long_reply(9000, 8)})}}},
                 {"bad", {{"replies", json::array({error_reply(1)})}}}}}};
  auto client = make_client(scripts);

  auto whole = client.complete_full(mock_model("short"), user_request("short", "q"), 4096,
                                    kTimeout);
  CHECK(whole.termination == Termination::model_finished);
  CHECK(whole.completion_tokens == 300);

  auto truncated =
      client.complete_full(mock_model("long"), user_request("long", "q"), 4096, kTimeout);
  CHECK(truncated.termination == Termination::budget_reached);
  CHECK(truncated.completion_tokens >= 4096);
  CHECK(truncated.completion_tokens < 4096 + 8);

  auto errored = client.complete_full(mock_model("bad"), user_request("bad", "q"), 64, kTimeout);
  CHECK(errored.termination == Termination::error);
}

TEST_CASE("non-streaming complete honors max_tokens like a server") {
  json scripts{{"scripts", {{"m", {{"replies", json::array({long_reply(100, 5)})}}}}}};
  auto client = make_client(scripts);
  ChatRequest req = user_request("m", "q");
  req.stream = false;

  auto full = client.complete(mock_model("m"), req, 512, kTimeout);
  CHECK(full.termination == Termination::model_finished);
  CHECK(full.completion_tokens == 100);

  auto capped = client.complete(mock_model("m"), req, 30, kTimeout);
  CHECK(capped.termination == Termination::budget_reached);
  CHECK(capped.completion_tokens >= 30);
  CHECK(capped.completion_tokens < 35);
}

TEST_SUITE_END();
