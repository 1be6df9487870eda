#include <doctest.h>

#include "bootroute/aggregator.hpp"
#include "helpers.hpp"

using namespace bootroute;
using namespace testutil;
using nlohmann::json;

TEST_SUITE_BEGIN("aggregator");

namespace {

AggregateInput two_answers() {
  AggregateInput input;
  input.query_text = "what is the capital of France?";
  input.answers = {{"m1", "Paris, clearly."}, {"m2", "It is Paris."}};
  input.layer_index = 1;
  input.session_key = "q1";
  return input;
}

}  // namespace

TEST_CASE("two answers render two positional blocks then the query") {
  std::string prompt = build_aggregate_prompt(two_answers());
  auto first = prompt.find("LLM1's answer: Paris, clearly.");
  auto second = prompt.find("LLM2's answer: It is Paris.");
  auto query = prompt.find("query: what is the capital of France?");
  REQUIRE(first != std::string::npos);
  REQUIRE(second != std::string::npos);
  REQUIRE(query != std::string::npos);
  CHECK(first < second);
  CHECK(second < query);
  CHECK(prompt.find("synthesize these into a single, high-quality response") !=
        std::string::npos);
  CHECK(prompt.find("Critically evaluate the input responses") != std::string::npos);
  CHECK(prompt.find("LLM3") == std::string::npos);
}

TEST_CASE("one answer renders a degenerate single block") {
  AggregateInput input = two_answers();
  input.answers.resize(1);
  std::string prompt = build_aggregate_prompt(input);
  CHECK(prompt.find("LLM1's answer:") != std::string::npos);
  CHECK(prompt.find("LLM2's answer:") == std::string::npos);
}

TEST_CASE("four answers render four blocks in input order") {
  AggregateInput input;
  input.query_text = "q";
  for (int i = 0; i < 4; ++i) {
    input.answers.push_back({"m" + std::to_string(i), "answer number " + std::to_string(i)});
  }
  std::string prompt = build_aggregate_prompt(input);
  std::size_t previous = 0;
  for (int i = 1; i <= 4; ++i) {
    auto pos = prompt.find("LLM" + std::to_string(i) + "'s answer: answer number " +
                           std::to_string(i - 1));
    REQUIRE(pos != std::string::npos);
    CHECK(pos > previous);
    previous = pos;
  }
  CHECK_THROWS(build_aggregate_prompt(AggregateInput{}));
}

TEST_CASE("aggregate returns the scripted synthesis and its token count") {
  json scripts{{"scripts",
                {{"agg", {{"replies", json::array({text_reply("a refined merged answer")})}}}}}};
  auto client = make_client(scripts);
  auto outcome = aggregate(two_answers(), mock_model("agg"), client, 4096, Millis{2000});
  CHECK(outcome.text == "a refined merged answer");
  CHECK(outcome.tokens == 4);
  CHECK_FALSE(outcome.degraded);
  CHECK(outcome.aggregator_calls.size() == 1);
}

TEST_CASE("a single input answer still merges") {
  json scripts{{"scripts",
                {{"agg", {{"replies", json::array({text_reply("echoed: Paris, clearly.")})}}}}}};
  auto client = make_client(scripts);
  AggregateInput input = two_answers();
  input.answers.resize(1);
  auto outcome = aggregate(input, mock_model("agg"), client, 4096, Millis{2000});
  CHECK(outcome.text.find("Paris") != std::string::npos);
  CHECK_FALSE(outcome.degraded);
}

TEST_CASE("two failures degrade to the top-ranked input answer") {
  json scripts{{"scripts",
                {{"agg",
                  {{"replies",
                    json::array({error_reply(1, "boom"), error_reply(1, "boom again")})}}}}}};
  auto client = make_client(scripts);
  AggregateInput input;
  input.query_text = "q";
  input.answers = {{"c", "answer from c"}, {"a", "answer from a"}};
  input.session_key = "q1";
  auto outcome = aggregate(input, mock_model("agg"), client, 4096, Millis{2000});
  CHECK(outcome.degraded);
  CHECK(outcome.text == "answer from c");
  CHECK(outcome.aggregator_calls.size() == 2);  // initial call plus one retry
}

TEST_SUITE_END();
