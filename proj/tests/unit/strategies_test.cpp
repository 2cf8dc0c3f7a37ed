#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "mot/strategies.hpp"
#include "test_support.hpp"

namespace mot {
namespace {

const char* kGraph = R"({"task_analysis": {"goal": "add two numbers", "io_spec": "two ints -> int", "constraints": ""},
 "nodes": [
  {"id": "H1", "level": "high", "title": "Add the inputs", "children": ["M1", "M2"]},
  {"id": "M1", "level": "intermediate", "title": "Validate", "children": ["D1"]},
  {"id": "M2", "level": "intermediate", "title": "Sum", "children": ["D2", "D3"]},
  {"id": "D1", "level": "detailed", "title": "check ints", "children": []},
  {"id": "D2", "level": "detailed", "title": "compute x + y", "children": []},
  {"id": "D3", "level": "detailed", "title": "return it", "children": []}]})";

// Skips a level, so it parses but does not validate.
const char* kInvalidGraph = R"({"nodes": [
  {"id": "H1", "level": "high", "title": "a", "children": ["D1"]},
  {"id": "D1", "level": "detailed", "title": "b", "children": []}]})";

const char* kProse = "I would add the two numbers together.";

const char* kCode = "```python\ndef add(x, y):\n    return x + y\n```";

Problem add_problem() {
  Problem p;
  p.task_id = "Sample/0";
  p.description = "def add(x: int, y: int) -> int:\n    \"\"\"Add two numbers x and y.\"\"\"\n";
  p.entry_point = "add";
  p.suite.cases = {"assert candidate(1, 2) == 3"};
  return p;
}

ScriptedClient script(std::vector<std::string> replies) {
  std::vector<ScriptedClient::Reply> out;
  for (auto& r : replies) out.push_back({std::move(r), {100, 10}});
  return ScriptedClient(std::move(out));
}

std::vector<std::string> purposes(const GenerationRecord& r) {
  std::vector<std::string> out;
  for (const auto& c : r.calls) out.push_back(c.purpose);
  return out;
}

// Fails the first `failing_rounds` self-test requests, then passes.
class CountingBackend : public ExecutionBackend {
 public:
  explicit CountingBackend(int failing_rounds, bool unavailable = false)
      : failing_(failing_rounds), unavailable_(unavailable) {}
  ExecReport run(const ExecRequest& request) override {
    ids.push_back(request.id);
    if (unavailable_) throw BackendUnavailable("down");
    ExecReport r;
    r.id = request.id;
    bool pass = static_cast<int>(ids.size()) > failing_;
    for (std::size_t i = 0; i < request.cases.size(); ++i) {
      r.results.push_back({pass ? CaseStatus::Pass : CaseStatus::Fail, pass ? "" : "AssertionError"});
    }
    return r;
  }
  std::vector<std::string> ids;

 private:
  int failing_;
  bool unavailable_;
};

TEST(Strategies, NamesRoundTrip) {
  for (auto id : kAllStrategies) EXPECT_EQ(parse_strategy(strategy_name(id)), id);
  EXPECT_FALSE(parse_strategy("MoT"));
}

TEST(Strategies, DocumentedCallBounds) {
  EXPECT_EQ(max_calls(StrategyId::Mot), 4);
  EXPECT_EQ(max_calls(StrategyId::MotNoModularization), 4);
  EXPECT_EQ(max_calls(StrategyId::CodeCot), 4);
  EXPECT_EQ(max_calls(StrategyId::SelfPlanning), 2);
  EXPECT_EQ(max_calls(StrategyId::Scot), 2);
  for (auto id : {StrategyId::ZeroShot, StrategyId::FewShot, StrategyId::Cot, StrategyId::MotNoGraph}) {
    EXPECT_EQ(max_calls(id), 1);
  }
  EXPECT_EQ(max_calls(StrategyId::Mot, 0), 2);
  EXPECT_EQ(max_calls(StrategyId::CodeCot, 2, 1), 2);
}

TEST(Strategies, SingleCallStrategies) {
  auto p = add_problem();
  for (auto id : {StrategyId::ZeroShot, StrategyId::FewShot, StrategyId::Cot, StrategyId::MotNoGraph}) {
    auto client = script({kCode});
    auto rec = generate(id, p, client, nullptr);
    EXPECT_EQ(rec.calls.size(), 1u) << strategy_name(id);
    EXPECT_EQ(rec.extracted_code, "def add(x, y):\n    return x + y\n");
    EXPECT_EQ(rec.strategy, id);
    EXPECT_FALSE(rec.parsed_graph);
  }
}

TEST(Strategies, TwoStageBaselinesFeedStageOneIntoStageTwo) {
  auto p = add_problem();
  for (auto id : {StrategyId::SelfPlanning, StrategyId::Scot}) {
    auto client = script({"PLAN-MARKER: add them", kCode});
    auto rec = generate(id, p, client, nullptr);
    ASSERT_EQ(rec.calls.size(), 2u);
    // Stage one comes back as the assistant turn of a follow-up conversation.
    const auto& msgs = rec.calls[1].prompt.messages;
    ASSERT_GE(msgs.size(), 3u);
    EXPECT_EQ(msgs[msgs.size() - 2].role, Role::Assistant);
    EXPECT_NE(msgs[msgs.size() - 2].content.find("PLAN-MARKER"), std::string::npos);
  }
}

TEST(Strategies, RequestsCarryModelAndTokenCap) {
  auto client = script({kCode});
  GenerateOptions opts;
  opts.model = "m-1";
  opts.max_output_tokens = 77;
  generate(StrategyId::ZeroShot, add_problem(), client, nullptr, opts);
  ASSERT_EQ(client.requests().size(), 1u);
  EXPECT_EQ(client.requests()[0].model, "m-1");
  EXPECT_EQ(client.requests()[0].max_output_tokens, 77);
}

TEST(Mot, GraphThenCode) {
  auto client = script({kGraph, kCode});
  auto rec = generate(StrategyId::Mot, add_problem(), client, nullptr);
  EXPECT_EQ(purposes(rec), (std::vector<std::string>{"graph", "code"}));
  ASSERT_TRUE(rec.parsed_graph);
  EXPECT_EQ(rec.parsed_graph->graph.size(), 6u);
  EXPECT_FALSE(rec.fallback_used);
  EXPECT_TRUE(rec.graph_issues.empty());
  // Phase 2 sees the graph.
  EXPECT_NE(rec.calls[1].prompt.messages.back().content.find("compute x + y"), std::string::npos);
  EXPECT_EQ(rec.total_usage().in_tokens, 200);
}

TEST(Mot, RetriesWithFeedbackThenSucceeds) {
  auto client = script({kProse, kInvalidGraph, kGraph, kCode});
  auto rec = generate(StrategyId::Mot, add_problem(), client, nullptr);
  EXPECT_EQ(purposes(rec), (std::vector<std::string>{"graph", "graph_retry", "graph_retry", "code"}));
  EXPECT_EQ(rec.graph_issues.size(), 2u);
  EXPECT_TRUE(rec.parsed_graph);
  // Each retry is a follow-up turn that contains the rejected answer.
  EXPECT_GT(rec.calls[1].prompt.messages.size(), rec.calls[0].prompt.messages.size());
  bool quoted = false;
  for (const auto& m : rec.calls[2].prompt.messages) quoted |= m.content.find(kProse) != std::string::npos;
  EXPECT_TRUE(quoted);
}

TEST(Mot, FallsBackAfterTwoRetries) {
  auto client = script({kProse, kInvalidGraph, kProse, kCode});
  auto rec = generate(StrategyId::Mot, add_problem(), client, nullptr);
  EXPECT_EQ(purposes(rec), (std::vector<std::string>{"graph", "graph_retry", "graph_retry", "fallback_code"}));
  EXPECT_EQ(static_cast<int>(rec.calls.size()), max_calls(StrategyId::Mot));
  EXPECT_TRUE(rec.fallback_used);
  EXPECT_FALSE(rec.parsed_graph);
  EXPECT_EQ(rec.graph_issues.size(), 3u);
  EXPECT_EQ(rec.calls[3].prompt, build_modular_no_graph_prompt(add_problem()));
  EXPECT_EQ(client.remaining(), 0u);
}

TEST(Mot, NoModularizationFallsBackToPlainPrompt) {
  auto client = script({kProse, kProse, kProse, kCode});
  auto rec = generate(StrategyId::MotNoModularization, add_problem(), client, nullptr);
  EXPECT_TRUE(rec.fallback_used);
  EXPECT_EQ(rec.calls.back().prompt, build_zero_shot_prompt(add_problem()));
}

TEST(Mot, NoModularizationAsksForOneFunction) {
  auto p = add_problem();
  auto client = script({kGraph, kCode});
  auto rec = generate(StrategyId::MotNoModularization, p, client, nullptr);
  ASSERT_TRUE(rec.parsed_graph);
  EXPECT_EQ(rec.calls[0].prompt, build_graph_prompt(p));
  EXPECT_EQ(rec.calls[1].prompt,
            build_monolithic_code_prompt(p, rec.parsed_graph->graph, rec.parsed_graph->task));
}

TEST(Mot, UnrecoverableWhenFallbackIsEmptyButCallsAreKept) {
  auto client = script({kProse, kProse, kProse, "   "});
  GenerationRecord rec;
  try {
    generate_into(rec, StrategyId::Mot, add_problem(), client, nullptr);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::GraphUnrecoverable);
  }
  EXPECT_EQ(rec.calls.size(), 4u);
  EXPECT_EQ(rec.total_usage().out_tokens, 40);
}

TEST(Mot, PerNodePhaseTwoMakesOneCallPerPath) {
  auto client = script({kGraph, kCode, kCode, kCode});
  GenerateOptions opts;
  opts.per_node_phase2 = true;
  auto rec = generate(StrategyId::Mot, add_problem(), client, nullptr, opts);
  // H1-M1-D1, H1-M2-D2, H1-M2-D3.
  EXPECT_EQ(purposes(rec), (std::vector<std::string>{"graph", "node_code", "node_code", "node_code"}));
  EXPECT_FALSE(rec.extracted_code.empty());
}

TEST(Mot, RunningOutOfRepliesIsAProviderError) {
  auto client = script({kGraph});
  try {
    generate(StrategyId::Mot, add_problem(), client, nullptr);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_EQ(e.kind(), ProviderErrorKind::MissingFixture);
  }
}

TEST(Extraction, EmptyCandidate) {
  auto client = script({"\n  \n"});
  try {
    generate(StrategyId::ZeroShot, add_problem(), client, nullptr);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::EmptyCandidate);
  }
}

const char* kCodeCotReply =
    "```python\ndef add(x, y):\n    return x - y\n```\nTests:\n```python\nassert add(1, 2) == 3\nassert add(0, 0) == 0\n```";

TEST(CodeCot, ThreeRepairsAtMost) {
  CountingBackend backend(100);
  auto client = script({kCodeCotReply, kCode, kCode, kCode});
  auto rec = generate(StrategyId::CodeCot, add_problem(), client, &backend);
  EXPECT_EQ(purposes(rec), (std::vector<std::string>{"code", "repair", "repair", "repair"}));
  EXPECT_EQ(static_cast<int>(rec.calls.size()), max_calls(StrategyId::CodeCot));
  EXPECT_EQ(rec.self_test_reports.size(), 4u);
  EXPECT_EQ(backend.ids, (std::vector<std::string>{self_test_request_id("Sample/0", 0), self_test_request_id("Sample/0", 1),
                                                   self_test_request_id("Sample/0", 2), self_test_request_id("Sample/0", 3)}));
  // The repair prompt lists the failing self-test.
  EXPECT_NE(rec.calls[1].prompt.messages.back().content.find("assert add(1, 2) == 3"), std::string::npos);
}

TEST(CodeCot, StopsOnceSelfTestsPass) {
  CountingBackend backend(1);
  auto client = script({kCodeCotReply, kCode});
  auto rec = generate(StrategyId::CodeCot, add_problem(), client, &backend);
  EXPECT_EQ(rec.calls.size(), 2u);
  EXPECT_EQ(rec.self_test_reports.size(), 2u);
  EXPECT_TRUE(solved(rec.self_test_reports.back()));
  EXPECT_EQ(rec.extracted_code, "def add(x, y):\n    return x + y\n");
}

TEST(CodeCot, NoSelfTestsMeansNoRepair) {
  CountingBackend backend(100);
  auto client = script({kCode});
  auto rec = generate(StrategyId::CodeCot, add_problem(), client, &backend);
  EXPECT_EQ(rec.calls.size(), 1u);
  EXPECT_TRUE(backend.ids.empty());
}

TEST(CodeCot, UnavailableBackendKeepsFirstCandidate) {
  CountingBackend backend(0, true);
  auto client = script({kCodeCotReply});
  auto rec = generate(StrategyId::CodeCot, add_problem(), client, &backend);
  EXPECT_EQ(rec.calls.size(), 1u);
  EXPECT_EQ(rec.extracted_code, "def add(x, y):\n    return x - y\n");
}

TEST(CodeCot, NeedsAnExecutor) {
  auto client = script({kCodeCotReply});
  try {
    generate(StrategyId::CodeCot, add_problem(), client, nullptr);
    FAIL();
  } catch (const GenerationError& e) {
    EXPECT_EQ(e.kind(), GenerationError::Kind::MissingExecutor);
  }
  EXPECT_EQ(client.requests().size(), 0u);
}

// Whatever the model says, no strategy exceeds its bound.
TEST(Strategies, CallBoundHoldsForRandomReplies) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pool = {kGraph, kInvalidGraph, kProse, kCode, kCodeCotReply, "", "```\n```"};
  for (int round = 0; round < 300; ++round) {
    for (auto id : kAllStrategies) {
      std::vector<std::string> replies;
      for (int i = 0; i < 10; ++i) replies.push_back(pool[rng() % pool.size()]);
      auto client = script(replies);
      CountingBackend backend(static_cast<int>(rng() % 6));
      GenerationRecord rec;
      try {
        generate_into(rec, id, add_problem(), client, &backend);
      } catch (const GenerationError&) {
      }
      EXPECT_LE(static_cast<int>(rec.calls.size()), max_calls(id)) << strategy_name(id);
      EXPECT_GE(rec.calls.size(), 1u);
    }
  }
}

}  // namespace
}  // namespace mot
