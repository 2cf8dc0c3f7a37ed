#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <mutex>
#include <random>
#include <set>

#include "mot/run.hpp"
#include "test_support.hpp"

namespace mot {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const char* kGraph = R"({"task_analysis": {"goal": "solve it", "io_spec": "", "constraints": ""},
 "nodes": [
  {"id": "H1", "level": "high", "title": "Solve", "children": ["M1"]},
  {"id": "M1", "level": "intermediate", "title": "Compute", "children": ["D1"]},
  {"id": "D1", "level": "detailed", "title": "return", "children": []}]})";

// Answers by looking at the prompt: graph requests get a graph, anything
// else gets a stub definition of the problem's entry point.
class RuleClient : public ChatClient {
 public:
  explicit RuleClient(std::vector<Problem> problems) : problems_(std::move(problems)) {}

  ChatResponse complete(const ChatRequest& request) override {
    ++calls;
    const Problem* problem = nullptr;
    for (const auto& p : problems_) {
      for (const auto& m : request.messages) {
        if (m.content.find(p.description) != std::string::npos) problem = &p;
      }
    }
    if (!problem) throw ProviderError(ProviderErrorKind::BadRequest, "unknown prompt");
    if (unreachable.count(problem->task_id)) {
      throw ProviderError(ProviderErrorKind::TransientExhausted, "503 from provider", 4);
    }
    if (request.messages == build_graph_prompt(*problem).messages) return {kGraph, {100, 10}};
    if (blank_code.count(problem->task_id)) return {"", {50, 0}};
    return {"```python\ndef " + *problem->entry_point + "(*args):\n    return None\n```", {50, 20}};
  }

  std::set<std::string> unreachable;
  std::set<std::string> blank_code;
  std::atomic<int> calls{0};

 private:
  std::vector<Problem> problems_;
};

// Passes every case except the ones listed per request id.
class RuleBackend : public ExecutionBackend {
 public:
  ExecReport run(const ExecRequest& request) override {
    {
      std::lock_guard lock(mutex_);
      ids.push_back(request.id);
    }
    ExecReport r;
    r.id = request.id;
    for (std::size_t i = 0; i < request.cases.size(); ++i) {
      bool fail = (request.id == "Sample/1::zero_shot" && i == 0) || request.id == "Sample/3::zero_shot" ||
                  request.id == "Sample/4::mot";
      r.results.push_back({fail ? CaseStatus::Fail : CaseStatus::Pass, fail ? "AssertionError" : ""});
    }
    return r;
  }
  std::vector<std::string> ids;

 private:
  std::mutex mutex_;
};

class RunTest : public ::testing::Test {
 protected:
  void SetUp() override {
    auto all = load_dataset(DatasetId::HumanEval, testing::fixtures_dir() / "humaneval_sample.jsonl");
    problems_.assign(all.begin(), all.begin() + 5);
    client_ = std::make_shared<RuleClient>(problems_);
    backend_ = std::make_shared<RuleBackend>();
    config_.dataset = DatasetId::HumanEval;
    config_.data = testing::fixtures_dir() / "humaneval_sample.jsonl";
    config_.strategies = {StrategyId::Mot, StrategyId::ZeroShot};
    config_.fixtures = dir_.path();  // unused with an injected client
    config_.problem_filter = std::vector<std::string>{"Sample/0", "Sample/1", "Sample/2", "Sample/3", "Sample/4"};
    config_.output_dir = dir_.path() / "out";
  }

  RunResult run() { return run_benchmark(config_, {client_, backend_}); }

  testing::TempDir dir_;
  std::vector<Problem> problems_;
  std::shared_ptr<RuleClient> client_;
  std::shared_ptr<RuleBackend> backend_;
  RunConfig config_;
};

const StrategySummary& row(const RunSummary& s, StrategyId id) {
  for (const auto& st : s.strategies) {
    if (st.strategy == id) return st;
  }
  throw std::runtime_error("missing strategy");
}

TEST_F(RunTest, EveryPairIsLoggedAndSummarized) {
  auto result = run();
  EXPECT_EQ(result.exit_code, 0);
  ASSERT_EQ(result.run_dirs.size(), 1u);
  auto entries = read_run_log(config_.output_dir / "log.jsonl");
  EXPECT_EQ(entries.size(), 10u);
  EXPECT_TRUE(fs::exists(config_.output_dir / "summary.json"));
  EXPECT_TRUE(fs::exists(config_.output_dir / "timings.json"));
  EXPECT_FALSE(fs::exists(config_.output_dir / "failures.json"));

  const auto& s = result.summaries[0];
  ASSERT_EQ(s.strategies.size(), 2u);
  EXPECT_EQ(s.strategies[0].strategy, StrategyId::Mot);  // configured order
  const auto& mot = row(s, StrategyId::Mot);
  const auto& zs = row(s, StrategyId::ZeroShot);
  EXPECT_EQ(mot.metrics.problems, 5);
  EXPECT_EQ(mot.metrics.solved, 4);
  EXPECT_DOUBLE_EQ(mot.metrics.pass_at_1_pct, 80.0);
  EXPECT_DOUBLE_EQ(*mot.metrics.apr_pct, 80.0);
  EXPECT_DOUBLE_EQ(zs.metrics.pass_at_1_pct, 60.0);
  EXPECT_NEAR(*zs.metrics.apr_pct, 100.0 * (1 + 2.0 / 3 + 1 + 0 + 1) / 5, 1e-12);
  EXPECT_DOUBLE_EQ(mot.metrics.cost.avg_in_tokens, 150.0);
  EXPECT_DOUBLE_EQ(mot.metrics.cost.avg_out_tokens, 30.0);
  EXPECT_NEAR(mot.metrics.cost.avg_cost_usd, 150 * 0.15e-6 + 30 * 0.6e-6, 1e-18);
  EXPECT_DOUBLE_EQ(zs.metrics.cost.avg_in_tokens, 50.0);

  std::vector<std::string> ids;
  for (const auto& o : mot.outcomes) ids.push_back(o.task_id);
  EXPECT_TRUE(std::is_sorted(ids.begin(), ids.end()));
  // Evaluation requests are named after the pair.
  EXPECT_EQ(std::count(backend_->ids.begin(), backend_->ids.end(), "Sample/2::mot"), 1);
}

TEST_F(RunTest, SummaryIsDeterministicAcrossRunsAndParallelism) {
  run();
  auto first = testing::read_file(config_.output_dir / "summary.json");
  config_.output_dir = dir_.path() / "again";
  config_.parallelism = 1;
  run();
  EXPECT_EQ(testing::read_file(config_.output_dir / "summary.json"), first);
  EXPECT_EQ(first.find("wall"), std::string::npos);
  EXPECT_EQ(first.find("_at\""), std::string::npos);
}

TEST_F(RunTest, OfflineAggregationMatchesTheRun) {
  auto result = run();
  auto entries = read_run_log(config_.output_dir / "log.jsonl");
  std::mt19937 rng(5);
  std::shuffle(entries.begin(), entries.end(), rng);
  auto offline = summarize_log(entries, config_.dataset, config_.strategies, config_.provider.model,
                               config_.provider.pricing);
  EXPECT_EQ(to_json(offline).dump(2) + "\n", testing::read_file(config_.output_dir / "summary.json"));
  EXPECT_EQ(to_json(run_summary_from_json(to_json(offline))), to_json(offline));
}

TEST_F(RunTest, LogEntriesRoundTrip) {
  run();
  for (const auto& e : read_run_log(config_.output_dir / "log.jsonl")) {
    EXPECT_EQ(to_json(run_log_entry_from_json(to_json(e))), to_json(e));
    if (e.strategy == StrategyId::Mot) {
      EXPECT_TRUE(e.record.parsed_graph);
      EXPECT_EQ(e.record.calls.size(), 2u);
    }
    EXPECT_FALSE(e.started_at.empty());
  }
}

TEST_F(RunTest, ProblemFilter) {
  config_.problem_filter = std::vector<std::string>{"Sample/2"};
  auto result = run();
  EXPECT_EQ(read_run_log(config_.output_dir / "log.jsonl").size(), 2u);
  EXPECT_EQ(row(result.summaries[0], StrategyId::Mot).metrics.problems, 1);
  config_.problem_filter = std::vector<std::string>{"Sample/99"};
  config_.fresh = true;
  EXPECT_THROW(run(), ConfigError);
}

TEST_F(RunTest, ExistingLogNeedsResumeOrFresh) {
  run();
  EXPECT_THROW(run(), ConfigError);
  config_.fresh = true;
  run();
  EXPECT_EQ(read_run_log(config_.output_dir / "log.jsonl").size(), 10u);
}

TEST_F(RunTest, InfraFailuresExitTwoAndResumeRetriesThem) {
  client_->unreachable = {"Sample/2"};
  auto result = run();
  EXPECT_EQ(result.exit_code, 2);
  EXPECT_EQ(result.infra_failures, 2);
  auto failures = json::parse(testing::read_file(config_.output_dir / "failures.json"));
  ASSERT_EQ(failures.size(), 2u);
  EXPECT_EQ(failures[0]["task_id"], "Sample/2");
  const auto& mot = row(result.summaries[0], StrategyId::Mot);
  EXPECT_EQ(mot.metrics.problems, 4);
  EXPECT_EQ(mot.metrics.infra_failures, 1);
  EXPECT_DOUBLE_EQ(mot.metrics.pass_at_1_pct, 75.0);  // infra failures are not counted as wrong

  client_->unreachable.clear();
  client_->calls = 0;
  config_.resume = true;
  result = run();
  EXPECT_EQ(result.exit_code, 0);
  EXPECT_EQ(client_->calls, 3);  // mot (2 calls) and zero_shot for Sample/2 only
  EXPECT_FALSE(fs::exists(config_.output_dir / "failures.json"));
  EXPECT_EQ(read_run_log(config_.output_dir / "log.jsonl").size(), 12u);
  EXPECT_EQ(row(result.summaries[0], StrategyId::Mot).metrics.problems, 5);
  EXPECT_DOUBLE_EQ(row(result.summaries[0], StrategyId::Mot).metrics.pass_at_1_pct, 80.0);
}

TEST_F(RunTest, FailedGenerationCountsAsWrongWithItsCost) {
  client_->blank_code = {"Sample/0"};
  auto result = run();
  EXPECT_EQ(result.exit_code, 0);
  const auto& zs = row(result.summaries[0], StrategyId::ZeroShot);
  EXPECT_EQ(zs.metrics.problems, 5);
  EXPECT_EQ(zs.metrics.solved, 2);
  EXPECT_EQ(zs.outcomes[0].task_id, "Sample/0");
  EXPECT_EQ(zs.outcomes[0].cases_total, 4);
  EXPECT_EQ(zs.outcomes[0].cases_passed, 0);
  EXPECT_DOUBLE_EQ(zs.metrics.cost.avg_out_tokens, (0 + 4 * 20) / 5.0);
  for (const auto& e : read_run_log(config_.output_dir / "log.jsonl")) {
    if (e.task_id == "Sample/0" && e.strategy == StrategyId::ZeroShot) {
      EXPECT_EQ(e.status, RunLogEntry::Status::GenerationFailed);
      EXPECT_EQ(e.record.calls.size(), 1u);
      EXPECT_FALSE(e.exec_report);
    }
  }
}

TEST_F(RunTest, MissingExecutorForCodeCotIsInfrastructure) {
  RunLogEntry e;
  e.status = RunLogEntry::Status::InfraFailure;
  EXPECT_FALSE(outcome_of(e));
  e.status = RunLogEntry::Status::GenerationFailed;
  e.cases_total = 3;
  auto o = outcome_of(e);
  ASSERT_TRUE(o);
  EXPECT_EQ(o->samples_correct, 0);
  EXPECT_EQ(o->cases_total, 3);
}

TEST_F(RunTest, RepeatsWriteOneDirectoryEach) {
  config_.repeats = 2;
  auto result = run();
  ASSERT_EQ(result.run_dirs.size(), 2u);
  EXPECT_EQ(result.run_dirs[1], config_.output_dir / "repeat-2");
  EXPECT_TRUE(fs::exists(config_.output_dir / "repeat-1" / "summary.json"));
  EXPECT_EQ(read_run_log(config_.output_dir / "repeat-2" / "log.jsonl")[0].repeat, 2);
}

TEST_F(RunTest, LiveModeWithoutKeyIsAConfigError) {
  config_.mode = RunMode::Live;
  config_.provider.api_key_env = "MOT_TEST_KEY_THAT_IS_NEVER_SET";
  EXPECT_THROW(run_benchmark(config_, {nullptr, backend_}), ConfigError);
}

TEST(RunLog, TornFinalLineIsIgnored) {
  testing::TempDir dir;
  RunLogEntry e;
  e.task_id = "a";
  e.exec_report = ExecReport{"a::mot", {{CaseStatus::Pass, ""}}, 1, 1, 0};
  auto line = to_json(e).dump();
  testing::write_file(dir.path() / "log.jsonl", line + "\n" + line.substr(0, 20));
  EXPECT_EQ(read_run_log(dir.path() / "log.jsonl").size(), 1u);
  testing::write_file(dir.path() / "log.jsonl", line.substr(0, 20) + "\n" + line + "\n");
  EXPECT_THROW(read_run_log(dir.path() / "log.jsonl"), Error);
}

TEST(RunConfigFile, RelativePathsFollowTheFile) {
  testing::TempDir dir;
  fs::create_directories(dir.path() / "conf");
  testing::write_file(dir.path() / "conf" / "run.json", R"({
    "dataset": "mbpp_plus", "data": "data/mbpp.jsonl", "strategies": "mot,cot",
    "fixtures": "fx", "output_dir": "/abs/out", "parallelism": 2,
    "provider": {"model": "m", "pricing": {"usd_per_input_token": 1e-6}}})");
  auto c = load_run_config(dir.path() / "conf" / "run.json");
  EXPECT_EQ(c.dataset, DatasetId::MbppPlus);
  EXPECT_EQ(c.data, dir.path() / "conf" / "data/mbpp.jsonl");
  EXPECT_EQ(c.fixtures, dir.path() / "conf" / "fx");
  EXPECT_EQ(c.output_dir, "/abs/out");
  EXPECT_EQ(c.strategies, (std::vector<StrategyId>{StrategyId::Mot, StrategyId::Cot}));
  EXPECT_EQ(c.parallelism, 2);
  EXPECT_EQ(c.provider.model, "m");
  EXPECT_DOUBLE_EQ(c.provider.pricing.usd_per_input_token, 1e-6);
  EXPECT_DOUBLE_EQ(c.provider.pricing.usd_per_output_token, 0.60e-6);
}

TEST(RunConfigFile, TaskIdListFile) {
  testing::TempDir dir;
  testing::write_file(dir.path() / "ids.txt", "# subset\n11\n\n  12  # trailing note\r\n");
  testing::write_file(dir.path() / "run.json", R"({"data": "d.jsonl", "problem_filter": "@ids.txt"})");
  auto c = load_run_config(dir.path() / "run.json");
  ASSERT_TRUE(c.problem_filter);
  EXPECT_EQ(*c.problem_filter, (std::vector<std::string>{"11", "12"}));
  EXPECT_THROW(run_config_from_json(json{{"problem_filter", "@/nonexistent/ids.txt"}}), ConfigError);
}

TEST(RunConfigFile, Rejections) {
  EXPECT_THROW(run_config_from_json(json{{"strategies", "mot,nope"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json{{"dataset", "apps"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json{{"parallelism", "four"}}), ConfigError);
  EXPECT_THROW(run_config_from_json(json::array()), ConfigError);
  RunConfig c;
  EXPECT_THROW(c.validate(), ConfigError);  // no data
  c.data = "x.jsonl";
  c.fixtures = "/nonexistent/fixtures";
  EXPECT_THROW(c.validate(), ConfigError);
  c.mode = RunMode::Live;
  c.resume = c.fresh = true;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ExecRequestShape, GuardSetupAndCases) {
  auto ps = load_dataset(DatasetId::HumanEval, testing::fixtures_dir() / "humaneval_sample.jsonl");
  auto r = make_exec_request(ps[0], StrategyId::Cot, "def add(x, y): return x + y", 2500);
  EXPECT_EQ(r.id, "Sample/0::cot");
  EXPECT_EQ(r.setup.find(entry_point_guard("add")), 0u);
  EXPECT_NE(r.setup.find("candidate = add"), std::string::npos);
  EXPECT_EQ(r.cases, ps[0].suite.cases);
  EXPECT_EQ(r.timeout_ms, 2500);
}

}  // namespace
}  // namespace mot
