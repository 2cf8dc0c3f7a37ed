#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mot/benchmark.hpp"
#include "mot/executor.hpp"
#include "mot/llm_client.hpp"
#include "mot/metrics.hpp"
#include "mot/strategies.hpp"

#include <nlohmann/json_fwd.hpp>

namespace mot {

enum class RunMode { Live, Replay, Record };

std::string_view run_mode_name(RunMode mode);
std::optional<RunMode> parse_run_mode(std::string_view name);

class ConfigError : public Error {
 public:
  using Error::Error;
};

struct RunConfig {
  DatasetId dataset = DatasetId::HumanEval;
  std::filesystem::path data;
  std::vector<StrategyId> strategies = {StrategyId::Mot};
  ProviderConfig provider;
  RunMode mode = RunMode::Replay;
  std::filesystem::path fixtures;
  bool overwrite_fixtures = false;
  int parallelism = 4;
  int timeout_ms = kDefaultCaseTimeoutMs;
  std::filesystem::path output_dir = "runs/latest";
  std::optional<std::vector<std::string>> problem_filter;
  bool resume = false;
  bool fresh = false;  // discard an existing log instead of refusing to run
  bool per_node_phase2 = false;
  int repeats = 1;
  std::optional<int> max_output_tokens;
  std::optional<std::filesystem::path> exemplars;
  // Execution backend: canned reports or a worker command.
  std::optional<std::filesystem::path> exec_fixtures;
  std::vector<std::string> worker_command;
  int exec_workers = 4;

  /// Throws ConfigError.
  void validate() const;
};

/// Reads the structured config file; keys mirror RunConfig field names.
/// "problem_filter" may be a list, a comma-separated string, or "@file"
/// naming a task id list (resolved against `list_dir`).
RunConfig load_run_config(const std::filesystem::path& path);
RunConfig run_config_from_json(const nlohmann::json& doc, RunConfig base = {},
                               const std::filesystem::path& list_dir = {});

/// One task id per line; blank lines and '#' comments are skipped.
std::vector<std::string> read_task_ids(const std::filesystem::path& path);

/// One line of the run log.
struct RunLogEntry {
  std::string task_id;
  StrategyId strategy = StrategyId::Mot;
  int repeat = 1;
  enum class Status { Ok, GenerationFailed, InfraFailure } status = Status::Ok;
  GenerationRecord record;  // calls made, even when generation failed
  std::optional<ExecReport> exec_report;
  int cases_total = 0;  // problem's case count, also for failed generations
  Usage usage;
  std::string error;
  std::string started_at;
  std::string finished_at;
  std::int64_t wall_time_ms = 0;
};

std::string_view log_status_name(RunLogEntry::Status status);

nlohmann::json to_json(const RunLogEntry& entry);
RunLogEntry run_log_entry_from_json(const nlohmann::json& doc);
std::vector<RunLogEntry> read_run_log(const std::filesystem::path& path);

/// Per-(problem, strategy) outcome derived from a log entry; infra failures
/// yield nullopt.
std::optional<ProblemOutcome> outcome_of(const RunLogEntry& entry);

struct StrategySummary {
  StrategyId strategy = StrategyId::Mot;
  RunMetrics metrics;
  std::vector<ProblemOutcome> outcomes;  // sorted by task_id
};

struct RunSummary {
  DatasetId dataset = DatasetId::HumanEval;
  std::string model;
  Pricing pricing;
  std::vector<StrategySummary> strategies;  // in configured order
};

/// Aggregates a run log. Independent of entry order.
RunSummary summarize_log(const std::vector<RunLogEntry>& entries, DatasetId dataset,
                         const std::vector<StrategyId>& strategies, const std::string& model,
                         const Pricing& pricing);

nlohmann::json to_json(const RunSummary& summary);
RunSummary run_summary_from_json(const nlohmann::json& doc);

/// Everything the run needs from the outside world. Unset members are
/// created from the config (live/replay/record client, recorded or worker
/// backend).
struct RunServices {
  std::shared_ptr<ChatClient> client;
  std::shared_ptr<ExecutionBackend> backend;
};

struct RunResult {
  std::vector<std::filesystem::path> run_dirs;  // one per repeat
  std::vector<RunSummary> summaries;
  int infra_failures = 0;
  int exit_code = 0;  // 0, or 2 when any infra failure happened
};

/// Generates and evaluates every (problem, strategy) pair with bounded
/// parallelism, appending to <dir>/log.jsonl and writing <dir>/summary.json
/// (deterministic) and <dir>/timings.json. With infra failures, also writes
/// <dir>/failures.json and returns exit code 2.
RunResult run_benchmark(const RunConfig& config, RunServices services = {});

/// Request id used to evaluate a final candidate.
std::string evaluation_request_id(const std::string& task_id, StrategyId strategy);

/// Builds the execution request for a candidate; the setup carries an
/// entry-point guard when the entry point is known.
ExecRequest make_exec_request(const Problem& problem, StrategyId strategy, const std::string& code,
                              int timeout_ms);

std::shared_ptr<ChatClient> make_client(const RunConfig& config);
std::shared_ptr<ExecutionBackend> make_backend(const RunConfig& config);

}  // namespace mot
