#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mot/benchmark.hpp"
#include "mot/executor.hpp"
#include "mot/graph.hpp"
#include "mot/llm_client.hpp"
#include "mot/prompt.hpp"

namespace mot {

enum class StrategyId {
  Mot,
  ZeroShot,
  FewShot,
  Cot,
  SelfPlanning,
  Scot,
  CodeCot,
  MotNoGraph,
  MotNoModularization,
};

inline constexpr StrategyId kAllStrategies[] = {
    StrategyId::Mot,          StrategyId::ZeroShot, StrategyId::FewShot,
    StrategyId::Cot,          StrategyId::SelfPlanning, StrategyId::Scot,
    StrategyId::CodeCot,      StrategyId::MotNoGraph, StrategyId::MotNoModularization};

std::string_view strategy_name(StrategyId id);  // "mot", "zero_shot", ...
std::optional<StrategyId> parse_strategy(std::string_view name);

/// Upper bound on provider calls for one problem (default phase-2 mode).
int max_calls(StrategyId id, int graph_retries = 2, int codecot_repairs = 3);

// --- prompts -----------------------------------------------------------------

struct Exemplar {
  std::string description;
  std::string solution;
};

/// The two shipped few-shot exemplars.
const std::vector<Exemplar>& default_exemplars();
/// Reads a list of {"description", "solution"} objects.
std::vector<Exemplar> parse_exemplars(std::string_view json_text);

/// Phase 1: asks for task analysis plus a High/Intermediate/Detailed graph
/// with per-node reasoning, in the structured JSON schema.
Prompt build_graph_prompt(const Problem& problem);

/// Follow-up turn after an unusable phase-1 answer.
Prompt build_graph_retry_prompt(const Prompt& previous, std::string_view response,
                                std::string_view problems_found);

/// Phase 2: code guided by the serialized graph. Throws InvalidGraph.
Prompt build_code_prompt(const Problem& problem, const MLRGraph& graph, const TaskElements& task);

/// Phase 2 variant that asks for a single monolithic function.
Prompt build_monolithic_code_prompt(const Problem& problem, const MLRGraph& graph,
                                    const TaskElements& task);

/// Incremental phase 2: one call per graph path, carrying the code so far.
Prompt build_node_code_prompt(const Problem& problem, const MLRGraph& graph, const TaskElements& task,
                              const std::vector<const MLRNode*>& path, std::string_view code_so_far);

Prompt build_zero_shot_prompt(const Problem& problem);
Prompt build_few_shot_prompt(const Problem& problem, const std::vector<Exemplar>& exemplars);
Prompt build_cot_prompt(const Problem& problem);
Prompt build_plan_prompt(const Problem& problem);
Prompt build_plan_code_prompt(const Problem& problem, std::string_view plan);
Prompt build_scot_prompt(const Problem& problem);
Prompt build_scot_code_prompt(const Problem& problem, std::string_view structure);
Prompt build_codecot_prompt(const Problem& problem);
Prompt build_codecot_repair_prompt(const Problem& problem, std::string_view code,
                                   std::string_view failures);
Prompt build_modular_no_graph_prompt(const Problem& problem);

// --- code extraction -----------------------------------------------------------

class GenerationError : public Error {
 public:
  enum class Kind { EmptyCandidate, GraphUnrecoverable, MissingExecutor };
  GenerationError(Kind kind, const std::string& detail);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

std::string_view generation_error_kind_name(GenerationError::Kind kind);

struct FencedBlock {
  std::string info;     // text after the opening fence, e.g. "python"
  std::string content;  // fence lines removed
};

std::vector<FencedBlock> fenced_blocks(std::string_view response);

/// (1) last fenced block defining entry_point, (2) else last fenced block,
/// (3) else the whole response. Throws GenerationError{EmptyCandidate} when
/// the selection is blank.
std::string extract_code(std::string_view response, const std::optional<std::string>& entry_point);

/// Top-level `assert` statements in the response's fenced blocks, one per case.
std::vector<std::string> extract_self_tests(std::string_view response);

// --- generation ------------------------------------------------------------------

struct CallRecord {
  Prompt prompt;
  std::string response;
  Usage usage;
  std::chrono::milliseconds latency{0};
  std::string purpose;  // "graph", "graph_retry", "code", "plan", "repair", ...
};

struct GenerationRecord {
  std::string task_id;
  StrategyId strategy = StrategyId::Mot;
  std::vector<CallRecord> calls;
  std::optional<ParsedGraph> parsed_graph;
  std::vector<std::string> graph_issues;  // one entry per rejected phase-1 answer
  std::string extracted_code;
  bool fallback_used = false;
  std::vector<ExecReport> self_test_reports;  // CodeCoT only
  std::chrono::milliseconds wall_time{0};

  Usage total_usage() const {
    Usage u;
    for (const auto& c : calls) u += c.usage;
    return u;
  }
};

struct GenerateOptions {
  std::string model = "gpt-4o-mini";
  std::optional<int> max_output_tokens;
  int graph_retries = 2;
  int codecot_repairs = 3;
  int self_test_timeout_ms = kDefaultCaseTimeoutMs;
  bool per_node_phase2 = false;
  std::size_t max_graph_nodes = kDefaultMaxGraphNodes;
  std::vector<Exemplar> exemplars = default_exemplars();
};

/// Phase 1 on its own: graph prompt, parse, validate, retry with feedback.
/// Returns the accepted graph or nullopt when every attempt failed; every call
/// and rejection reason is appended to `record`.
std::optional<ParsedGraph> generate_graph(const Problem& problem, ChatClient& client,
                                          const GenerateOptions& options, GenerationRecord& record);

/// Runs one strategy on one problem. `executor` is used by CodeCoT only.
/// Throws ProviderError, GenerationError.
GenerationRecord generate(StrategyId strategy, const Problem& problem, ChatClient& client,
                          ExecutionBackend* executor, const GenerateOptions& options = {});

/// Same, filling `record` as calls complete so a failed generation still
/// leaves its calls (and their usage) behind.
void generate_into(GenerationRecord& record, StrategyId strategy, const Problem& problem,
                   ChatClient& client, ExecutionBackend* executor, const GenerateOptions& options = {});

/// Request id used for CodeCoT self-test round `round` (0-based).
std::string self_test_request_id(const std::string& task_id, int round);

}  // namespace mot
