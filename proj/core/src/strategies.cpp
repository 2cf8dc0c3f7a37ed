#include "mot/strategies.hpp"

#include <algorithm>

#include "text_util.hpp"

namespace mot {

std::string_view strategy_name(StrategyId id) {
  switch (id) {
    case StrategyId::Mot: return "mot";
    case StrategyId::ZeroShot: return "zero_shot";
    case StrategyId::FewShot: return "few_shot";
    case StrategyId::Cot: return "cot";
    case StrategyId::SelfPlanning: return "self_planning";
    case StrategyId::Scot: return "scot";
    case StrategyId::CodeCot: return "codecot";
    case StrategyId::MotNoGraph: return "mot_no_graph";
    case StrategyId::MotNoModularization: return "mot_no_modularization";
  }
  return "mot";
}

std::optional<StrategyId> parse_strategy(std::string_view name) {
  for (auto id : kAllStrategies) {
    if (strategy_name(id) == name) return id;
  }
  return std::nullopt;
}

int max_calls(StrategyId id, int graph_retries, int codecot_repairs) {
  switch (id) {
    case StrategyId::Mot:
    case StrategyId::MotNoModularization: return 1 + graph_retries + 1;
    case StrategyId::CodeCot: return 1 + codecot_repairs;
    case StrategyId::SelfPlanning:
    case StrategyId::Scot: return 2;
    default: return 1;
  }
}

std::string self_test_request_id(const std::string& task_id, int round) {
  return task_id + "::codecot::selftest::" + std::to_string(round);
}

namespace {

class Session {
 public:
  Session(ChatClient& client, const GenerateOptions& options, GenerationRecord& record)
      : client_(client), options_(options), record_(record) {}

  std::string call(const Prompt& prompt, std::string purpose) {
    ChatRequest request{options_.model, prompt.messages, options_.max_output_tokens};
    auto response = client_.complete(request);
    record_.calls.push_back(
        {prompt, response.content, response.usage, response.latency, std::move(purpose)});
    return response.content;
  }

 private:
  ChatClient& client_;
  const GenerateOptions& options_;
  GenerationRecord& record_;
};

std::string first_line(std::string_view s) {
  for (auto line : text::split_lines(s)) {
    auto t = text::trim(line);
    if (!t.empty()) return std::string(t);
  }
  return {};
}

std::string describe_failures(const ExecRequest& request, const ExecReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    if (r.status == CaseStatus::Pass) continue;
    out += "- test `" + std::string(text::trim(request.cases[i])) + "` -> " +
           std::string(case_status_name(r.status));
    if (!r.detail.empty()) out += ": " + r.detail;
    out += "\n";
  }
  return out;
}

// Root-to-leaf paths in High -> Intermediate -> Detailed order.
std::vector<std::vector<const MLRNode*>> graph_paths(const MLRGraph& graph) {
  std::vector<std::vector<const MLRNode*>> paths;
  for (const auto& root_id : graph.roots()) {
    const MLRNode* high = graph.find(root_id);
    if (!high) continue;
    if (high->children.empty()) {
      paths.push_back({high});
      continue;
    }
    for (const auto& mid_id : high->children) {
      const MLRNode* mid = graph.find(mid_id);
      if (!mid) continue;
      if (mid->children.empty()) {
        paths.push_back({high, mid});
        continue;
      }
      for (const auto& leaf_id : mid->children) {
        if (const MLRNode* leaf = graph.find(leaf_id)) paths.push_back({high, mid, leaf});
      }
    }
  }
  return paths;
}

std::string single_call(Session& session, const Prompt& prompt, const Problem& problem,
                        std::string purpose = "code") {
  return extract_code(session.call(prompt, std::move(purpose)), problem.entry_point);
}

}  // namespace

std::optional<ParsedGraph> generate_graph(const Problem& problem, ChatClient& client,
                                          const GenerateOptions& options, GenerationRecord& record) {
  Session session(client, options, record);
  Prompt prompt = build_graph_prompt(problem);
  for (int attempt = 0; attempt <= options.graph_retries; ++attempt) {
    std::string response = session.call(prompt, attempt == 0 ? "graph" : "graph_retry");
    std::string issue;
    try {
      ParsedGraph parsed = parse_graph(response);
      auto report = validate_graph(parsed.graph, ValidationOptions{options.max_graph_nodes});
      if (report.ok) {
        if (text::is_blank(parsed.task.goal)) parsed.task.goal = first_line(problem.description);
        return parsed;
      }
      issue = report.describe();
    } catch (const ParseError& e) {
      issue = std::string("- ") + e.what() + "\n";
    }
    record.graph_issues.push_back(issue);
    if (attempt < options.graph_retries) prompt = build_graph_retry_prompt(prompt, response, issue);
  }
  return std::nullopt;
}

GenerationRecord generate(StrategyId strategy, const Problem& problem, ChatClient& client,
                          ExecutionBackend* executor, const GenerateOptions& options) {
  GenerationRecord record;
  generate_into(record, strategy, problem, client, executor, options);
  return record;
}

void generate_into(GenerationRecord& record, StrategyId strategy, const Problem& problem,
                   ChatClient& client, ExecutionBackend* executor, const GenerateOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  record = GenerationRecord{};
  record.task_id = problem.task_id;
  record.strategy = strategy;
  Session session(client, options, record);

  switch (strategy) {
    case StrategyId::Mot:
    case StrategyId::MotNoModularization: {
      auto graph = generate_graph(problem, client, options, record);
      if (!graph) {
        record.fallback_used = true;
        Prompt fallback = strategy == StrategyId::Mot ? build_modular_no_graph_prompt(problem)
                                                      : build_zero_shot_prompt(problem);
        try {
          record.extracted_code = single_call(session, fallback, problem, "fallback_code");
        } catch (const GenerationError&) {
          throw GenerationError(GenerationError::Kind::GraphUnrecoverable,
                                "graph generation failed and the fallback produced no code");
        }
        break;
      }
      record.parsed_graph = *graph;
      if (strategy == StrategyId::MotNoModularization) {
        record.extracted_code = single_call(
            session, build_monolithic_code_prompt(problem, graph->graph, graph->task), problem);
      } else if (!options.per_node_phase2) {
        record.extracted_code =
            single_call(session, build_code_prompt(problem, graph->graph, graph->task), problem);
      } else {
        std::string code;
        for (const auto& path : graph_paths(graph->graph)) {
          auto response = session.call(
              build_node_code_prompt(problem, graph->graph, graph->task, path, code), "node_code");
          try {
            code = extract_code(response, problem.entry_point);
          } catch (const GenerationError&) {
            // Keep the previous code when a step returns nothing usable.
          }
        }
        if (text::is_blank(code)) {
          throw GenerationError(GenerationError::Kind::EmptyCandidate, "incremental phase 2 produced no code");
        }
        record.extracted_code = code;
      }
      break;
    }
    case StrategyId::ZeroShot:
      record.extracted_code = single_call(session, build_zero_shot_prompt(problem), problem);
      break;
    case StrategyId::FewShot:
      record.extracted_code =
          single_call(session, build_few_shot_prompt(problem, options.exemplars), problem);
      break;
    case StrategyId::Cot:
      record.extracted_code = single_call(session, build_cot_prompt(problem), problem);
      break;
    case StrategyId::MotNoGraph:
      record.extracted_code = single_call(session, build_modular_no_graph_prompt(problem), problem);
      break;
    case StrategyId::SelfPlanning: {
      auto plan = session.call(build_plan_prompt(problem), "plan");
      record.extracted_code = single_call(session, build_plan_code_prompt(problem, plan), problem);
      break;
    }
    case StrategyId::Scot: {
      auto structure = session.call(build_scot_prompt(problem), "structure");
      record.extracted_code =
          single_call(session, build_scot_code_prompt(problem, structure), problem);
      break;
    }
    case StrategyId::CodeCot: {
      if (!executor) {
        throw GenerationError(GenerationError::Kind::MissingExecutor,
                              "codecot needs an execution backend for its self-tests");
      }
      auto response = session.call(build_codecot_prompt(problem), "code");
      std::string code = extract_code(response, problem.entry_point);
      const auto tests = extract_self_tests(response);
      for (int round = 0; round <= options.codecot_repairs && !tests.empty(); ++round) {
        ExecRequest request{self_test_request_id(problem.task_id, round), code, "", tests,
                            options.self_test_timeout_ms};
        ExecReport report;
        try {
          report = evaluate_candidate(*executor, request);
        } catch (const BackendUnavailable&) {
          break;  // cannot self-check; keep the current candidate
        }
        record.self_test_reports.push_back(report);
        if (solved(report) || round == options.codecot_repairs) break;
        auto repaired = session.call(
            build_codecot_repair_prompt(problem, code, describe_failures(request, report)), "repair");
        try {
          code = extract_code(repaired, problem.entry_point);
        } catch (const GenerationError&) {
        }
      }
      record.extracted_code = code;
      break;
    }
  }

  record.wall_time = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - started);
}

}  // namespace mot
