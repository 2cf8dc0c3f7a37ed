#include <nlohmann/json.hpp>

#include "mot/strategies.hpp"
#include "text_util.hpp"

namespace mot {

namespace {

std::string entry_point_line(const Problem& problem) {
  if (!problem.entry_point) return "";
  return "\nThe solution must define a function named `" + *problem.entry_point + "`.\n";
}

std::map<std::string, std::string> problem_vars(const Problem& problem) {
  return {{"description", problem.description}, {"entry_point_line", entry_point_line(problem)}};
}

Message system_message() { return {Role::System, std::string(asset("system.txt"))}; }

Prompt single_turn(std::string_view template_name, const std::map<std::string, std::string>& vars) {
  Prompt p;
  p.messages.push_back(system_message());
  p.messages.push_back({Role::User, render_template(asset(template_name), vars)});
  return p;
}

// [system, user(first), assistant(answer), user(follow-up)]
Prompt follow_up(const Prompt& first, std::string_view answer, std::string follow) {
  Prompt p = first;
  p.messages.push_back({Role::Assistant, std::string(answer)});
  p.messages.push_back({Role::User, std::move(follow)});
  return p;
}

}  // namespace

const std::vector<Exemplar>& default_exemplars() {
  static const std::vector<Exemplar> exemplars = parse_exemplars(asset("few_shot_exemplars.json"));
  return exemplars;
}

std::vector<Exemplar> parse_exemplars(std::string_view json_text) {
  auto doc = nlohmann::json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_array()) throw Error("exemplar file must be a JSON list");
  std::vector<Exemplar> out;
  for (const auto& e : doc) {
    if (!e.is_object() || !e.contains("description") || !e.contains("solution") ||
        !e["description"].is_string() || !e["solution"].is_string()) {
      throw Error("exemplar entries need string 'description' and 'solution'");
    }
    out.push_back({e["description"].get<std::string>(), e["solution"].get<std::string>()});
  }
  return out;
}

Prompt build_graph_prompt(const Problem& problem) {
  return single_turn("graph_generation.txt", problem_vars(problem));
}

Prompt build_graph_retry_prompt(const Prompt& previous, std::string_view response,
                                std::string_view problems_found) {
  return follow_up(previous, response,
                   render_template(asset("graph_retry.txt"), {{"problems", std::string(problems_found)}}));
}

Prompt build_code_prompt(const Problem& problem, const MLRGraph& graph, const TaskElements& task) {
  auto vars = problem_vars(problem);
  vars["graph"] = serialize_for_prompt(graph, task);
  return single_turn("code_generation.txt", vars);
}

Prompt build_monolithic_code_prompt(const Problem& problem, const MLRGraph& graph,
                                    const TaskElements& task) {
  auto vars = problem_vars(problem);
  vars["graph"] = serialize_for_prompt(graph, task);
  return single_turn("code_generation_monolithic.txt", vars);
}

Prompt build_node_code_prompt(const Problem& problem, const MLRGraph& graph, const TaskElements& task,
                              const std::vector<const MLRNode*>& path, std::string_view code_so_far) {
  auto vars = problem_vars(problem);
  vars["graph"] = serialize_for_prompt(graph, task);
  std::string rendered;
  for (const MLRNode* n : path) {
    rendered += "- " + std::string(level_display_name(n->level)) + " [" + n->id + "] " + n->title + "\n";
  }
  vars["path"] = rendered;
  vars["code_so_far"] = code_so_far.empty() ? "# (empty)" : std::string(text::trim_right(code_so_far));
  return single_turn("code_generation_node.txt", vars);
}

Prompt build_zero_shot_prompt(const Problem& problem) {
  return single_turn("zero_shot.txt", problem_vars(problem));
}

Prompt build_few_shot_prompt(const Problem& problem, const std::vector<Exemplar>& exemplars) {
  Prompt p;
  p.messages.push_back(system_message());
  for (const auto& ex : exemplars) {
    p.messages.push_back({Role::User, render_template(asset("zero_shot.txt"),
                                                      {{"description", ex.description},
                                                       {"entry_point_line", ""}})});
    std::string solution = ex.solution;
    if (!solution.empty() && solution.back() != '\n') solution += '\n';
    p.messages.push_back({Role::Assistant, "```python\n" + solution + "```"});
  }
  p.messages.push_back({Role::User, render_template(asset("zero_shot.txt"), problem_vars(problem))});
  return p;
}

Prompt build_cot_prompt(const Problem& problem) { return single_turn("cot.txt", problem_vars(problem)); }

Prompt build_plan_prompt(const Problem& problem) { return single_turn("plan.txt", problem_vars(problem)); }

Prompt build_plan_code_prompt(const Problem& problem, std::string_view plan) {
  return follow_up(build_plan_prompt(problem), plan, std::string(asset("plan_code.txt")));
}

Prompt build_scot_prompt(const Problem& problem) { return single_turn("scot.txt", problem_vars(problem)); }

Prompt build_scot_code_prompt(const Problem& problem, std::string_view structure) {
  return follow_up(build_scot_prompt(problem), structure, std::string(asset("scot_code.txt")));
}

Prompt build_codecot_prompt(const Problem& problem) {
  return single_turn("codecot.txt", problem_vars(problem));
}

Prompt build_codecot_repair_prompt(const Problem& problem, std::string_view code,
                                   std::string_view failures) {
  Prompt first = build_codecot_prompt(problem);
  std::string follow = render_template(
      asset("codecot_repair.txt"),
      {{"code", std::string(text::trim_right(code))}, {"failures", std::string(failures)}});
  first.messages.push_back({Role::User, std::move(follow)});
  return first;
}

Prompt build_modular_no_graph_prompt(const Problem& problem) {
  return single_turn("modular_no_graph.txt", problem_vars(problem));
}

}  // namespace mot
