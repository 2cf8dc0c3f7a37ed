#include <nlohmann/json.hpp>

#include <sstream>

#include "mot/graph.hpp"
#include "text_util.hpp"

namespace mot {

namespace {

// Writes "<indent><label>: <value>", continuing extra lines of a multi-line
// value as "<indent>  | <line>" so they survive a round trip verbatim.
void write_field(std::ostringstream& out, std::string_view indent, std::string_view label,
                 std::string_view value) {
  auto lines = text::split_lines(value);
  out << indent << label << ":";
  if (!lines.empty() && !lines.front().empty()) out << " " << lines.front();
  out << "\n";
  for (std::size_t i = 1; i < lines.size(); ++i) {
    out << indent << "  | " << lines[i] << "\n";
  }
}

}  // namespace

InvalidGraph::InvalidGraph(ValidationReport report)
    : Error("invalid MLR graph:\n" + report.describe()), report_(std::move(report)) {}

std::string serialize_for_prompt(const MLRGraph& graph, const TaskElements& task) {
  auto report = validate_graph(graph);
  if (!report.ok) throw InvalidGraph(std::move(report));

  std::ostringstream out;
  out << "Task Analysis\n";
  write_field(out, "", "Goal", task.goal);
  write_field(out, "", "Input/Output", task.io_spec);
  write_field(out, "", "Constraints", task.constraints);
  out << "\nMLR Graph\n";
  for (Level level : kAllLevels) {
    auto nodes = graph.nodes_at(level);
    if (nodes.empty()) continue;
    out << level_display_name(level) << "\n";
    for (const MLRNode* n : nodes) {
      auto title_lines = text::split_lines(n->title);
      out << "- [" << n->id << "] " << title_lines.front() << "\n";
      for (std::size_t i = 1; i < title_lines.size(); ++i) {
        out << "  | " << title_lines[i] << "\n";
      }
      if (n->reasoning) {
        const auto& r = *n->reasoning;
        if (r.task_purpose) write_field(out, "    ", "Task Purpose", *r.task_purpose);
        if (r.decision_rationale) write_field(out, "    ", "Decision Rationale", *r.decision_rationale);
        if (r.execution_strategy) write_field(out, "    ", "Execution Strategy", *r.execution_strategy);
      }
      if (!n->children.empty()) out << "    Children: " << text::join(n->children, ", ") << "\n";
    }
  }
  return out.str();
}

std::string graph_to_json(const MLRGraph& graph, const TaskElements& task, int indent) {
  nlohmann::ordered_json root;
  root["task_analysis"] = {
      {"goal", task.goal}, {"io_spec", task.io_spec}, {"constraints", task.constraints}};
  auto nodes = nlohmann::ordered_json::array();
  for (const auto& n : graph.nodes()) {
    nlohmann::ordered_json obj;
    obj["id"] = n.id;
    obj["level"] = std::string(level_name(n.level));
    obj["title"] = n.title;
    if (n.reasoning && !n.reasoning->empty()) {
      nlohmann::ordered_json r = nlohmann::ordered_json::object();
      if (n.reasoning->task_purpose) r["purpose"] = *n.reasoning->task_purpose;
      if (n.reasoning->decision_rationale) r["rationale"] = *n.reasoning->decision_rationale;
      if (n.reasoning->execution_strategy) r["strategy"] = *n.reasoning->execution_strategy;
      obj["reasoning"] = std::move(r);
    }
    obj["children"] = n.children;
    nodes.push_back(std::move(obj));
  }
  root["nodes"] = std::move(nodes);
  return root.dump(indent);
}

}  // namespace mot
