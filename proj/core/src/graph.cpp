#include "mot/graph.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>
#include <utility>

#include "text_util.hpp"

namespace mot {

std::string_view level_name(Level level) {
  switch (level) {
    case Level::High: return "high";
    case Level::Intermediate: return "intermediate";
    case Level::Detailed: return "detailed";
  }
  return "high";
}

std::string_view level_display_name(Level level) {
  switch (level) {
    case Level::High: return "High-Level";
    case Level::Intermediate: return "Intermediate-Level";
    case Level::Detailed: return "Detailed-Level";
  }
  return "High-Level";
}

std::optional<Level> parse_level(std::string_view text) {
  auto t = text::to_lower(text::trim(text));
  // Accept "high", "high-level", "high level", "High-Level Tasks", ...
  if (t.rfind("high", 0) == 0 || t.rfind("top", 0) == 0) return Level::High;
  if (t.rfind("intermediate", 0) == 0 || t.rfind("mid", 0) == 0) return Level::Intermediate;
  if (t.rfind("detail", 0) == 0 || t.rfind("low", 0) == 0) return Level::Detailed;
  return std::nullopt;
}

bool operator==(const MLRNode& a, const MLRNode& b) {
  auto norm = [](const std::optional<ReasoningBlock>& r) {
    return (r && !r->empty()) ? r : std::nullopt;
  };
  return a.id == b.id && a.level == b.level && a.title == b.title &&
         norm(a.reasoning) == norm(b.reasoning) && a.children == b.children;
}

MLRGraph::MLRGraph(std::vector<MLRNode> nodes, std::vector<std::string> roots)
    : nodes_(std::move(nodes)), roots_(std::move(roots)) {}

MLRGraph MLRGraph::from_nodes(std::vector<MLRNode> nodes) {
  std::vector<std::string> roots;
  for (const auto& n : nodes) {
    if (n.level == Level::High) roots.push_back(n.id);
  }
  return MLRGraph(std::move(nodes), std::move(roots));
}

const MLRNode* MLRGraph::find(std::string_view id) const {
  for (const auto& n : nodes_) {
    if (n.id == id) return &n;
  }
  return nullptr;
}

std::vector<const MLRNode*> MLRGraph::nodes_at(Level level) const {
  std::vector<const MLRNode*> out;
  for (const auto& n : nodes_) {
    if (n.level == level) out.push_back(&n);
  }
  return out;
}

bool structurally_equal(const MLRGraph& a, const MLRGraph& b) {
  if (a.roots() != b.roots() || a.size() != b.size()) return false;
  for (Level level : kAllLevels) {
    auto la = a.nodes_at(level);
    auto lb = b.nodes_at(level);
    if (la.size() != lb.size()) return false;
    for (std::size_t i = 0; i < la.size(); ++i) {
      if (!(*la[i] == *lb[i])) return false;
    }
  }
  return true;
}

std::string ValidationReport::describe() const {
  std::ostringstream out;
  for (const auto& v : violations) {
    out << "- " << v.rule;
    if (!v.node_id.empty()) out << " [" << v.node_id << "]";
    out << ": " << v.message << "\n";
  }
  return out.str();
}

namespace {

class ViolationSink {
 public:
  void add(std::string node_id, std::string rule, std::string message) {
    // Identical (node, rule, message) triples are reported once.
    Violation v{std::move(node_id), std::move(rule), std::move(message)};
    if (std::find(items_.begin(), items_.end(), v) == items_.end()) items_.push_back(std::move(v));
  }

  std::vector<Violation> take() {
    std::stable_sort(items_.begin(), items_.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.node_id, a.rule, a.message) < std::tie(b.node_id, b.rule, b.message);
    });
    return std::move(items_);
  }

 private:
  std::vector<Violation> items_;
};

bool field_blank(const std::optional<std::string>& f) { return f && text::is_blank(*f); }

}  // namespace

ValidationReport validate_graph(const MLRGraph& graph, const ValidationOptions& options) {
  ViolationSink sink;
  const auto& nodes = graph.nodes();

  if (nodes.size() > options.max_nodes) {
    sink.add("", "TooManyNodes",
             std::to_string(nodes.size()) + " nodes exceed the limit of " +
                 std::to_string(options.max_nodes));
  }

  // First occurrence wins for lookups; later duplicates are reported.
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!index.emplace(nodes[i].id, i).second) {
      sink.add(nodes[i].id, "DuplicateNodeId", "node id appears more than once");
    }
  }

  bool any_high = false;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const auto& n = nodes[i];
    if (n.level == Level::High) any_high = true;
    if (text::is_blank(n.title)) sink.add(n.id, "EmptyTitle", "title is empty");
    if (n.reasoning) {
      const auto& r = *n.reasoning;
      if (field_blank(r.task_purpose) || field_blank(r.decision_rationale) ||
          field_blank(r.execution_strategy)) {
        sink.add(n.id, "EmptyReasoningField", "a present reasoning field is blank");
      }
    }
    std::set<std::string> seen;
    for (const auto& child_id : n.children) {
      if (!seen.insert(child_id).second) {
        sink.add(n.id, "DuplicateEdge", "child '" + child_id + "' listed twice");
        continue;
      }
      auto it = index.find(child_id);
      if (it == index.end()) {
        sink.add(n.id, "DanglingChild", "child '" + child_id + "' does not exist");
        continue;
      }
      const auto& child = nodes[it->second];
      int from = static_cast<int>(n.level);
      int to = static_cast<int>(child.level);
      if (to <= from) {
        sink.add(n.id, "LevelInversion",
                 "edge to '" + child_id + "' goes from " + std::string(level_name(n.level)) +
                     " to " + std::string(level_name(child.level)));
      } else if (to > from + 1) {
        sink.add(n.id, "LevelSkip",
                 "edge to '" + child_id + "' skips from " + std::string(level_name(n.level)) +
                     " to " + std::string(level_name(child.level)));
      }
    }
  }

  if (!any_high) sink.add("", "NoHighNode", "graph has no high-level node");

  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (index.at(nodes[i].id) != i) continue;
    if (nodes[i].level == Level::Intermediate || nodes[i].level == Level::Detailed) {
      // Require a parent exactly one level up.
      Level want = nodes[i].level == Level::Intermediate ? Level::High : Level::Intermediate;
      bool has = false;
      for (const auto& p : nodes) {
        if (p.level != want) continue;
        if (std::find(p.children.begin(), p.children.end(), nodes[i].id) != p.children.end()) {
          has = true;
          break;
        }
      }
      if (!has) {
        sink.add(nodes[i].id,
                 nodes[i].level == Level::Intermediate ? "OrphanIntermediate" : "OrphanDetailed",
                 "no parent at the " + std::string(level_name(want)) + " level");
      }
    }
  }

  // Cycle detection: iterative three-colour DFS over resolvable edges.
  std::vector<int> colour(nodes.size(), 0);
  for (std::size_t start = 0; start < nodes.size(); ++start) {
    if (colour[start] != 0 || index.at(nodes[start].id) != start) continue;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{start, 0}};
    colour[start] = 1;
    while (!stack.empty()) {
      auto& [u, next] = stack.back();
      if (next < nodes[u].children.size()) {
        const auto& cid = nodes[u].children[next++];
        auto it = index.find(cid);
        if (it == index.end()) continue;
        std::size_t v = it->second;
        if (colour[v] == 1) {
          sink.add(nodes[v].id, "Cycle", "node lies on a cycle through '" + nodes[u].id + "'");
        } else if (colour[v] == 0) {
          colour[v] = 1;
          stack.emplace_back(v, 0);
        }
      } else {
        colour[u] = 2;
        stack.pop_back();
      }
    }
  }

  std::vector<std::string> expected_roots;
  for (const auto& n : nodes) {
    if (n.level == Level::High) expected_roots.push_back(n.id);
  }
  auto sorted_roots = graph.roots();
  std::sort(sorted_roots.begin(), sorted_roots.end());
  auto sorted_expected = expected_roots;
  std::sort(sorted_expected.begin(), sorted_expected.end());
  if (sorted_roots != sorted_expected) {
    sink.add("", "RootMismatch", "roots must be exactly the high-level nodes");
  }

  ValidationReport report;
  report.violations = sink.take();
  report.ok = report.violations.empty();
  return report;
}

GraphStats graph_stats(const MLRGraph& graph) {
  GraphStats s;
  for (const auto& n : graph.nodes()) {
    switch (n.level) {
      case Level::High: ++s.high; break;
      case Level::Intermediate: ++s.intermediate; break;
      case Level::Detailed: ++s.detailed; break;
    }
    s.edges += n.children.size();
  }
  return s;
}

std::string format_stats(const GraphStats& s) {
  return "(" + std::to_string(s.high) + ", " + std::to_string(s.intermediate) + ", " +
         std::to_string(s.detailed) + ", " + std::to_string(s.edges) + ")";
}

}  // namespace mot
