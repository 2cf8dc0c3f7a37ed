#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mot/error.hpp"

namespace mot {

/// Abstraction level of a reasoning node. Ordered from coarse to fine.
enum class Level { High = 0, Intermediate = 1, Detailed = 2 };

inline constexpr std::array<Level, 3> kAllLevels = {Level::High, Level::Intermediate,
                                                    Level::Detailed};

std::string_view level_name(Level level);           // "high", "intermediate", "detailed"
std::string_view level_display_name(Level level);   // "High-Level", ...
std::optional<Level> parse_level(std::string_view text);

/// Task Purpose / Decision Rationale / Execution Strategy. Any field may be
/// absent; a present field is non-empty after trimming.
struct ReasoningBlock {
  std::optional<std::string> task_purpose;
  std::optional<std::string> decision_rationale;
  std::optional<std::string> execution_strategy;

  bool empty() const {
    return !task_purpose && !decision_rationale && !execution_strategy;
  }
  friend bool operator==(const ReasoningBlock&, const ReasoningBlock&) = default;
};

struct MLRNode {
  std::string id;
  Level level = Level::High;
  std::string title;
  std::optional<ReasoningBlock> reasoning;
  std::vector<std::string> children;

  /// An all-absent reasoning block compares equal to no block.
  friend bool operator==(const MLRNode& a, const MLRNode& b);
};

/// Goal, input/output specification and constraints extracted from a problem.
struct TaskElements {
  std::string goal;
  std::string io_spec;
  std::string constraints;

  friend bool operator==(const TaskElements&, const TaskElements&) = default;
};

/// Multi-level reasoning graph. Nodes keep the order in which they were
/// written; roots list the High-level entry points.
///
/// The graph is a plain value. Construction does not validate; call
/// validate_graph() to check the structural invariants.
class MLRGraph {
 public:
  MLRGraph() = default;
  MLRGraph(std::vector<MLRNode> nodes, std::vector<std::string> roots);

  /// Builds a graph whose roots are the High nodes in stored order.
  static MLRGraph from_nodes(std::vector<MLRNode> nodes);

  const std::vector<MLRNode>& nodes() const { return nodes_; }
  const std::vector<std::string>& roots() const { return roots_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }

  /// First node with the given id, or nullptr.
  const MLRNode* find(std::string_view id) const;

  /// Nodes of one level in stored order.
  std::vector<const MLRNode*> nodes_at(Level level) const;

 private:
  std::vector<MLRNode> nodes_;
  std::vector<std::string> roots_;
};

/// Equality up to the interleaving of levels in storage: same roots, and the
/// same node sequence within each level.
bool structurally_equal(const MLRGraph& a, const MLRGraph& b);

inline constexpr std::size_t kDefaultMaxGraphNodes = 64;

struct Violation {
  std::string node_id;  // empty for graph-wide violations
  std::string rule;     // e.g. "LevelSkip", "Cycle"
  std::string message;

  friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidationReport {
  bool ok = true;
  std::vector<Violation> violations;  // sorted by (node_id, rule)

  /// One line per violation, suitable for feeding back to a model.
  std::string describe() const;
};

struct ValidationOptions {
  std::size_t max_nodes = kDefaultMaxGraphNodes;
};

/// Rules reported:
///   DuplicateNodeId, EmptyTitle, EmptyReasoningField, DanglingChild,
///   DuplicateEdge, LevelSkip (downward jump of more than one level),
///   LevelInversion (edge to the same or a coarser level), Cycle,
///   NoHighNode, OrphanIntermediate, OrphanDetailed, RootMismatch, TooManyNodes.
ValidationReport validate_graph(const MLRGraph& graph, const ValidationOptions& options = {});

struct GraphStats {
  std::size_t high = 0;
  std::size_t intermediate = 0;
  std::size_t detailed = 0;
  std::size_t edges = 0;

  std::size_t total_nodes() const { return high + intermediate + detailed; }
  friend bool operator==(const GraphStats&, const GraphStats&) = default;
};

GraphStats graph_stats(const MLRGraph& graph);

/// "(3, 5, 5, 12)"
std::string format_stats(const GraphStats& stats);

// --- parsing --------------------------------------------------------------

enum class ParseErrorKind { NoStructuredBlock, MalformedObject, DuplicateNodeId, DanglingChild };

std::string_view parse_error_kind_name(ParseErrorKind kind);

class ParseError : public Error {
 public:
  ParseError(ParseErrorKind kind, std::string detail, std::size_t position = 0,
             std::string node_id = {});

  ParseErrorKind kind() const { return kind_; }
  /// Byte offset into the response for MalformedObject.
  std::size_t position() const { return position_; }
  /// Offending id for DuplicateNodeId / DanglingChild.
  const std::string& node_id() const { return node_id_; }

 private:
  ParseErrorKind kind_;
  std::size_t position_;
  std::string node_id_;
};

struct ParsedGraph {
  MLRGraph graph;
  TaskElements task;
};

/// Reads a model response. The structured JSON object (see graph_to_json) is
/// tried first; failing that, the heading/outline layout produced by
/// serialize_for_prompt and similar hand-written outlines are accepted.
/// The result is not validated. Throws ParseError.
ParsedGraph parse_graph(std::string_view response);

/// Structured-object parse only. Throws ParseError.
ParsedGraph parse_graph_json(std::string_view response);

/// Outline parse only. Throws ParseError.
ParsedGraph parse_graph_outline(std::string_view response);

// --- serialization --------------------------------------------------------

class InvalidGraph : public Error {
 public:
  explicit InvalidGraph(ValidationReport report);
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

/// Deterministic outline rendering of the task analysis and the graph, grouped
/// High -> Intermediate -> Detailed. Throws InvalidGraph when validation fails.
std::string serialize_for_prompt(const MLRGraph& graph, const TaskElements& task);

/// The structured object accepted by parse_graph_json, as JSON text.
std::string graph_to_json(const MLRGraph& graph, const TaskElements& task, int indent = 2);

}  // namespace mot
