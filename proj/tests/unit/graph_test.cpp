#include <gtest/gtest.h>

#include <random>

#include "graph_oracle.hpp"
#include "test_support.hpp"

namespace mot {
namespace {

using testing::largest_sum_graph;

std::vector<std::string> rules(const ValidationReport& r) {
  std::vector<std::string> out;
  for (const auto& v : r.violations) out.push_back(v.rule);
  return out;
}

bool has_rule(const ValidationReport& r, const std::string& rule) {
  auto v = rules(r);
  return std::find(v.begin(), v.end(), rule) != v.end();
}

MLRNode node(std::string id, Level level, std::vector<std::string> children = {}) {
  return MLRNode{id, level, "step " + id, std::nullopt, std::move(children)};
}

TEST(Level, NamesRoundTrip) {
  for (auto l : kAllLevels) {
    EXPECT_EQ(parse_level(level_name(l)), l);
    EXPECT_EQ(parse_level(level_display_name(l)), l);
  }
  EXPECT_EQ(parse_level("Detailed-Level Tasks"), Level::Detailed);
  EXPECT_FALSE(parse_level("sideways"));
}

TEST(ValidateGraph, LargestSumExampleIsValid) {
  auto g = largest_sum_graph();
  auto report = validate_graph(g.graph);
  EXPECT_TRUE(report.ok) << report.describe();
  EXPECT_EQ(g.graph.roots(), (std::vector<std::string>{"H1", "H2", "H3"}));
}

TEST(ValidateGraph, HighToDetailedEdgeIsLevelSkip) {
  auto g = MLRGraph::from_nodes({node("H1", Level::High, {"M1", "D2"}), node("M1", Level::Intermediate, {"D1"}),
                                 node("D1", Level::Detailed), node("D2", Level::Detailed)});
  auto report = validate_graph(g);
  EXPECT_FALSE(report.ok);
  EXPECT_TRUE(has_rule(report, "LevelSkip"));
  // D2's only parent is the skipping edge, so it is also an orphan.
  EXPECT_TRUE(has_rule(report, "OrphanDetailed"));
}

TEST(ValidateGraph, TwoNodeCycleIsReported) {
  auto g = MLRGraph::from_nodes({node("A", Level::High, {"B"}), node("B", Level::Intermediate, {"A"})});
  auto report = validate_graph(g);
  EXPECT_TRUE(has_rule(report, "Cycle"));
  EXPECT_TRUE(has_rule(report, "LevelInversion"));
}

TEST(ValidateGraph, EmptyGraphHasNoHighNode) {
  auto report = validate_graph(MLRGraph{});
  EXPECT_EQ(rules(report), std::vector<std::string>{"NoHighNode"});
}

TEST(ValidateGraph, SingleHighNodeIsValid) {
  auto g = MLRGraph::from_nodes({node("H1", Level::High)});
  EXPECT_TRUE(validate_graph(g).ok);
  EXPECT_EQ(graph_stats(g), (GraphStats{1, 0, 0, 0}));
}

TEST(ValidateGraph, ReportsEachBrokenRuleWithNodeIds) {
  std::vector<MLRNode> nodes = {node("H1", Level::High, {"M1", "ghost", "M1"}), node("M1", Level::Intermediate),
                                node("M2", Level::Intermediate), node("M1", Level::Detailed)};
  nodes[2].title = "  ";
  nodes[2].reasoning = ReasoningBlock{"why", " ", std::nullopt};
  auto report = validate_graph(MLRGraph(nodes, {"H1", "M2"}));
  std::vector<Violation> expected_subset = {
      {"H1", "DanglingChild", "child 'ghost' does not exist"},
      {"H1", "DuplicateEdge", "child 'M1' listed twice"},
  };
  for (const auto& v : expected_subset) {
    EXPECT_NE(std::find(report.violations.begin(), report.violations.end(), v), report.violations.end())
        << v.rule;
  }
  EXPECT_TRUE(has_rule(report, "DuplicateNodeId"));
  EXPECT_TRUE(has_rule(report, "EmptyTitle"));
  EXPECT_TRUE(has_rule(report, "EmptyReasoningField"));
  EXPECT_TRUE(has_rule(report, "OrphanIntermediate"));
  EXPECT_TRUE(has_rule(report, "RootMismatch"));
}

TEST(ValidateGraph, ViolationsAreSortedByNodeThenRule) {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 300; ++i) {
    auto g = testing::random_graph(rng);
    auto report = validate_graph(g.parsed.graph);
    auto sorted = report.violations;
    std::stable_sort(sorted.begin(), sorted.end(), [](const Violation& a, const Violation& b) {
      return std::tie(a.node_id, a.rule) < std::tie(b.node_id, b.rule);
    });
    EXPECT_EQ(sorted, report.violations);
    EXPECT_EQ(validate_graph(g.parsed.graph).violations, report.violations);  // deterministic
  }
}

TEST(ValidateGraph, NodeCapIsConfigurable) {
  std::vector<MLRNode> nodes;
  for (int i = 0; i < 5; ++i) nodes.push_back(node("H" + std::to_string(i), Level::High));
  auto g = MLRGraph::from_nodes(nodes);
  EXPECT_TRUE(validate_graph(g).ok);
  EXPECT_TRUE(has_rule(validate_graph(g, ValidationOptions{4}), "TooManyNodes"));
}

TEST(ValidateGraph, MultipleParentsAreAllowed) {
  auto g = MLRGraph::from_nodes({node("H1", Level::High, {"M1"}), node("H2", Level::High, {"M1"}),
                                 node("M1", Level::Intermediate)});
  EXPECT_TRUE(validate_graph(g).ok);
}

TEST(ValidateGraph, AgreesWithBruteForceOracle) {
  std::mt19937_64 rng(20240611);
  int accepted = 0;
  for (int i = 0; i < 500; ++i) {
    auto g = testing::random_graph(rng);
    bool ok = validate_graph(g.parsed.graph).ok;
    ASSERT_EQ(ok, testing::satisfies_invariants(g.parsed.graph)) << "graph " << i;
    accepted += ok;
  }
  // Both outcomes must be well represented for the comparison to mean much.
  EXPECT_GT(accepted, 150);
  EXPECT_LT(accepted, 400);
}

TEST(ValidGraphs, HaveTopologicalOrderAndReachableNodes) {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 300; ++i) {
    auto g = testing::random_graph(rng).parsed.graph;
    if (!validate_graph(g).ok) continue;
    // Kahn's algorithm consumes every node.
    std::map<std::string, int> indegree;
    for (const auto& n : g.nodes()) indegree[n.id];
    for (const auto& n : g.nodes()) {
      for (const auto& c : n.children) ++indegree[c];
    }
    std::vector<std::string> ready;
    for (const auto& [id, d] : indegree) {
      if (d == 0) ready.push_back(id);
    }
    std::size_t consumed = 0;
    while (!ready.empty()) {
      auto id = ready.back();
      ready.pop_back();
      ++consumed;
      for (const auto& c : g.find(id)->children) {
        if (--indegree[c] == 0) ready.push_back(c);
      }
    }
    EXPECT_EQ(consumed, g.size());
    // Everything is reachable from a root.
    std::set<std::string> seen;
    std::vector<std::string> stack = g.roots();
    while (!stack.empty()) {
      auto id = stack.back();
      stack.pop_back();
      if (!seen.insert(id).second) continue;
      for (const auto& c : g.find(id)->children) stack.push_back(c);
    }
    EXPECT_EQ(seen.size(), g.size());
  }
}

TEST(GraphStats, LargestSumExample) {
  auto s = graph_stats(largest_sum_graph().graph);
  EXPECT_EQ(s, (GraphStats{3, 5, 5, 10}));
  EXPECT_EQ(format_stats(s), "(3, 5, 5, 10)");
}

TEST(GraphStats, MatchesRecountOnRandomGraphs) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto g = testing::random_graph(rng).parsed.graph;
    GraphStats expect;
    for (const auto& n : g.nodes()) {
      (n.level == Level::High ? expect.high : n.level == Level::Intermediate ? expect.intermediate : expect.detailed)++;
      expect.edges += n.children.size();
    }
    auto s = graph_stats(g);
    EXPECT_EQ(s, expect);
    EXPECT_EQ(s.total_nodes(), g.size());
  }
}

TEST(StructuralEquality, IgnoresLevelInterleavingAndEmptyReasoning) {
  auto a = largest_sum_graph().graph;
  auto nodes = a.nodes();
  // High nodes last; order within each level is unchanged.
  std::stable_partition(nodes.begin(), nodes.end(), [](const MLRNode& n) { return n.level != Level::High; });
  ASSERT_EQ(nodes.back().id, "H3");
  nodes.back().reasoning = ReasoningBlock{};
  auto b = MLRGraph(nodes, a.roots());
  EXPECT_TRUE(structurally_equal(a, b));
  nodes.back().title += "!";
  EXPECT_FALSE(structurally_equal(a, MLRGraph(nodes, a.roots())));
}

TEST(Serialize, ThreeNodeGraphHasThreeNodeLinesInLevelOrder) {
  auto g = MLRGraph::from_nodes({node("D1", Level::Detailed), node("M1", Level::Intermediate, {"D1"}),
                                 node("H1", Level::High, {"M1"})});
  auto text = serialize_for_prompt(g, {"goal", "io", ""});
  auto h = text.find("[H1]"), m = text.find("[M1]"), d = text.find("[D1]");
  ASSERT_NE(h, std::string::npos);
  EXPECT_LT(h, m);
  EXPECT_LT(m, d);
  int bullets = 0;
  for (std::size_t p = text.find("- ["); p != std::string::npos; p = text.find("- [", p + 1)) ++bullets;
  EXPECT_EQ(bullets, 3);
}

TEST(Serialize, ReasoningLabelsInFixedOrder) {
  auto text = serialize_for_prompt(largest_sum_graph().graph, largest_sum_graph().task);
  auto p = text.find("Task Purpose:"), r = text.find("Decision Rationale:"), s = text.find("Execution Strategy:");
  ASSERT_NE(p, std::string::npos);
  EXPECT_LT(p, r);
  EXPECT_LT(r, s);
  EXPECT_LT(text.find("Goal:"), text.find("[H1]"));
}

TEST(Serialize, IsDeterministic) {
  auto g = largest_sum_graph();
  EXPECT_EQ(serialize_for_prompt(g.graph, g.task), serialize_for_prompt(g.graph, g.task));
}

TEST(Serialize, RejectsInvalidGraph) {
  auto g = MLRGraph::from_nodes({node("H1", Level::High, {"D1"}), node("D1", Level::Detailed)});
  try {
    serialize_for_prompt(g, {});
    FAIL() << "expected InvalidGraph";
  } catch (const InvalidGraph& e) {
    EXPECT_FALSE(e.report().ok);
  }
}

TEST(Serialize, RoundTripsThroughOutlineParser) {
  auto g = largest_sum_graph();
  auto parsed = parse_graph_outline(serialize_for_prompt(g.graph, g.task));
  EXPECT_TRUE(structurally_equal(parsed.graph, g.graph));
  EXPECT_EQ(parsed.task, g.task);
}

TEST(Serialize, RandomValidGraphsRoundTrip) {
  std::mt19937_64 rng(11);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    auto g = testing::random_graph(rng).parsed;
    if (!validate_graph(g.graph).ok) continue;
    ++checked;
    auto text = serialize_for_prompt(g.graph, g.task);
    auto back = parse_graph(text);
    ASSERT_TRUE(structurally_equal(back.graph, g.graph)) << text;
    EXPECT_EQ(back.task, g.task) << text;
    auto json_back = parse_graph(graph_to_json(g.graph, g.task));
    ASSERT_TRUE(structurally_equal(json_back.graph, g.graph));
  }
  EXPECT_GT(checked, 100);
}

}  // namespace
}  // namespace mot
