#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <map>
#include <optional>
#include <set>
#include <unordered_map>

#include "mot/graph.hpp"
#include "text_util.hpp"

namespace mot {

std::string_view parse_error_kind_name(ParseErrorKind kind) {
  switch (kind) {
    case ParseErrorKind::NoStructuredBlock: return "NoStructuredBlock";
    case ParseErrorKind::MalformedObject: return "MalformedObject";
    case ParseErrorKind::DuplicateNodeId: return "DuplicateNodeId";
    case ParseErrorKind::DanglingChild: return "DanglingChild";
  }
  return "NoStructuredBlock";
}

ParseError::ParseError(ParseErrorKind kind, std::string detail, std::size_t position,
                       std::string node_id)
    : Error(std::string(parse_error_kind_name(kind)) + ": " + detail),
      kind_(kind),
      position_(position),
      node_id_(std::move(node_id)) {}

namespace {

using json = nlohmann::json;

bool valid_id_token(std::string_view id) {
  if (id.empty()) return false;
  for (char c : id) {
    if (text::is_space(c) || c == '[' || c == ']' || c == ',') return false;
  }
  return true;
}

// Shared tail of both parsers: synthesize missing ids, resolve child
// references (by id, then by unique title) and reject duplicates/dangling refs.
struct DraftNode {
  std::optional<std::string> id;
  Level level = Level::High;
  std::string title;
  ReasoningBlock reasoning;
  std::vector<std::string> child_refs;
  std::vector<std::string> parent_refs;
  std::vector<std::size_t> implicit_children;  // from outline nesting
};

MLRGraph finish_graph(std::vector<DraftNode> drafts) {
  std::map<Level, int> counters;
  std::set<std::string> explicit_ids;
  for (const auto& d : drafts) {
    if (d.id) explicit_ids.insert(*d.id);
  }
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::size_t> by_id;
  for (auto& d : drafts) {
    std::string id;
    if (d.id) {
      id = *d.id;
    } else {
      static constexpr char kPrefix[] = {'H', 'M', 'D'};
      do {
        id = std::string(1, kPrefix[static_cast<int>(d.level)]) +
             std::to_string(++counters[d.level]);
      } while (explicit_ids.count(id) || by_id.count(id));
    }
    if (!by_id.emplace(id, ids.size()).second) {
      throw ParseError(ParseErrorKind::DuplicateNodeId, "node id '" + id + "' is repeated", 0, id);
    }
    ids.push_back(id);
  }

  std::unordered_map<std::string, std::vector<std::size_t>> by_title;
  for (std::size_t i = 0; i < drafts.size(); ++i) by_title[drafts[i].title].push_back(i);

  auto resolve = [&](const std::string& ref) -> std::size_t {
    if (auto it = by_id.find(ref); it != by_id.end()) return it->second;
    if (auto it = by_title.find(ref); it != by_title.end() && it->second.size() == 1) {
      return it->second.front();
    }
    throw ParseError(ParseErrorKind::DanglingChild, "reference '" + ref + "' matches no node", 0,
                     ref);
  };

  std::vector<std::vector<std::string>> children(drafts.size());
  auto add_edge = [&](std::size_t from, std::size_t to) {
    auto& list = children[from];
    if (std::find(list.begin(), list.end(), ids[to]) == list.end()) list.push_back(ids[to]);
  };
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    for (const auto& ref : drafts[i].child_refs) add_edge(i, resolve(ref));
    for (std::size_t c : drafts[i].implicit_children) add_edge(i, c);
  }
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    for (const auto& ref : drafts[i].parent_refs) add_edge(resolve(ref), i);
  }

  std::vector<MLRNode> nodes;
  nodes.reserve(drafts.size());
  for (std::size_t i = 0; i < drafts.size(); ++i) {
    MLRNode n;
    n.id = ids[i];
    n.level = drafts[i].level;
    n.title = std::move(drafts[i].title);
    if (!drafts[i].reasoning.empty()) n.reasoning = std::move(drafts[i].reasoning);
    n.children = std::move(children[i]);
    nodes.push_back(std::move(n));
  }
  return MLRGraph::from_nodes(std::move(nodes));
}

std::optional<std::string> trimmed_or_none(std::string_view s) {
  auto t = text::trim(s);
  if (t.empty()) return std::nullopt;
  return std::string(t);
}

// --- structured object ----------------------------------------------------

struct Candidate {
  std::size_t offset;
  std::string_view body;
};

// Finds the end of a balanced {...} region starting at `start`, honouring
// JSON string literals. Returns npos when unbalanced.
std::size_t match_braces(std::string_view s, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < s.size(); ++i) {
    char c = s[i];
    if (in_string) {
      if (c == '\\') {
        ++i;
      } else if (c == '"') {
        in_string = false;
      }
      continue;
    }
    if (c == '"') {
      in_string = true;
    } else if (c == '{') {
      ++depth;
    } else if (c == '}') {
      if (--depth == 0) return i;
    }
  }
  return std::string_view::npos;
}

std::vector<Candidate> find_object_candidates(std::string_view s) {
  std::vector<Candidate> out;
  // Fenced blocks first.
  std::size_t pos = 0;
  while ((pos = s.find("```", pos)) != std::string_view::npos) {
    auto line_end = s.find('\n', pos);
    if (line_end == std::string_view::npos) break;
    auto close = s.find("```", line_end + 1);
    if (close == std::string_view::npos) break;
    auto inner = s.substr(line_end + 1, close - line_end - 1);
    auto lead = inner.find_first_not_of(" \t\r\n");
    if (lead != std::string_view::npos && inner[lead] == '{') {
      out.push_back({line_end + 1 + lead, text::trim(inner.substr(lead))});
    }
    pos = close + 3;
  }
  // Then any balanced top-level brace region.
  pos = 0;
  while ((pos = s.find('{', pos)) != std::string_view::npos) {
    auto end = match_braces(s, pos);
    if (end == std::string_view::npos) {
      ++pos;
      continue;
    }
    out.push_back({pos, s.substr(pos, end - pos + 1)});
    pos = end + 1;
  }
  return out;
}

std::string as_text(const json& v, std::size_t where, std::string_view what) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_null()) return {};
  throw ParseError(ParseErrorKind::MalformedObject, std::string(what) + " must be a string", where);
}

const json* member(const json& obj, std::initializer_list<const char*> names) {
  for (const char* name : names) {
    if (auto it = obj.find(name); it != obj.end()) return &*it;
  }
  return nullptr;
}

ParsedGraph graph_from_object(const json& root, std::size_t where) {
  ParsedGraph result;
  if (const json* ta = member(root, {"task_analysis", "task"}); ta && ta->is_object()) {
    if (const json* v = member(*ta, {"goal"})) result.task.goal = std::string(text::trim(as_text(*v, where, "goal")));
    if (const json* v = member(*ta, {"io_spec", "io", "input_output"})) {
      result.task.io_spec = std::string(text::trim(as_text(*v, where, "io_spec")));
    }
    if (const json* v = member(*ta, {"constraints"})) {
      if (v->is_array()) {
        std::vector<std::string> parts;
        for (const auto& e : *v) parts.push_back(as_text(e, where, "constraints"));
        result.task.constraints = text::join(parts, "\n");
      } else {
        result.task.constraints = std::string(text::trim(as_text(*v, where, "constraints")));
      }
    }
  }
  const json* nodes = member(root, {"nodes"});
  if (!nodes || !nodes->is_array()) {
    throw ParseError(ParseErrorKind::MalformedObject, "'nodes' must be an array", where);
  }
  std::vector<DraftNode> drafts;
  for (const auto& item : *nodes) {
    if (!item.is_object()) {
      throw ParseError(ParseErrorKind::MalformedObject, "node entries must be objects", where);
    }
    DraftNode d;
    if (const json* v = member(item, {"id"})) {
      auto id = std::string(text::trim(as_text(*v, where, "id")));
      if (!id.empty()) {
        if (!valid_id_token(id)) {
          throw ParseError(ParseErrorKind::MalformedObject, "node id '" + id + "' is not a token", where);
        }
        d.id = std::move(id);
      }
    }
    const json* level = member(item, {"level"});
    if (!level || !level->is_string()) {
      throw ParseError(ParseErrorKind::MalformedObject, "node level missing", where);
    }
    auto parsed_level = parse_level(level->get<std::string>());
    if (!parsed_level) {
      throw ParseError(ParseErrorKind::MalformedObject,
                       "unknown level '" + level->get<std::string>() + "'", where);
    }
    d.level = *parsed_level;
    if (const json* v = member(item, {"title", "name"})) {
      d.title = std::string(text::trim(as_text(*v, where, "title")));
    }
    if (const json* r = member(item, {"reasoning"}); r && !r->is_null()) {
      if (!r->is_object()) {
        throw ParseError(ParseErrorKind::MalformedObject, "reasoning must be an object", where);
      }
      if (const json* v = member(*r, {"purpose", "task_purpose"})) {
        d.reasoning.task_purpose = trimmed_or_none(as_text(*v, where, "purpose"));
      }
      if (const json* v = member(*r, {"rationale", "decision_rationale"})) {
        d.reasoning.decision_rationale = trimmed_or_none(as_text(*v, where, "rationale"));
      }
      if (const json* v = member(*r, {"strategy", "execution_strategy"})) {
        d.reasoning.execution_strategy = trimmed_or_none(as_text(*v, where, "strategy"));
      }
    }
    if (const json* c = member(item, {"children"}); c && !c->is_null()) {
      if (!c->is_array()) {
        throw ParseError(ParseErrorKind::MalformedObject, "children must be an array", where);
      }
      for (const auto& e : *c) d.child_refs.push_back(std::string(text::trim(as_text(e, where, "child"))));
    }
    drafts.push_back(std::move(d));
  }
  result.graph = finish_graph(std::move(drafts));
  return result;
}

// --- outline --------------------------------------------------------------

enum class FieldKind { None, Title, Purpose, Rationale, Strategy, Goal, Io, Constraints };

// Removes markdown decoration: heading hashes, bullets, numbering, emphasis.
struct Cleaned {
  bool bullet = false;
  std::string text;
};

Cleaned clean_line(std::string_view line) {
  Cleaned out;
  auto s = text::trim(line);
  while (!s.empty() && (s.front() == '#' || s.front() == '>')) s = text::trim_left(s.substr(1));
  if (!s.empty() && (s.front() == '-' || s.front() == '*' || s.front() == '+') &&
      (s.size() == 1 || s[1] == ' ' || s[1] == '\t')) {
    out.bullet = true;
    s = text::trim_left(s.substr(1));
  } else {
    std::size_t i = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
    if (i > 0 && i < s.size() && (s[i] == '.' || s[i] == ')') &&
        (i + 1 == s.size() || s[i + 1] == ' ')) {
      out.bullet = true;
      s = text::trim_left(s.substr(i + 1));
    }
  }
  // Emphasis wrapping a leading label ("**Task Purpose**: x") or the whole
  // line ("**Compute sums**"). Inner "**" is left alone (x**2, **kwargs).
  std::string t(s);
  for (const char* marker : {"**", "__"}) {
    if (t.rfind(marker, 0) == 0) {
      auto close = t.find(marker, 2);
      if (close != std::string::npos) {
        t.erase(close, 2);
        t.erase(0, 2);
      }
    }
  }
  out.text = std::string(text::trim(t));
  return out;
}

// "Task Purpose: x" -> (Purpose, "x")
std::optional<std::pair<FieldKind, std::string>> labelled_field(std::string_view s) {
  static const std::pair<const char*, FieldKind> kLabels[] = {
      {"task purpose", FieldKind::Purpose},       {"purpose", FieldKind::Purpose},
      {"decision rationale", FieldKind::Rationale}, {"rationale", FieldKind::Rationale},
      {"execution strategy", FieldKind::Strategy},  {"strategy", FieldKind::Strategy},
      {"goal description", FieldKind::Goal},      {"goal", FieldKind::Goal},
      {"input/output specifications", FieldKind::Io}, {"input/output", FieldKind::Io},
      {"input and output", FieldKind::Io},        {"io spec", FieldKind::Io},
      {"constraints", FieldKind::Constraints},
  };
  for (const auto& [label, kind] : kLabels) {
    std::string_view l(label);
    if (!text::starts_with_icase(s, l)) continue;
    auto rest = text::trim_left(s.substr(l.size()));
    if (rest.empty() || rest.front() != ':') continue;
    return std::pair{kind, std::string(text::trim(rest.substr(1)))};
  }
  return std::nullopt;
}

std::optional<std::pair<bool, std::string>> edge_list(std::string_view s) {
  static const std::pair<const char*, bool> kLabels[] = {
      {"children", true}, {"child nodes", true}, {"subtasks", true},
      {"sub-tasks", true}, {"parents", false}, {"parent", false},
  };
  for (const auto& [label, is_children] : kLabels) {
    std::string_view l(label);
    if (!text::starts_with_icase(s, l)) continue;
    auto rest = text::trim_left(s.substr(l.size()));
    if (rest.empty() || rest.front() != ':') continue;
    return std::pair{is_children, std::string(text::trim(rest.substr(1)))};
  }
  return std::nullopt;
}

std::vector<std::string> split_refs(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    auto t = std::string(text::trim(cur));
    if (!t.empty() && t.front() == '[' && t.back() == ']') t = t.substr(1, t.size() - 2);
    if (!t.empty() && text::to_lower(t) != "none") out.push_back(t);
    cur.clear();
  };
  for (char c : s) {
    if (c == ',' || c == ';') {
      flush();
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return out;
}

// Recognises a level heading ("High-Level", "### Intermediate-Level Tasks:")
// or an inline level node ("- High-Level: Validate input"). For the inline
// form the title is returned.
struct LevelMarker {
  Level level;
  std::optional<std::string> inline_title;
};

std::optional<LevelMarker> level_marker(std::string_view s) {
  auto lower = text::to_lower(s);
  static const std::pair<const char*, Level> kWords[] = {
      {"high", Level::High}, {"intermediate", Level::Intermediate}, {"detailed", Level::Detailed}};
  for (const auto& [word, level] : kWords) {
    std::string_view w(word);
    if (lower.rfind(w, 0) != 0) continue;
    std::string_view rest = std::string_view(s).substr(w.size());
    std::string_view rest_lower = std::string_view(lower).substr(w.size());
    // Require the word "level" right after ("-level", " level").
    if (!rest_lower.empty() && (rest_lower.front() == '-' || rest_lower.front() == ' ')) {
      rest_lower.remove_prefix(1);
      rest.remove_prefix(1);
    }
    if (rest_lower.rfind("level", 0) != 0) return std::nullopt;
    rest.remove_prefix(5);
    rest_lower.remove_prefix(5);
    auto colon = rest.find(':');
    std::string_view before = colon == std::string_view::npos ? rest : rest.substr(0, colon);
    // Tolerate decorations such as " Tasks", " Nodes", " Design".
    auto b = text::to_lower(text::trim(before));
    if (!(b.empty() || b == "tasks" || b == "task" || b == "nodes" || b == "node" || b == "design" ||
          b == "designs" || b == "steps")) {
      return std::nullopt;
    }
    if (colon == std::string_view::npos) return LevelMarker{level, std::nullopt};
    auto title = text::trim(rest.substr(colon + 1));
    if (title.empty()) return LevelMarker{level, std::nullopt};
    return LevelMarker{level, std::string(title)};
  }
  return std::nullopt;
}

// "[H1] Title", "H1: Title", "H1. Title", "(H1) Title" -> id + title.
std::pair<std::optional<std::string>, std::string> split_id_title(std::string_view s) {
  s = text::trim(s);
  if (!s.empty() && (s.front() == '[' || s.front() == '(')) {
    char close = s.front() == '[' ? ']' : ')';
    auto end = s.find(close);
    if (end != std::string_view::npos) {
      auto id = text::trim(s.substr(1, end - 1));
      if (valid_id_token(id)) {
        auto title = text::trim(s.substr(end + 1));
        if (!title.empty() && (title.front() == ':' || title.front() == '-')) {
          title = text::trim(title.substr(1));
        }
        return {std::string(id), std::string(title)};
      }
    }
  }
  // Short alphanumeric id like H1, M2, D3, N1.2 followed by ':' or '.'.
  std::size_t i = 0;
  while (i < s.size() && i < 3 && std::isalpha(static_cast<unsigned char>(s[i]))) ++i;
  std::size_t letters = i;
  while (i < s.size() && (std::isdigit(static_cast<unsigned char>(s[i])) || s[i] == '.')) ++i;
  if (letters > 0 && i > letters && i < s.size() && (s[i] == ':' || s[i] == ' ')) {
    auto id = s.substr(0, i);
    while (!id.empty() && id.back() == '.') id.remove_suffix(1);
    auto rest = text::trim(s.substr(i));
    if (!rest.empty() && (rest.front() == ':' || rest.front() == '-')) rest = text::trim(rest.substr(1));
    if (!rest.empty() && (s[i] == ':' || s[i - 1] == '.')) return {std::string(id), std::string(rest)};
  }
  return {std::nullopt, std::string(s)};
}

}  // namespace

ParsedGraph parse_graph_json(std::string_view response) {
  std::optional<ParseError> malformed;
  for (const auto& cand : find_object_candidates(response)) {
    json root;
    try {
      root = json::parse(cand.body);
    } catch (const json::parse_error& e) {
      if (!malformed && cand.body.find("\"nodes\"") != std::string_view::npos) {
        malformed = ParseError(ParseErrorKind::MalformedObject, e.what(), cand.offset + e.byte);
      }
      continue;
    } catch (const json::exception& e) {
      // e.g. a number literal out of range
      if (!malformed && cand.body.find("\"nodes\"") != std::string_view::npos) {
        malformed = ParseError(ParseErrorKind::MalformedObject, e.what(), cand.offset);
      }
      continue;
    }
    if (!root.is_object() || !root.contains("nodes")) continue;
    try {
      return graph_from_object(root, cand.offset);
    } catch (const ParseError& e) {
      if (e.kind() != ParseErrorKind::MalformedObject) throw;
      if (!malformed) malformed = e;
    }
  }
  if (malformed) throw *malformed;
  throw ParseError(ParseErrorKind::NoStructuredBlock, "no structured graph object found");
}

ParsedGraph parse_graph_outline(std::string_view response) {
  ParsedGraph result;
  std::vector<DraftNode> drafts;
  std::optional<Level> section;
  FieldKind field = FieldKind::None;
  std::string* field_target = nullptr;
  std::optional<std::string>* optional_target = nullptr;
  // Indentation stack for inline-level nesting: (indent, draft index).
  std::vector<std::pair<std::size_t, std::size_t>> nesting;
  bool in_fence = false;

  auto append_to_field = [&](std::string_view piece, bool newline) {
    if (field_target) {
      if (newline) *field_target += "\n";
      *field_target += piece;
    } else if (optional_target) {
      if (!*optional_target) *optional_target = std::string();
      if (newline) **optional_target += "\n";
      **optional_target += piece;
    }
  };
  auto set_field = [&](FieldKind kind, std::string value) {
    field = kind;
    field_target = nullptr;
    optional_target = nullptr;
    DraftNode* node = drafts.empty() || section == std::nullopt ? nullptr : &drafts.back();
    switch (kind) {
      case FieldKind::Goal: field_target = &result.task.goal; break;
      case FieldKind::Io:
        field_target = &result.task.io_spec;
        if (!field_target->empty()) *field_target += "\n";
        break;
      case FieldKind::Constraints: field_target = &result.task.constraints; break;
      case FieldKind::Purpose:
        if (node) optional_target = &node->reasoning.task_purpose;
        break;
      case FieldKind::Rationale:
        if (node) optional_target = &node->reasoning.decision_rationale;
        break;
      case FieldKind::Strategy:
        if (node) optional_target = &node->reasoning.execution_strategy;
        break;
      case FieldKind::Title:
        if (node) field_target = &node->title;
        break;
      case FieldKind::None: break;
    }
    if (field_target && kind != FieldKind::Io) field_target->clear();
    if (optional_target) optional_target->reset();
    if (field_target || optional_target) {
      if (field_target) {
        *field_target += value;
      } else {
        *optional_target = std::move(value);
      }
    }
  };
  auto start_node = [&](Level level, std::optional<std::string> id, std::string title) {
    DraftNode d;
    d.id = std::move(id);
    d.level = level;
    drafts.push_back(std::move(d));
    set_field(FieldKind::Title, std::move(title));
  };

  for (auto raw : text::split_lines(response)) {
    auto trimmed = text::trim(raw);
    if (trimmed.rfind("```", 0) == 0 || trimmed.rfind("~~~", 0) == 0) {
      in_fence = !in_fence;
      continue;
    }
    if (in_fence) continue;
    if (trimmed.empty()) {
      field = FieldKind::None;
      field_target = nullptr;
      optional_target = nullptr;
      continue;
    }

    // "| text" continues the current field verbatim.
    if (trimmed.front() == '|') {
      auto body = text::trim_left(raw).substr(1);
      if (!body.empty() && body.front() == ' ') body.remove_prefix(1);
      append_to_field(body, true);
      continue;
    }

    auto cleaned = clean_line(raw);
    if (cleaned.text.empty()) continue;
    std::string_view c = cleaned.text;

    if (auto marker = level_marker(c)) {
      if (marker->inline_title) {
        std::size_t indent = text::indent_width(raw);
        auto [id, title] = split_id_title(*marker->inline_title);
        section = marker->level;
        start_node(marker->level, std::move(id), std::move(title));
        std::size_t me = drafts.size() - 1;
        while (!nesting.empty() && nesting.back().first >= indent) nesting.pop_back();
        if (!nesting.empty()) {
          auto parent = nesting.back().second;
          if (static_cast<int>(drafts[parent].level) + 1 == static_cast<int>(marker->level)) {
            drafts[parent].implicit_children.push_back(me);
          }
        }
        nesting.emplace_back(indent, me);
        section = marker->level;
      } else {
        section = marker->level;
        field = FieldKind::None;
        field_target = nullptr;
        optional_target = nullptr;
        nesting.clear();
      }
      continue;
    }

    if (auto lf = labelled_field(c)) {
      bool node_field = lf->first == FieldKind::Purpose || lf->first == FieldKind::Rationale ||
                        lf->first == FieldKind::Strategy;
      if (node_field && (drafts.empty() || !section)) continue;
      if (!node_field && section && !drafts.empty() && lf->first == FieldKind::Constraints) {
        // "Constraints:" inside a node is prose, not task analysis.
        append_to_field(c, true);
        continue;
      }
      set_field(lf->first, std::move(lf->second));
      continue;
    }

    if (section && !drafts.empty()) {
      if (auto edges = edge_list(c)) {
        auto refs = split_refs(edges->second);
        auto& d = drafts.back();
        auto& target = edges->first ? d.child_refs : d.parent_refs;
        target.insert(target.end(), refs.begin(), refs.end());
        field = FieldKind::None;
        field_target = nullptr;
        optional_target = nullptr;
        continue;
      }
    }

    if (section && cleaned.bullet) {
      auto [id, title] = split_id_title(c);
      start_node(*section, std::move(id), std::move(title));
      continue;
    }

    if (field != FieldKind::None) append_to_field(c, true);
  }

  for (auto& d : drafts) d.title = std::string(text::trim(d.title));
  for (auto& d : drafts) {
    for (auto* f : {&d.reasoning.task_purpose, &d.reasoning.decision_rationale,
                    &d.reasoning.execution_strategy}) {
      if (*f) *f = trimmed_or_none(**f);
    }
  }
  result.task.goal = std::string(text::trim(result.task.goal));
  result.task.io_spec = std::string(text::trim(result.task.io_spec));
  result.task.constraints = std::string(text::trim(result.task.constraints));

  if (drafts.empty()) {
    throw ParseError(ParseErrorKind::NoStructuredBlock, "no graph object or level outline found");
  }
  result.graph = finish_graph(std::move(drafts));
  return result;
}

ParsedGraph parse_graph(std::string_view response) {
  try {
    return parse_graph_json(response);
  } catch (const ParseError& e) {
    if (e.kind() == ParseErrorKind::NoStructuredBlock) return parse_graph_outline(response);
    if (e.kind() != ParseErrorKind::MalformedObject) throw;
    try {
      return parse_graph_outline(response);
    } catch (const ParseError& outline_error) {
      if (outline_error.kind() == ParseErrorKind::NoStructuredBlock) throw e;
      throw;
    }
  }
}

}  // namespace mot
