#include <algorithm>
#include <cctype>

#include "mot/benchmark.hpp"
#include "python_lines.hpp"
#include "text_util.hpp"

namespace mot {

namespace pysrc {

namespace {

bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// True when the literal starting at `quote_pos` carries a raw prefix
// (r, rb, br, fr, rf).
bool raw_prefix(std::string_view s, std::size_t quote_pos) {
  std::size_t i = quote_pos;
  bool raw = false;
  int letters = 0;
  while (i > 0 && letters < 2) {
    char c = static_cast<char>(std::tolower(static_cast<unsigned char>(s[i - 1])));
    if (c == 'r') {
      raw = true;
    } else if (c != 'b' && c != 'f' && c != 'u') {
      break;
    }
    --i;
    ++letters;
  }
  if (i > 0 && is_ident_char(s[i - 1])) return false;  // part of an identifier
  return raw;
}

}  // namespace

std::optional<Layout> scan(std::string_view source) {
  Layout layout;
  layout.physical = text::split_lines(source);
  layout.starts_in_string.assign(layout.physical.size(), false);

  int depth = 0;
  bool in_string = false;
  bool triple = false;
  bool raw = false;
  char quote = 0;
  bool continuation = false;
  std::optional<LogicalLine> current;

  for (std::size_t li = 0; li < layout.physical.size(); ++li) {
    std::string_view line = layout.physical[li];
    layout.starts_in_string[li] = in_string;
    bool open_before = in_string || depth > 0 || continuation;
    continuation = false;
    if (!open_before) {
      auto body = text::trim_left(line);
      if (body.empty() || body.front() == '#') continue;
      current = LogicalLine{text::indent_width(line), li, li, body};
    } else if (current) {
      current->last = li;
    }

    for (std::size_t i = 0; i < line.size(); ++i) {
      char c = line[i];
      if (in_string) {
        if (c == '\\' && !raw) {
          ++i;
          continue;
        }
        if (c == quote) {
          if (!triple) {
            in_string = false;
          } else if (i + 2 < line.size() && line[i + 1] == quote && line[i + 2] == quote) {
            in_string = false;
            i += 2;
          }
        }
        continue;
      }
      if (c == '#') break;
      if (c == '"' || c == '\'') {
        quote = c;
        raw = raw_prefix(line, i);
        in_string = true;
        triple = i + 2 < line.size() && line[i + 1] == c && line[i + 2] == c;
        if (triple) i += 2;
        continue;
      }
      if (c == '(' || c == '[' || c == '{') ++depth;
      if (c == ')' || c == ']' || c == '}') {
        if (--depth < 0) return std::nullopt;
      }
    }
    if (in_string && !triple) {
      // A single-quoted string may only continue through a trailing backslash.
      if (line.empty() || line.back() != '\\') return std::nullopt;
    }
    if (!in_string && depth == 0) {
      auto t = text::trim_right(line);
      continuation = !t.empty() && t.back() == '\\';
    }
    if (!in_string && depth == 0 && !continuation && current) {
      layout.lines.push_back(*current);
      current.reset();
    }
  }
  if (in_string || depth != 0) return std::nullopt;
  if (current) layout.lines.push_back(*current);
  return layout;
}

std::string_view first_word(std::string_view head) {
  std::size_t i = 0;
  while (i < head.size() && is_ident_char(head[i])) ++i;
  return head.substr(0, i);
}

bool is_compound_keyword(std::string_view w) {
  static constexpr std::string_view kWords[] = {"for",   "while", "if",     "elif",  "else",
                                                "with",  "try",   "except", "finally", "def",
                                                "class", "async", "match",  "case",  "return",
                                                "yield", "break", "continue"};
  return std::find(std::begin(kWords), std::end(kWords), w) != std::end(kWords);
}

}  // namespace pysrc

namespace {

// Physical lines [first, last] with up to `indent` leading columns removed,
// leaving lines that start inside a string literal untouched.
std::string dedent_block(const pysrc::Layout& layout, std::size_t first, std::size_t last,
                         std::size_t indent) {
  std::string out;
  for (std::size_t i = first; i <= last; ++i) {
    std::string_view line = layout.physical[i];
    if (!layout.starts_in_string[i]) {
      std::size_t strip = 0;
      while (strip < line.size() && strip < indent && (line[strip] == ' ' || line[strip] == '\t')) {
        ++strip;
      }
      line.remove_prefix(strip);
    }
    out += line;
    out += '\n';
  }
  return out;
}

bool is_check_header(std::string_view head) {
  if (head.rfind("def", 0) != 0) return false;
  auto rest = text::trim_left(head.substr(3));
  if (rest.size() == head.size() - 3) return false;  // "define..."
  return rest.rfind("check", 0) == 0 && text::trim_left(rest.substr(5)).rfind("(", 0) == 0;
}

bool is_check_call(std::string_view head) {
  return head.rfind("check(", 0) == 0 || head.rfind("check (", 0) == 0;
}

}  // namespace

TestSuite split_check_function(std::string_view test_source, std::string_view entry_point) {
  auto layout = pysrc::scan(test_source);
  if (!layout) throw SplitError("test payload is not tokenizable");
  const auto& lines = layout->lines;

  auto check_it = std::find_if(lines.begin(), lines.end(), [](const pysrc::LogicalLine& l) {
    return l.indent == 0 && is_check_header(l.head);
  });
  if (check_it == lines.end()) throw SplitError("no `def check(...)` in test payload");

  // Body: logical lines after the header until the next top-level line.
  std::size_t header_index = static_cast<std::size_t>(check_it - lines.begin());
  std::size_t body_end = header_index + 1;
  while (body_end < lines.size() && lines[body_end].indent > 0) ++body_end;
  if (body_end == header_index + 1) throw SplitError("check function has an empty body");
  const std::size_t body_indent = lines[header_index + 1].indent;

  // Module-level prelude: everything outside the check function except calls
  // to check itself.
  std::string prelude;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i >= header_index && i < body_end) continue;
    if (lines[i].indent != 0) {
      continue;  // bodies are emitted together with their headers below
    }
    if (is_check_call(lines[i].head)) continue;
    std::size_t last = lines[i].last;
    std::size_t j = i + 1;
    while (j < lines.size() && lines[j].indent > 0 && !(j >= header_index && j < body_end)) {
      last = lines[j].last;
      ++j;
    }
    prelude += dedent_block(*layout, lines[i].first, last, 0);
  }

  const std::string binding = "candidate = " + std::string(entry_point) + "\n";

  struct Statement {
    std::size_t first_line;
    std::size_t last_line;
    bool is_assert;
    bool compound;
  };
  std::vector<Statement> statements;
  for (std::size_t i = header_index + 1; i < body_end; ++i) {
    const auto& l = lines[i];
    if (l.indent < body_indent) {
      // Inconsistent dedent inside the body.
      throw SplitError("inconsistent indentation in check body");
    }
    if (l.indent > body_indent) {
      if (statements.empty()) throw SplitError("unexpected indentation in check body");
      statements.back().last_line = l.last;
      statements.back().compound = true;
      continue;
    }
    auto word = pysrc::first_word(l.head);
    bool docstring = !l.head.empty() && (l.head.front() == '"' || l.head.front() == '\'');
    if (docstring || word == "pass") continue;
    statements.push_back({l.first, l.last, word == "assert",
                          pysrc::is_compound_keyword(word) || l.head.front() == '@'});
  }

  TestSuite suite;
  bool any_compound = std::any_of(statements.begin(), statements.end(),
                                  [](const Statement& s) { return s.compound; });
  bool any_assert = std::any_of(statements.begin(), statements.end(),
                                [](const Statement& s) { return s.is_assert; });
  if (any_compound || !any_assert) {
    suite.setup = prelude;
    suite.cases.push_back(dedent_block(*layout, check_it->first, lines[body_end - 1].last, 0) +
                          "check(" + std::string(entry_point) + ")\n");
    suite.monolithic = true;
    return suite;
  }

  suite.setup = prelude + binding;
  std::string carried;  // plain statements seen after the first assert
  bool seen_assert = false;
  for (const auto& s : statements) {
    auto block = dedent_block(*layout, s.first_line, s.last_line, body_indent);
    if (s.is_assert) {
      seen_assert = true;
      suite.cases.push_back(carried + block);
    } else if (!seen_assert) {
      suite.setup += block;
    } else {
      carried += block;
    }
  }
  return suite;
}

TestSuite split_humaneval_tests(std::string_view test_source, std::string_view entry_point) {
  try {
    return split_check_function(test_source, entry_point);
  } catch (const SplitError&) {
    TestSuite suite;
    std::string program(test_source);
    if (!program.empty() && program.back() != '\n') program += '\n';
    if (program.find("def check") != std::string::npos) {
      program += "check(" + std::string(entry_point) + ")\n";
    }
    suite.cases.push_back(std::move(program));
    suite.monolithic = true;
    return suite;
  }
}

TestSuite split_mbpp_tests(const std::vector<std::string>& test_list, std::string_view setup) {
  TestSuite suite;
  suite.setup = std::string(setup);
  if (!suite.setup.empty() && suite.setup.back() != '\n') suite.setup += '\n';
  for (const auto& t : test_list) {
    std::string c = t;
    if (!c.empty() && c.back() != '\n') c += '\n';
    suite.cases.push_back(std::move(c));
  }
  return suite;
}

std::optional<std::string> first_function_name(std::string_view source) {
  auto layout = pysrc::scan(source);
  std::vector<std::string_view> heads;
  if (layout) {
    for (const auto& l : layout->lines) {
      if (l.indent == 0) heads.push_back(l.head);
    }
  } else {
    for (auto line : text::split_lines(source)) {
      if (!line.empty() && !text::is_space(line.front())) heads.push_back(line);
    }
  }
  for (auto head : heads) {
    if (head.rfind("async ", 0) == 0) head = text::trim_left(head.substr(6));
    if (head.rfind("def ", 0) != 0) continue;
    auto rest = text::trim_left(head.substr(4));
    std::size_t i = 0;
    while (i < rest.size() && (std::isalnum(static_cast<unsigned char>(rest[i])) || rest[i] == '_')) ++i;
    if (i > 0) return std::string(rest.substr(0, i));
  }
  return std::nullopt;
}

bool defines_name(std::string_view source, std::string_view name) {
  if (name.empty()) return false;
  auto layout = pysrc::scan(source);
  std::vector<std::string_view> heads;
  if (layout) {
    for (const auto& l : layout->lines) {
      if (l.indent == 0) heads.push_back(l.head);
    }
  } else {
    for (auto line : text::split_lines(source)) {
      if (!line.empty() && !text::is_space(line.front())) heads.push_back(line);
    }
  }
  auto word_at = [&](std::string_view s, std::size_t pos) {
    if (s.substr(pos, name.size()) != name) return false;
    if (pos > 0 && (std::isalnum(static_cast<unsigned char>(s[pos - 1])) || s[pos - 1] == '_')) {
      return false;
    }
    std::size_t after = pos + name.size();
    return after == s.size() ||
           !(std::isalnum(static_cast<unsigned char>(s[after])) || s[after] == '_');
  };
  for (auto head : heads) {
    if (head.rfind("async ", 0) == 0) head = text::trim_left(head.substr(6));
    for (std::string_view kw : {"def ", "class "}) {
      if (head.rfind(kw, 0) == 0) {
        auto rest = text::trim_left(head.substr(kw.size()));
        if (word_at(rest, 0)) return true;
      }
    }
    if (word_at(head, 0)) {
      auto rest = text::trim_left(head.substr(name.size()));
      if (!rest.empty() && (rest.front() == ':' || (rest.front() == '=' && (rest.size() == 1 || rest[1] != '=')) ||
                            rest.front() == ',')) {
        return true;
      }
    }
    if (head.rfind("import ", 0) == 0 || head.rfind("from ", 0) == 0) {
      // "import x as name", "from m import name", "import name"
      auto imp = head.find("import ");
      auto names = head.substr(imp + 7);
      std::size_t pos = 0;
      while ((pos = names.find(name, pos)) != std::string_view::npos) {
        if (word_at(names, pos)) return true;
        pos += name.size();
      }
    }
  }
  return false;
}

MissingEntryPoint::MissingEntryPoint(const std::string& name)
    : Error("candidate does not define entry point '" + name + "'") {}

std::string entry_point_guard(std::string_view entry_point) {
  std::string n(entry_point);
  return "assert '" + n + "' in globals(), 'candidate does not define " + n + "'\n";
}

std::string assemble_case_program(const Problem& problem, std::string_view candidate,
                                  std::size_t case_index) {
  if (case_index >= problem.suite.cases.size()) {
    throw std::out_of_range("case index " + std::to_string(case_index) + " out of range");
  }
  if (problem.entry_point && !defines_name(candidate, *problem.entry_point)) {
    throw MissingEntryPoint(*problem.entry_point);
  }
  std::string program(candidate);
  if (!program.empty() && program.back() != '\n') program += '\n';
  program += '\n';
  if (problem.entry_point) program += entry_point_guard(*problem.entry_point);
  program += problem.suite.setup;
  if (!program.empty() && program.back() != '\n') program += '\n';
  program += problem.suite.cases[case_index];
  return program;
}

}  // namespace mot
