#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mot::pysrc {

/// A logical Python line: one statement header or simple statement, possibly
/// spanning several physical lines through brackets, strings or backslashes.
struct LogicalLine {
  std::size_t indent = 0;      // columns of the first physical line
  std::size_t first = 0;       // first physical line index
  std::size_t last = 0;        // last physical line index (inclusive)
  std::string_view head;       // first physical line with indentation removed
};

struct Layout {
  std::vector<std::string_view> physical;
  std::vector<bool> starts_in_string;  // physical line begins inside a literal
  std::vector<LogicalLine> lines;
};

/// Returns nullopt on an unterminated string or unbalanced bracket.
std::optional<Layout> scan(std::string_view source);

/// First identifier-ish word of a statement ("assert", "for", "x", ...).
std::string_view first_word(std::string_view head);

bool is_compound_keyword(std::string_view word);

}  // namespace mot::pysrc
