#include <algorithm>

#include "mot/strategies.hpp"
#include "python_lines.hpp"
#include "text_util.hpp"

namespace mot {

GenerationError::GenerationError(Kind kind, const std::string& detail)
    : Error(std::string(generation_error_kind_name(kind)) + ": " + detail), kind_(kind) {}

std::string_view generation_error_kind_name(GenerationError::Kind kind) {
  switch (kind) {
    case GenerationError::Kind::EmptyCandidate: return "EmptyCandidate";
    case GenerationError::Kind::GraphUnrecoverable: return "GraphUnrecoverable";
    case GenerationError::Kind::MissingExecutor: return "MissingExecutor";
  }
  return "EmptyCandidate";
}

std::vector<FencedBlock> fenced_blocks(std::string_view response) {
  std::vector<FencedBlock> blocks;
  std::size_t pos = 0;
  constexpr auto kNone = std::string_view::npos;
  std::size_t content_start = kNone;
  std::string info;
  while (pos <= response.size()) {
    auto end = response.find('\n', pos);
    bool last_line = end == std::string_view::npos;
    if (last_line) end = response.size();
    auto line = response.substr(pos, end - pos);
    auto t = text::trim(line);
    if (t.rfind("```", 0) == 0) {
      if (content_start == kNone) {
        info = std::string(text::trim(t.substr(3)));
        content_start = last_line ? response.size() : end + 1;
      } else if (text::trim(t.substr(3)).empty()) {
        blocks.push_back({info, std::string(response.substr(content_start, pos - content_start))});
        content_start = kNone;
      }
    }
    if (last_line) break;
    pos = end + 1;
  }
  if (content_start != kNone && content_start < response.size()) {
    // Unterminated final block (truncated answer).
    blocks.push_back({info, std::string(response.substr(content_start))});
  }
  return blocks;
}

std::string extract_code(std::string_view response, const std::optional<std::string>& entry_point) {
  auto blocks = fenced_blocks(response);
  std::string selected;
  bool chosen = false;
  if (entry_point) {
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
      if (defines_name(it->content, *entry_point)) {
        selected = it->content;
        chosen = true;
        break;
      }
    }
  }
  if (!chosen && !blocks.empty()) {
    selected = blocks.back().content;
    chosen = true;
  }
  if (!chosen) selected = std::string(response);
  if (text::is_blank(selected)) {
    throw GenerationError(GenerationError::Kind::EmptyCandidate, "selected code is blank");
  }
  return selected;
}

std::vector<std::string> extract_self_tests(std::string_view response) {
  std::vector<std::string> tests;
  for (const auto& block : fenced_blocks(response)) {
    auto layout = pysrc::scan(block.content);
    if (layout) {
      for (const auto& l : layout->lines) {
        if (l.indent != 0 || pysrc::first_word(l.head) != "assert") continue;
        std::string stmt;
        for (std::size_t i = l.first; i <= l.last; ++i) {
          stmt += layout->physical[i];
          stmt += '\n';
        }
        tests.push_back(std::move(stmt));
      }
    } else {
      for (auto line : text::split_lines(block.content)) {
        if (line.rfind("assert ", 0) == 0) tests.push_back(std::string(line) + "\n");
      }
    }
  }
  return tests;
}

}  // namespace mot
