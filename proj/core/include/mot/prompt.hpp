#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mot/error.hpp"

namespace mot {

enum class Role { System, User, Assistant };

std::string_view role_name(Role role);
Role parse_role(std::string_view name);  // throws Error on unknown role

struct Message {
  Role role = Role::User;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

/// Ordered chat messages. Non-empty; the first message is system or user.
struct Prompt {
  std::vector<Message> messages;

  bool well_formed() const {
    return !messages.empty() && messages.front().role != Role::Assistant;
  }
  friend bool operator==(const Prompt&, const Prompt&) = default;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

/// Substitutes {{name}} placeholders. Every placeholder must be bound;
/// unknown placeholders throw TemplateError. Values are inserted verbatim.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars);

/// Placeholder names in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view tmpl);

/// Embedded text asset by file name (e.g. "graph_generation.txt").
/// Throws Error when missing.
std::string_view asset(std::string_view name);

}  // namespace mot
