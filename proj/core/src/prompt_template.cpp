#include <algorithm>
#include <map>

#include "mot/prompt.hpp"

namespace mot {

namespace assets {
const std::map<std::string, std::string_view, std::less<>>& all();
}

std::string_view role_name(Role role) {
  switch (role) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
  }
  return "user";
}

Role parse_role(std::string_view name) {
  if (name == "system") return Role::System;
  if (name == "user") return Role::User;
  if (name == "assistant") return Role::Assistant;
  throw Error("unknown message role '" + std::string(name) + "'");
}

namespace {

// Calls on_text for literal runs and on_var for each {{name}}.
template <typename OnText, typename OnVar>
void scan_template(std::string_view tmpl, OnText on_text, OnVar on_var) {
  std::size_t pos = 0;
  while (pos < tmpl.size()) {
    auto open = tmpl.find("{{", pos);
    if (open == std::string_view::npos) {
      on_text(tmpl.substr(pos));
      return;
    }
    auto close = tmpl.find("}}", open + 2);
    if (close == std::string_view::npos) {
      throw TemplateError("unterminated placeholder at offset " + std::to_string(open));
    }
    on_text(tmpl.substr(pos, open - pos));
    auto name = tmpl.substr(open + 2, close - open - 2);
    while (!name.empty() && name.front() == ' ') name.remove_prefix(1);
    while (!name.empty() && name.back() == ' ') name.remove_suffix(1);
    if (name.empty()) throw TemplateError("empty placeholder at offset " + std::to_string(open));
    on_var(name);
    pos = close + 2;
  }
}

}  // namespace

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(tmpl.size());
  scan_template(
      tmpl, [&](std::string_view t) { out += t; },
      [&](std::string_view name) {
        auto it = vars.find(std::string(name));
        if (it == vars.end()) throw TemplateError("unbound placeholder {{" + std::string(name) + "}}");
        out += it->second;
      });
  return out;
}

std::vector<std::string> template_placeholders(std::string_view tmpl) {
  std::vector<std::string> names;
  scan_template(
      tmpl, [](std::string_view) {},
      [&](std::string_view name) {
        if (std::find(names.begin(), names.end(), name) == names.end()) names.emplace_back(name);
      });
  return names;
}

std::string_view asset(std::string_view name) {
  const auto& table = assets::all();
  auto it = table.find(name);
  if (it == table.end()) throw Error("missing embedded asset '" + std::string(name) + "'");
  return it->second;
}

}  // namespace mot
