#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "mot/llm_client.hpp"

namespace mot {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string_view store_error_kind_name(StoreErrorKind kind) {
  switch (kind) {
    case StoreErrorKind::Conflict: return "Conflict";
    case StoreErrorKind::Io: return "Io";
    case StoreErrorKind::Missing: return "Missing";
    case StoreErrorKind::Corrupt: return "Corrupt";
  }
  return "Io";
}

bool plausible_key(const std::string& key) {
  if (key.empty() || key.size() > 128) return false;
  for (char c : key) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

}  // namespace

StoreError::StoreError(StoreErrorKind kind, const std::string& detail)
    : Error("fixture store (" + std::string(store_error_kind_name(kind)) + "): " + detail),
      kind_(kind) {}

FixtureStore::FixtureStore(fs::path dir) : dir_(std::move(dir)) {}

bool FixtureStore::contains(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return plausible_key(key) && fs::exists(dir_ / key);
}

std::optional<FixtureEntry> FixtureStore::load(const std::string& key) const {
  std::lock_guard lock(mutex_);
  if (!plausible_key(key)) return std::nullopt;
  std::ifstream in(dir_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  json doc = json::parse(buffer.str(), nullptr, false);
  if (doc.is_discarded() || !doc.is_object() || !doc.contains("content") ||
      !doc["content"].is_string()) {
    throw StoreError(StoreErrorKind::Corrupt, "fixture " + key + " is not a valid entry");
  }
  FixtureEntry entry;
  entry.content = doc["content"].get<std::string>();
  entry.usage.in_tokens = doc.value("in_tokens", std::int64_t{0});
  entry.usage.out_tokens = doc.value("out_tokens", std::int64_t{0});
  return entry;
}

void FixtureStore::save(const std::string& key, const FixtureEntry& entry, bool overwrite) {
  std::lock_guard lock(mutex_);
  if (!plausible_key(key)) throw StoreError(StoreErrorKind::Io, "invalid key '" + key + "'");
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) throw StoreError(StoreErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  const auto path = dir_ / key;
  if (!overwrite && fs::exists(path)) {
    throw StoreError(StoreErrorKind::Conflict, "fixture " + key + " already recorded");
  }
  json doc = {{"content", entry.content},
              {"in_tokens", entry.usage.in_tokens},
              {"out_tokens", entry.usage.out_tokens}};
  const auto tmp = dir_ / (key + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StoreError(StoreErrorKind::Io, "cannot write " + tmp.string());
    out << doc.dump(2) << "\n";
    if (!out) throw StoreError(StoreErrorKind::Io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path, ec);
  if (ec) throw StoreError(StoreErrorKind::Io, "cannot rename into " + path.string());
}

std::vector<std::string> FixtureStore::keys() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  std::error_code ec;
  if (!fs::is_directory(dir_, ec)) return out;
  for (const auto& e : fs::directory_iterator(dir_)) {
    auto name = e.path().filename().string();
    if (e.is_regular_file() && plausible_key(name)) out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace mot
