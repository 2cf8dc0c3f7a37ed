#pragma once

#include <filesystem>
#include <random>
#include <string>

#include "mot/graph.hpp"

namespace mot::testing {

/// tests/fixtures in the source tree.
std::filesystem::path fixtures_dir();

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
};

/// The "largest sum" example graph: 3 high, 5 intermediate, 5 detailed nodes.
ParsedGraph largest_sum_graph();

}  // namespace mot::testing
