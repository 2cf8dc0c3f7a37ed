#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mot/error.hpp"

namespace mot {

enum class DatasetId { HumanEval, HumanEvalPlus, HumanEvalEt, Mbpp, MbppPlus, MbppEt };

enum class DatasetFamily { HumanEval, Mbpp };

std::string_view dataset_name(DatasetId id);  // "humaneval", "mbpp_plus", ...
std::optional<DatasetId> parse_dataset(std::string_view name);
DatasetFamily dataset_family(DatasetId id);
/// MBPP+ lacks complete per-case tests, so no AvgPassRatio is reported for it.
bool apr_supported(DatasetId id);

struct TestSuite {
  std::string setup;               // guest source run before every case
  std::vector<std::string> cases;  // each self-contained given setup
  bool monolithic = false;         // splitting fell back to a single case

  friend bool operator==(const TestSuite&, const TestSuite&) = default;
};

struct Problem {
  std::string task_id;
  std::string description;
  std::optional<std::string> entry_point;
  TestSuite suite;
  DatasetId dataset = DatasetId::HumanEval;
  std::string canonical_solution;  // empty when the dataset ships none

  friend bool operator==(const Problem&, const Problem&) = default;
};

class DatasetError : public Error {
 public:
  enum class Kind { Io, Schema };
  DatasetError(Kind kind, const std::string& detail, std::size_t line = 0);
  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  Kind kind_;
  std::size_t line_;
};

/// One Problem per non-blank line of a line-delimited record file.
/// HumanEval family: task_id, prompt, entry_point, test (canonical_solution
/// optional). MBPP family: task_id, text, code, test_list (test_setup_code
/// optional). Throws DatasetError.
std::vector<Problem> load_dataset(DatasetId id, const std::filesystem::path& path);

/// Same as load_dataset but over in-memory text.
std::vector<Problem> parse_dataset_text(DatasetId id, std::string_view text);

/// Keeps problems whose task_id is listed, in dataset order.
std::vector<Problem> select_problems(const std::vector<Problem>& problems,
                                     const std::vector<std::string>& task_ids);

// --- test splitting ---------------------------------------------------------

class SplitError : public Error {
 public:
  using Error::Error;
};

/// HumanEval-style `check(candidate)` payload. Top-level asserts in the check
/// body become separate cases; preceding plain statements become setup; any
/// compound statement (loop, branch, with, try, nested def) makes the whole
/// body one monolithic case. Throws SplitError when no check function exists.
TestSuite split_check_function(std::string_view test_source, std::string_view entry_point);

/// Like split_check_function but never throws: unparseable payloads degrade to
/// one flagged monolithic case that runs the whole payload.
TestSuite split_humaneval_tests(std::string_view test_source, std::string_view entry_point);

/// MBPP-style payload: one case per test_list element.
TestSuite split_mbpp_tests(const std::vector<std::string>& test_list, std::string_view setup);

/// First top-level `def name(` in guest source.
std::optional<std::string> first_function_name(std::string_view source);

/// True when the source binds `name` at top level (def, class, assignment or
/// import alias).
bool defines_name(std::string_view source, std::string_view name);

class MissingEntryPoint : public Error {
 public:
  explicit MissingEntryPoint(const std::string& name);
};

/// Statement prepended to the setup so a missing entry point fails loudly at
/// run time as well.
std::string entry_point_guard(std::string_view entry_point);

/// candidate + setup + case, with an entry-point guard when the entry point is
/// known. Throws MissingEntryPoint when the candidate does not define it, and
/// std::out_of_range for a bad case index.
std::string assemble_case_program(const Problem& problem, std::string_view candidate,
                                  std::size_t case_index);

}  // namespace mot
