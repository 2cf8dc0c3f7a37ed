#include "mot/benchmark.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "text_util.hpp"

namespace mot {

using json = nlohmann::json;

std::string_view dataset_name(DatasetId id) {
  switch (id) {
    case DatasetId::HumanEval: return "humaneval";
    case DatasetId::HumanEvalPlus: return "humaneval_plus";
    case DatasetId::HumanEvalEt: return "humaneval_et";
    case DatasetId::Mbpp: return "mbpp";
    case DatasetId::MbppPlus: return "mbpp_plus";
    case DatasetId::MbppEt: return "mbpp_et";
  }
  return "humaneval";
}

std::optional<DatasetId> parse_dataset(std::string_view name) {
  for (auto id : {DatasetId::HumanEval, DatasetId::HumanEvalPlus, DatasetId::HumanEvalEt,
                  DatasetId::Mbpp, DatasetId::MbppPlus, DatasetId::MbppEt}) {
    if (dataset_name(id) == name) return id;
  }
  return std::nullopt;
}

DatasetFamily dataset_family(DatasetId id) {
  switch (id) {
    case DatasetId::HumanEval:
    case DatasetId::HumanEvalPlus:
    case DatasetId::HumanEvalEt: return DatasetFamily::HumanEval;
    default: return DatasetFamily::Mbpp;
  }
}

bool apr_supported(DatasetId id) { return id != DatasetId::MbppPlus; }

DatasetError::DatasetError(Kind kind, const std::string& detail, std::size_t line)
    : Error(line ? "line " + std::to_string(line) + ": " + detail : detail), kind_(kind), line_(line) {}

namespace {

std::string required_text(const json& rec, const char* field, std::size_t line) {
  auto it = rec.find(field);
  if (it == rec.end() || it->is_null()) {
    throw DatasetError(DatasetError::Kind::Schema, std::string("missing field '") + field + "'", line);
  }
  if (it->is_string()) return it->get<std::string>();
  if (it->is_number_integer()) return std::to_string(it->get<long long>());
  throw DatasetError(DatasetError::Kind::Schema, std::string("field '") + field + "' must be a string",
                     line);
}

std::string optional_text(const json& rec, const char* field) {
  auto it = rec.find(field);
  if (it == rec.end() || !it->is_string()) return {};
  return it->get<std::string>();
}

Problem humaneval_problem(DatasetId id, const json& rec, std::size_t line) {
  Problem p;
  p.dataset = id;
  p.task_id = required_text(rec, "task_id", line);
  p.description = required_text(rec, "prompt", line);
  p.entry_point = required_text(rec, "entry_point", line);
  auto test = required_text(rec, "test", line);
  p.canonical_solution = optional_text(rec, "canonical_solution");
  if (!p.canonical_solution.empty()) {
    // HumanEval canonical solutions are bodies that complete the prompt.
    auto name = first_function_name(p.canonical_solution);
    if (!name || *name != *p.entry_point) p.canonical_solution = p.description + p.canonical_solution;
  }
  p.suite = split_humaneval_tests(test, *p.entry_point);
  return p;
}

Problem mbpp_problem(DatasetId id, const json& rec, std::size_t line) {
  Problem p;
  p.dataset = id;
  p.task_id = required_text(rec, "task_id", line);
  p.description = required_text(rec, "text", line);
  p.canonical_solution = required_text(rec, "code", line);
  p.entry_point = first_function_name(p.canonical_solution);
  auto tl = rec.find("test_list");
  if (tl == rec.end() || !tl->is_array()) {
    throw DatasetError(DatasetError::Kind::Schema, "missing field 'test_list'", line);
  }
  std::vector<std::string> tests;
  for (const auto& t : *tl) {
    if (!t.is_string()) {
      throw DatasetError(DatasetError::Kind::Schema, "test_list entries must be strings", line);
    }
    tests.push_back(t.get<std::string>());
  }
  if (tests.empty()) throw DatasetError(DatasetError::Kind::Schema, "test_list is empty", line);
  p.suite = split_mbpp_tests(tests, optional_text(rec, "test_setup_code"));
  return p;
}

}  // namespace

std::vector<Problem> parse_dataset_text(DatasetId id, std::string_view text) {
  std::vector<Problem> problems;
  std::set<std::string> seen;
  std::size_t line_no = 0;
  for (auto line : text::split_lines(text)) {
    ++line_no;
    if (text::is_blank(line)) continue;
    json rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      throw DatasetError(DatasetError::Kind::Schema, "record is not a JSON object", line_no);
    }
    Problem p = dataset_family(id) == DatasetFamily::HumanEval ? humaneval_problem(id, rec, line_no)
                                                               : mbpp_problem(id, rec, line_no);
    if (!seen.insert(p.task_id).second) {
      throw DatasetError(DatasetError::Kind::Schema, "duplicate task_id '" + p.task_id + "'", line_no);
    }
    problems.push_back(std::move(p));
  }
  return problems;
}

std::vector<Problem> load_dataset(DatasetId id, const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(DatasetError::Kind::Io, "cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_dataset_text(id, buffer.str());
}

std::vector<Problem> select_problems(const std::vector<Problem>& problems,
                                     const std::vector<std::string>& task_ids) {
  std::set<std::string> wanted(task_ids.begin(), task_ids.end());
  std::vector<Problem> out;
  std::copy_if(problems.begin(), problems.end(), std::back_inserter(out),
               [&](const Problem& p) { return wanted.count(p.task_id) > 0; });
  return out;
}

}  // namespace mot
