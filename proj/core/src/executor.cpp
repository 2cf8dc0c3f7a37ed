#include "mot/executor.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace mot {

using json = nlohmann::json;

std::string_view case_status_name(CaseStatus status) {
  switch (status) {
    case CaseStatus::Pass: return "pass";
    case CaseStatus::Fail: return "fail";
    case CaseStatus::Error: return "error";
    case CaseStatus::Timeout: return "timeout";
  }
  return "error";
}

std::optional<CaseStatus> parse_case_status(std::string_view name) {
  for (auto s : {CaseStatus::Pass, CaseStatus::Fail, CaseStatus::Error, CaseStatus::Timeout}) {
    if (case_status_name(s) == name) return s;
  }
  return std::nullopt;
}

ExecReport evaluate_candidate(ExecutionBackend& backend, const ExecRequest& request) {
  if (request.cases.empty()) throw ExecRequestInvalid("request " + request.id + " has no cases");
  if (request.timeout_ms <= 0) throw ExecRequestInvalid("timeout_ms must be positive");
  ExecReport report = backend.run(request);
  if (report.results.size() != request.cases.size()) {
    throw BackendUnavailable("backend returned " + std::to_string(report.results.size()) +
                             " results for " + std::to_string(request.cases.size()) + " cases");
  }
  for (auto& r : report.results) {
    if (r.status == CaseStatus::Pass) r.detail.clear();
  }
  report.cases_total = static_cast<int>(report.results.size());
  report.cases_passed = static_cast<int>(std::count_if(
      report.results.begin(), report.results.end(),
      [](const CaseResult& r) { return r.status == CaseStatus::Pass; }));
  return report;
}

RecordedBackend::RecordedBackend(std::map<std::string, ExecReport> fixtures)
    : fixtures_(std::move(fixtures)) {}

ExecReport RecordedBackend::run(const ExecRequest& request) {
  auto it = fixtures_.find(request.id);
  if (it == fixtures_.end()) throw BackendUnavailable("no recorded report for '" + request.id + "'");
  return it->second;
}

std::shared_ptr<ExecutionBackend> make_recorded_backend(std::map<std::string, ExecReport> fixtures) {
  return std::make_shared<RecordedBackend>(std::move(fixtures));
}

namespace {

std::vector<CaseResult> decode_results(const json& arr) {
  if (!arr.is_array()) throw BackendUnavailable("'results' must be an array");
  std::vector<CaseResult> out;
  for (const auto& r : arr) {
    if (!r.is_object()) throw BackendUnavailable("result entries must be objects");
    auto status = parse_case_status(r.value("status", std::string()));
    if (!status) throw BackendUnavailable("unknown case status");
    out.push_back({*status, r.value("detail", std::string())});
  }
  return out;
}

json encode_results(const std::vector<CaseResult>& results) {
  json arr = json::array();
  for (const auto& r : results) {
    arr.push_back({{"status", std::string(case_status_name(r.status))}, {"detail", r.detail}});
  }
  return arr;
}

void finalize_counts(ExecReport& report) {
  report.cases_total = static_cast<int>(report.results.size());
  report.cases_passed = static_cast<int>(std::count_if(
      report.results.begin(), report.results.end(),
      [](const CaseResult& r) { return r.status == CaseStatus::Pass; }));
}

}  // namespace

std::map<std::string, ExecReport> load_recorded_reports(const std::string& json_text) {
  json doc = json::parse(json_text, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw Error("recorded reports must be a JSON object keyed by request id");
  }
  std::map<std::string, ExecReport> out;
  for (const auto& [id, value] : doc.items()) {
    if (!value.is_object() || !value.contains("results")) {
      throw Error("recorded report '" + id + "' has no results");
    }
    ExecReport r;
    r.id = id;
    r.results = decode_results(value["results"]);
    r.duration_ms = value.value("duration_ms", std::int64_t{0});
    finalize_counts(r);
    out.emplace(id, std::move(r));
  }
  return out;
}

std::string encode_wire_request(const ExecRequest& request) {
  json j = {{"id", request.id},
            {"source", request.source},
            {"setup", request.setup},
            {"cases", request.cases},
            {"timeout_ms", request.timeout_ms}};
  return j.dump();
}

ExecRequest decode_wire_request(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ExecRequestInvalid("request is not a JSON object");
  ExecRequest r;
  try {
    r.id = j.at("id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.setup = j.value("setup", std::string());
    r.cases = j.at("cases").get<std::vector<std::string>>();
    r.timeout_ms = j.value("timeout_ms", kDefaultCaseTimeoutMs);
  } catch (const json::exception& e) {
    throw ExecRequestInvalid(std::string("malformed request: ") + e.what());
  }
  return r;
}

std::string encode_wire_response(const ExecReport& report) {
  json j = {{"id", report.id},
            {"results", encode_results(report.results)},
            {"duration_ms", report.duration_ms}};
  return j.dump();
}

ExecReport decode_wire_response(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw BackendUnavailable("response is not a JSON object");
  ExecReport r;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw BackendUnavailable("response has no id");
  r.id = id->get<std::string>();
  auto results = j.find("results");
  if (results == j.end()) throw BackendUnavailable("response has no results");
  r.results = decode_results(*results);
  if (auto d = j.find("duration_ms"); d != j.end() && d->is_number()) {
    r.duration_ms = d->get<std::int64_t>();
  }
  finalize_counts(r);
  return r;
}

}  // namespace mot
