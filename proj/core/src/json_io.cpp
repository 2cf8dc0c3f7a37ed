#include <nlohmann/json.hpp>

#include <fstream>

#include "mot/run.hpp"

namespace mot {

using json = nlohmann::json;

namespace {

json usage_json(const Usage& u) { return {{"in_tokens", u.in_tokens}, {"out_tokens", u.out_tokens}}; }

Usage usage_from(const json& j) {
  return {j.at("in_tokens").get<std::int64_t>(), j.at("out_tokens").get<std::int64_t>()};
}

json report_json(const ExecReport& r) { return json::parse(encode_wire_response(r)); }

ExecReport report_from(const json& j) { return decode_wire_response(j.dump()); }

json call_json(const CallRecord& c) {
  json messages = json::array();
  for (const auto& m : c.prompt.messages) {
    messages.push_back({{"role", std::string(role_name(m.role))}, {"content", m.content}});
  }
  return {{"purpose", c.purpose},
          {"messages", std::move(messages)},
          {"response", c.response},
          {"usage", usage_json(c.usage)},
          {"latency_ms", c.latency.count()}};
}

CallRecord call_from(const json& j) {
  CallRecord c;
  c.purpose = j.at("purpose").get<std::string>();
  for (const auto& m : j.at("messages")) {
    c.prompt.messages.push_back({parse_role(m.at("role").get<std::string>()),
                                 m.at("content").get<std::string>()});
  }
  c.response = j.at("response").get<std::string>();
  c.usage = usage_from(j.at("usage"));
  c.latency = std::chrono::milliseconds(j.value("latency_ms", std::int64_t{0}));
  return c;
}

StrategyId strategy_from(const json& j) {
  auto name = j.get<std::string>();
  auto id = parse_strategy(name);
  if (!id) throw Error("unknown strategy '" + name + "'");
  return *id;
}

}  // namespace

std::string_view log_status_name(RunLogEntry::Status status) {
  switch (status) {
    case RunLogEntry::Status::Ok: return "ok";
    case RunLogEntry::Status::GenerationFailed: return "generation_failed";
    case RunLogEntry::Status::InfraFailure: return "infra_failure";
  }
  return "ok";
}

json to_json(const RunLogEntry& e) {
  const auto& rec = e.record;
  json calls = json::array();
  for (const auto& c : rec.calls) calls.push_back(call_json(c));
  json self_tests = json::array();
  for (const auto& r : rec.self_test_reports) self_tests.push_back(report_json(r));
  json graph = nullptr;
  if (rec.parsed_graph) graph = json::parse(graph_to_json(rec.parsed_graph->graph, rec.parsed_graph->task, -1));
  return {{"task_id", e.task_id},
          {"strategy", std::string(strategy_name(e.strategy))},
          {"repeat", e.repeat},
          {"status", std::string(log_status_name(e.status))},
          {"calls", std::move(calls)},
          {"parsed_graph", std::move(graph)},
          {"graph_issues", rec.graph_issues},
          {"fallback_used", rec.fallback_used},
          {"extracted_code", rec.extracted_code},
          {"self_test_reports", std::move(self_tests)},
          {"exec_report", e.exec_report ? report_json(*e.exec_report) : json(nullptr)},
          {"cases_total", e.cases_total},
          {"usage", usage_json(e.usage)},
          {"error", e.error},
          {"started_at", e.started_at},
          {"finished_at", e.finished_at},
          {"wall_time_ms", e.wall_time_ms}};
}

RunLogEntry run_log_entry_from_json(const json& j) {
  RunLogEntry e;
  try {
    e.task_id = j.at("task_id").get<std::string>();
    e.strategy = strategy_from(j.at("strategy"));
    e.repeat = j.value("repeat", 1);
    auto status = j.at("status").get<std::string>();
    if (status == "ok") e.status = RunLogEntry::Status::Ok;
    else if (status == "generation_failed") e.status = RunLogEntry::Status::GenerationFailed;
    else if (status == "infra_failure") e.status = RunLogEntry::Status::InfraFailure;
    else throw Error("unknown status '" + status + "'");

    auto& rec = e.record;
    rec.task_id = e.task_id;
    rec.strategy = e.strategy;
    for (const auto& c : j.at("calls")) rec.calls.push_back(call_from(c));
    if (const auto& g = j.at("parsed_graph"); !g.is_null()) rec.parsed_graph = parse_graph_json(g.dump());
    rec.graph_issues = j.value("graph_issues", std::vector<std::string>{});
    rec.fallback_used = j.value("fallback_used", false);
    rec.extracted_code = j.value("extracted_code", std::string());
    for (const auto& r : j.value("self_test_reports", json::array())) {
      rec.self_test_reports.push_back(report_from(r));
    }
    if (const auto& r = j.at("exec_report"); !r.is_null()) e.exec_report = report_from(r);
    e.cases_total = j.value("cases_total", 0);
    e.usage = usage_from(j.at("usage"));
    e.error = j.value("error", std::string());
    e.started_at = j.value("started_at", std::string());
    e.finished_at = j.value("finished_at", std::string());
    e.wall_time_ms = j.value("wall_time_ms", std::int64_t{0});
    rec.wall_time = std::chrono::milliseconds(e.wall_time_ms);
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed run log entry: ") + ex.what());
  }
  return e;
}

std::vector<RunLogEntry> read_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read run log " + path.string());
  std::vector<RunLogEntry> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      // A crash can leave a torn final line; anything earlier is corruption.
      if (in.peek() == std::ifstream::traits_type::eof()) break;
      throw Error(path.string() + ":" + std::to_string(number) + ": not a JSON record");
    }
    out.push_back(run_log_entry_from_json(j));
  }
  return out;
}

json to_json(const RunSummary& s) {
  json strategies = json::array();
  for (const auto& st : s.strategies) {
    const auto& m = st.metrics;
    json outcomes = json::array();
    for (const auto& o : st.outcomes) {
      outcomes.push_back({{"task_id", o.task_id},
                          {"samples_total", o.samples_total},
                          {"samples_correct", o.samples_correct},
                          {"cases_total", o.cases_total},
                          {"cases_passed", o.cases_passed}});
    }
    const bool empty = m.problems == 0;
    strategies.push_back(
        {{"strategy", std::string(strategy_name(st.strategy))},
         {"problems", m.problems},
         {"solved", m.solved},
         {"infra_failures", m.infra_failures},
         {"pass_at_1", empty ? json(nullptr) : json(m.pass_at_1_pct)},
         {"pass_at_1_display", empty ? "n/a" : format_percent(m.pass_at_1_pct)},
         {"apr", m.apr_pct ? json(*m.apr_pct) : json(nullptr)},
         {"apr_display", m.apr_pct ? format_percent(*m.apr_pct) : "n/a"},
         {"avg_cost_usd", m.cost.avg_cost_usd},
         {"avg_in_tokens", m.cost.avg_in_tokens},
         {"avg_out_tokens", m.cost.avg_out_tokens},
         {"outcomes", std::move(outcomes)}});
  }
  return {{"dataset", std::string(dataset_name(s.dataset))},
          {"model", s.model},
          {"pricing",
           {{"usd_per_input_token", s.pricing.usd_per_input_token},
            {"usd_per_output_token", s.pricing.usd_per_output_token}}},
          {"strategies", std::move(strategies)}};
}

RunSummary run_summary_from_json(const json& j) {
  RunSummary s;
  try {
    auto ds = j.at("dataset").get<std::string>();
    auto id = parse_dataset(ds);
    if (!id) throw Error("unknown dataset '" + ds + "'");
    s.dataset = *id;
    s.model = j.value("model", std::string());
    if (auto p = j.find("pricing"); p != j.end()) {
      s.pricing.usd_per_input_token = p->at("usd_per_input_token").get<double>();
      s.pricing.usd_per_output_token = p->at("usd_per_output_token").get<double>();
    }
    for (const auto& st : j.at("strategies")) {
      StrategySummary out;
      out.strategy = strategy_from(st.at("strategy"));
      auto& m = out.metrics;
      m.problems = st.at("problems").get<int>();
      m.solved = st.value("solved", 0);
      m.infra_failures = st.value("infra_failures", 0);
      if (const auto& p = st.at("pass_at_1"); !p.is_null()) m.pass_at_1_pct = p.get<double>();
      if (const auto& a = st.at("apr"); !a.is_null()) m.apr_pct = a.get<double>();
      m.cost.avg_cost_usd = st.at("avg_cost_usd").get<double>();
      m.cost.avg_in_tokens = st.at("avg_in_tokens").get<double>();
      m.cost.avg_out_tokens = st.at("avg_out_tokens").get<double>();
      for (const auto& o : st.value("outcomes", json::array())) {
        out.outcomes.push_back({o.at("task_id").get<std::string>(), o.at("samples_total").get<int>(),
                                o.at("samples_correct").get<int>(), o.at("cases_total").get<int>(),
                                o.at("cases_passed").get<int>()});
      }
      s.strategies.push_back(std::move(out));
    }
  } catch (const json::exception& ex) {
    throw Error(std::string("malformed summary: ") + ex.what());
  }
  return s;
}

}  // namespace mot
