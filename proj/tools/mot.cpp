#include <CLI11.hpp>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "mot/report.hpp"
#include "mot/run.hpp"

namespace {

using namespace mot;

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream ss(s);
  for (std::string w; ss >> w;) out.push_back(w);
  return out;
}

// Flags shared by `run` and `graph`. Empty / unset values leave the
// config-file value alone.
struct CommonFlags {
  std::string config;
  std::string dataset;
  std::string data;
  std::string mode;
  std::string fixtures;
  std::string model;
  std::string base_url;
  std::string api_key_env;
  std::optional<double> price_in;
  std::optional<double> price_out;
  std::optional<int> max_output_tokens;
  std::optional<int> timeout_ms;
  std::string exemplars;

  void add(CLI::App* app) {
    app->add_option("--config", config, "JSON config file mirroring the run configuration");
    app->add_option("--dataset", dataset, "humaneval|humaneval_plus|humaneval_et|mbpp|mbpp_plus|mbpp_et");
    app->add_option("--data", data, "Line-delimited dataset file");
    app->add_option("--mode", mode, "live|replay|record");
    app->add_option("--fixtures", fixtures, "Fixture directory for replay/record");
    app->add_option("--model", model, "Model name");
    app->add_option("--base-url", base_url, "OpenAI-compatible endpoint");
    app->add_option("--api-key-env", api_key_env, "Environment variable holding the API key");
    app->add_option("--price-in", price_in, "USD per input token");
    app->add_option("--price-out", price_out, "USD per output token");
    app->add_option("--max-output-tokens", max_output_tokens, "Cap on generated tokens per call");
    app->add_option("--timeout-ms", timeout_ms, "Per-case execution timeout");
    app->add_option("--exemplars", exemplars, "Few-shot exemplar file");
  }

  RunConfig apply() const {
    RunConfig c = config.empty() ? RunConfig{} : load_run_config(config);
    if (!dataset.empty()) {
      auto id = parse_dataset(dataset);
      if (!id) throw ConfigError("unknown dataset '" + dataset + "'");
      c.dataset = *id;
    }
    if (!data.empty()) c.data = data;
    if (!mode.empty()) {
      auto m = parse_run_mode(mode);
      if (!m) throw ConfigError("unknown mode '" + mode + "'");
      c.mode = *m;
    }
    if (!fixtures.empty()) c.fixtures = fixtures;
    if (!model.empty()) c.provider.model = model;
    if (!base_url.empty()) c.provider.base_url = base_url;
    if (!api_key_env.empty()) c.provider.api_key_env = api_key_env;
    if (price_in) c.provider.pricing.usd_per_input_token = *price_in;
    if (price_out) c.provider.pricing.usd_per_output_token = *price_out;
    if (max_output_tokens) c.max_output_tokens = *max_output_tokens;
    if (timeout_ms) c.timeout_ms = *timeout_ms;
    if (!exemplars.empty()) c.exemplars = std::filesystem::path(exemplars);
    return c;
  }
};

struct RunFlags {
  std::string strategies;
  std::optional<int> parallelism;
  std::string out;
  std::string only;
  bool resume = false;
  bool fresh = false;
  bool per_node_phase2 = false;
  std::optional<int> repeats;
  std::string exec_fixtures;
  std::string worker;
  std::optional<int> exec_workers;
  bool overwrite_fixtures = false;
};

int cmd_run(const CommonFlags& common, const RunFlags& f) {
  RunConfig c = common.apply();
  if (!f.strategies.empty()) {
    c.strategies.clear();
    for (const auto& name : split_csv(f.strategies)) {
      auto id = parse_strategy(name);
      if (!id) throw ConfigError("unknown strategy '" + name + "'");
      c.strategies.push_back(*id);
    }
  }
  if (f.parallelism) c.parallelism = *f.parallelism;
  if (!f.out.empty()) c.output_dir = f.out;
  if (!f.only.empty()) {
    c.problem_filter = f.only.front() == '@' ? read_task_ids(f.only.substr(1)) : split_csv(f.only);
  }
  if (f.resume) c.resume = true;
  if (f.fresh) c.fresh = true;
  if (f.per_node_phase2) c.per_node_phase2 = true;
  if (f.repeats) c.repeats = *f.repeats;
  if (!f.exec_fixtures.empty()) c.exec_fixtures = std::filesystem::path(f.exec_fixtures);
  if (!f.worker.empty()) c.worker_command = split_words(f.worker);
  if (f.exec_workers) c.exec_workers = *f.exec_workers;
  if (f.overwrite_fixtures) c.overwrite_fixtures = true;

  RunResult result = run_benchmark(c);
  for (std::size_t i = 0; i < result.run_dirs.size(); ++i) {
    std::cout << "run directory: " << result.run_dirs[i].string() << "\n";
    for (const auto& st : result.summaries[i].strategies) {
      const auto& m = st.metrics;
      std::cout << "  " << strategy_name(st.strategy) << ": "
                << (m.problems ? format_percent(m.pass_at_1_pct) : "n/a") << " Pass@1 over " << m.problems
                << " problems";
      if (m.apr_pct) std::cout << ", APR " << format_percent(*m.apr_pct);
      if (m.infra_failures) std::cout << ", " << m.infra_failures << " infrastructure failures";
      std::cout << "\n";
    }
  }
  if (result.exit_code != 0) {
    std::cerr << result.infra_failures << " infrastructure failure(s); see failures.json\n";
  }
  return result.exit_code;
}

int cmd_report(const std::string& runs, const std::string& baseline, const std::string& format,
               const std::string& csv_path) {
  auto base = parse_strategy(baseline);
  if (!base) throw ConfigError("unknown strategy '" + baseline + "'");
  std::vector<RunSummary> summaries;
  for (const auto& dir : split_csv(runs)) summaries.push_back(load_summary(dir));
  auto out = render_report(summaries, *base);
  if (format == "csv") {
    std::cout << out.csv;
  } else {
    std::cout << out.text;
  }
  if (!csv_path.empty()) {
    std::ofstream f(csv_path);
    if (!f) throw Error("cannot write " + csv_path);
    f << out.csv;
  }
  return 0;
}

int cmd_graph(const CommonFlags& common, const std::string& task, const std::string& output) {
  RunConfig c = common.apply();
  if (c.data.empty()) throw ConfigError("no dataset file given");
  auto problems = select_problems(load_dataset(c.dataset, c.data), {task});
  if (problems.empty()) throw ConfigError("problem '" + task + "' is not in " + c.data.string());
  if (c.mode != RunMode::Live && c.fixtures.empty()) throw ConfigError("this mode needs --fixtures");
  auto client = make_client(c);

  GenerateOptions options;
  options.model = c.provider.model;
  options.max_output_tokens = c.max_output_tokens;
  GenerationRecord record;
  auto parsed = generate_graph(problems.front(), *client, options, record);
  for (std::size_t i = 0; i < record.graph_issues.size(); ++i) {
    std::cout << "attempt " << i + 1 << " rejected:\n" << record.graph_issues[i];
  }
  if (!parsed) {
    std::cerr << "no valid graph after " << record.calls.size() << " attempts\n";
    return 1;
  }
  std::cout << serialize_for_prompt(parsed->graph, parsed->task) << "\n";
  std::cout << "validation: ok\n";
  std::cout << "stats (high, intermediate, detailed, edges): " << format_stats(graph_stats(parsed->graph)) << "\n";
  if (!output.empty()) {
    std::ofstream f(output);
    if (!f) throw Error("cannot write " + output);
    f << graph_to_json(parsed->graph, parsed->task) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluate code-generation prompting strategies on HumanEval/MBPP-style benchmarks"};
  app.require_subcommand(1);

  CommonFlags run_common;
  RunFlags run_flags;
  auto* run = app.add_subcommand("run", "Generate and evaluate every (problem, strategy) pair");
  run_common.add(run);
  run->add_option("--strategy", run_flags.strategies, "Comma-separated strategies");
  run->add_option("--parallelism", run_flags.parallelism, "Concurrent tasks (default 4)");
  run->add_option("--out", run_flags.out, "Run directory");
  run->add_option("--only", run_flags.only, "Comma-separated task ids, or @FILE with one id per line");
  run->add_flag("--resume", run_flags.resume, "Skip pairs already in the run log");
  run->add_flag("--fresh", run_flags.fresh, "Discard an existing run log");
  run->add_flag("--per-node-phase2", run_flags.per_node_phase2, "Generate code one graph path at a time");
  run->add_option("--repeats", run_flags.repeats, "Independent repeats, each with its own summary");
  run->add_option("--exec-fixtures", run_flags.exec_fixtures, "Recorded execution reports (JSON)");
  run->add_option("--worker", run_flags.worker, "Sandbox worker command line");
  run->add_option("--exec-workers", run_flags.exec_workers, "Number of worker processes");
  run->add_flag("--overwrite-fixtures", run_flags.overwrite_fixtures, "Record mode may replace fixtures");

  std::string runs, baseline = "mot", format = "text", csv_path;
  auto* report = app.add_subcommand("report", "Compare strategies across run directories");
  report->add_option("--runs", runs, "Comma-separated run directories")->required();
  report->add_option("--baseline", baseline, "Strategy the deltas are relative to");
  report->add_option("--format", format, "text|csv")->check(CLI::IsMember({"text", "csv"}));
  report->add_option("--csv", csv_path, "Also write the CSV table here");

  CommonFlags graph_common;
  std::string task, output;
  auto* graph = app.add_subcommand("graph", "Run phase 1 only and print the MLR graph");
  graph_common.add(graph);
  graph->add_option("--task", task, "Task id")->required();
  graph->add_option("--output", output, "Write the graph as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(run_common, run_flags);
    if (*report) return cmd_report(runs, baseline, format, csv_path);
    if (*graph) return cmd_graph(graph_common, task, output);
  } catch (const mot::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 64;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
