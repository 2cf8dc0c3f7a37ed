#include "mot/run.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

namespace mot {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string_view run_mode_name(RunMode mode) {
  switch (mode) {
    case RunMode::Live: return "live";
    case RunMode::Replay: return "replay";
    case RunMode::Record: return "record";
  }
  return "replay";
}

std::optional<RunMode> parse_run_mode(std::string_view name) {
  for (auto m : {RunMode::Live, RunMode::Replay, RunMode::Record}) {
    if (run_mode_name(m) == name) return m;
  }
  return std::nullopt;
}

void RunConfig::validate() const {
  if (data.empty()) throw ConfigError("no dataset file given");
  if (strategies.empty()) throw ConfigError("no strategies given");
  if (parallelism < 1) throw ConfigError("parallelism must be at least 1");
  if (timeout_ms < 1) throw ConfigError("timeout_ms must be positive");
  if (repeats < 1) throw ConfigError("repeats must be at least 1");
  if (exec_workers < 1) throw ConfigError("exec_workers must be at least 1");
  if (output_dir.empty()) throw ConfigError("no output directory given");
  if (mode != RunMode::Live && fixtures.empty()) {
    throw ConfigError(std::string(run_mode_name(mode)) + " mode needs a fixture directory");
  }
  if (mode == RunMode::Replay && !fs::is_directory(fixtures)) {
    throw ConfigError("fixture directory " + fixtures.string() + " does not exist");
  }
  if (resume && fresh) throw ConfigError("resume and fresh are mutually exclusive");
}

namespace {

template <typename T>
void take(const json& doc, const char* key, T& out) {
  if (auto it = doc.find(key); it != doc.end() && !it->is_null()) out = it->get<T>();
}

std::vector<std::string> string_list(const json& v) {
  if (v.is_string()) {
    std::vector<std::string> out;
    std::stringstream ss(v.get<std::string>());
    for (std::string item; std::getline(ss, item, ',');) {
      if (!item.empty()) out.push_back(item);
    }
    return out;
  }
  return v.get<std::vector<std::string>>();
}

}  // namespace

std::vector<std::string> read_task_ids(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read task id list " + path.string());
  std::vector<std::string> ids;
  for (std::string line; std::getline(in, line);) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto last = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(first, last - first + 1));
  }
  return ids;
}

RunConfig run_config_from_json(const json& doc, RunConfig c, const fs::path& list_dir) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  try {
    if (auto it = doc.find("dataset"); it != doc.end()) {
      auto id = parse_dataset(it->get<std::string>());
      if (!id) throw ConfigError("unknown dataset '" + it->get<std::string>() + "'");
      c.dataset = *id;
    }
    if (auto it = doc.find("strategies"); it != doc.end()) {
      c.strategies.clear();
      for (const auto& name : string_list(*it)) {
        auto id = parse_strategy(name);
        if (!id) throw ConfigError("unknown strategy '" + name + "'");
        c.strategies.push_back(*id);
      }
    }
    if (auto it = doc.find("mode"); it != doc.end()) {
      auto m = parse_run_mode(it->get<std::string>());
      if (!m) throw ConfigError("unknown mode '" + it->get<std::string>() + "'");
      c.mode = *m;
    }
    if (doc.contains("data")) c.data = doc["data"].get<std::string>();
    if (doc.contains("fixtures")) c.fixtures = doc["fixtures"].get<std::string>();
    if (doc.contains("output_dir")) c.output_dir = doc["output_dir"].get<std::string>();
    if (doc.contains("exemplars")) c.exemplars = fs::path(doc["exemplars"].get<std::string>());
    if (doc.contains("exec_fixtures")) c.exec_fixtures = fs::path(doc["exec_fixtures"].get<std::string>());
    if (doc.contains("problem_filter")) {
      const auto& f = doc["problem_filter"];
      if (f.is_string() && f.get<std::string>().rfind('@', 0) == 0) {
        fs::path list = f.get<std::string>().substr(1);
        c.problem_filter = read_task_ids(list.is_relative() && !list_dir.empty() ? list_dir / list : list);
      } else {
        c.problem_filter = string_list(f);
      }
    }
    if (doc.contains("worker_command")) c.worker_command = doc["worker_command"].get<std::vector<std::string>>();
    if (doc.contains("max_output_tokens")) c.max_output_tokens = doc["max_output_tokens"].get<int>();
    take(doc, "overwrite_fixtures", c.overwrite_fixtures);
    take(doc, "parallelism", c.parallelism);
    take(doc, "timeout_ms", c.timeout_ms);
    take(doc, "resume", c.resume);
    take(doc, "fresh", c.fresh);
    take(doc, "per_node_phase2", c.per_node_phase2);
    take(doc, "repeats", c.repeats);
    take(doc, "exec_workers", c.exec_workers);
    if (auto it = doc.find("provider"); it != doc.end()) {
      const auto& p = *it;
      take(p, "base_url", c.provider.base_url);
      take(p, "api_key_env", c.provider.api_key_env);
      take(p, "model", c.provider.model);
      take(p, "max_retries", c.provider.max_retries);
      if (p.contains("request_timeout_ms")) {
        c.provider.request_timeout = std::chrono::milliseconds(p["request_timeout_ms"].get<int>());
      }
      if (auto pr = p.find("pricing"); pr != p.end()) {
        take(*pr, "usd_per_input_token", c.provider.pricing.usd_per_input_token);
        take(*pr, "usd_per_output_token", c.provider.pricing.usd_per_output_token);
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ConfigError(path.string() + " is not valid JSON");
  // Relative paths in a config file are relative to the file.
  const fs::path base = path.parent_path();
  RunConfig c = run_config_from_json(doc, {}, base);
  auto anchor = [&](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  anchor(c.data);
  anchor(c.fixtures);
  anchor(c.output_dir);
  if (c.exemplars) anchor(*c.exemplars);
  if (c.exec_fixtures) anchor(*c.exec_fixtures);
  return c;
}

// --- aggregation ---------------------------------------------------------------

std::optional<ProblemOutcome> outcome_of(const RunLogEntry& e) {
  ProblemOutcome o;
  o.task_id = e.task_id;
  switch (e.status) {
    case RunLogEntry::Status::InfraFailure: return std::nullopt;
    case RunLogEntry::Status::GenerationFailed:
      o.cases_total = e.cases_total;
      return o;
    case RunLogEntry::Status::Ok:
      if (!e.exec_report) return std::nullopt;
      o.cases_total = e.exec_report->cases_total;
      o.cases_passed = e.exec_report->cases_passed;
      o.samples_correct = solved(*e.exec_report) ? 1 : 0;
      return o;
  }
  return std::nullopt;
}

namespace {

// Latest attempt per (task, strategy). A resumed run appends retries of
// infrastructure failures, so a completed entry beats a failed one
// regardless of where it sits in the log.
std::map<std::pair<std::string, StrategyId>, const RunLogEntry*> latest_entries(
    const std::vector<RunLogEntry>& entries) {
  std::map<std::pair<std::string, StrategyId>, const RunLogEntry*> latest;
  for (const auto& e : entries) {
    auto& slot = latest[{e.task_id, e.strategy}];
    const bool infra = e.status == RunLogEntry::Status::InfraFailure;
    if (!slot || !infra || slot->status == RunLogEntry::Status::InfraFailure) slot = &e;
  }
  return latest;
}

}  // namespace

RunSummary summarize_log(const std::vector<RunLogEntry>& entries, DatasetId dataset,
                         const std::vector<StrategyId>& strategies, const std::string& model,
                         const Pricing& pricing) {
  RunSummary summary;
  summary.dataset = dataset;
  summary.model = model;
  summary.pricing = pricing;
  const auto latest = latest_entries(entries);
  for (auto strategy : strategies) {
    StrategySummary st;
    st.strategy = strategy;
    std::vector<Usage> usage;
    double wall = 0.0;
    for (const auto& [key, e] : latest) {  // keyed by task_id, so already sorted
      if (key.second != strategy) continue;
      auto outcome = outcome_of(*e);
      if (!outcome) {
        ++st.metrics.infra_failures;
        continue;
      }
      st.outcomes.push_back(*outcome);
      usage.push_back(e->usage);
      wall += static_cast<double>(e->wall_time_ms);
    }
    auto& m = st.metrics;
    m.problems = static_cast<int>(st.outcomes.size());
    for (const auto& o : st.outcomes) m.solved += o.samples_correct;
    if (m.problems > 0) {
      m.pass_at_1_pct = pass_at_1(st.outcomes);
      const bool countable = std::all_of(st.outcomes.begin(), st.outcomes.end(),
                                         [](const ProblemOutcome& o) { return o.cases_total > 0; });
      if (apr_supported(dataset) && countable) m.apr_pct = avg_pass_ratio(st.outcomes);
      m.cost = cost_summary(usage, pricing);
      m.avg_wall_time_ms = wall / m.problems;
    }
    summary.strategies.push_back(std::move(st));
  }
  return summary;
}

// --- execution -------------------------------------------------------------------

std::string evaluation_request_id(const std::string& task_id, StrategyId strategy) {
  return task_id + "::" + std::string(strategy_name(strategy));
}

ExecRequest make_exec_request(const Problem& problem, StrategyId strategy, const std::string& code,
                              int timeout_ms) {
  ExecRequest r;
  r.id = evaluation_request_id(problem.task_id, strategy);
  r.source = code;
  if (problem.entry_point) r.setup = entry_point_guard(*problem.entry_point);
  r.setup += problem.suite.setup;
  r.cases = problem.suite.cases;
  r.timeout_ms = timeout_ms;
  return r;
}

std::shared_ptr<ChatClient> make_client(const RunConfig& config) {
  switch (config.mode) {
    case RunMode::Replay:
      return std::make_shared<ReplayClient>(std::make_shared<const FixtureStore>(config.fixtures));
    case RunMode::Live:
      return std::make_shared<LiveClient>(config.provider, make_default_transport());
    case RunMode::Record: {
      auto live = std::make_shared<LiveClient>(config.provider, make_default_transport());
      return std::make_shared<RecordingClient>(live, std::make_shared<FixtureStore>(config.fixtures),
                                               config.overwrite_fixtures);
    }
  }
  throw ConfigError("unknown mode");
}

std::shared_ptr<ExecutionBackend> make_backend(const RunConfig& config) {
  if (config.exec_fixtures) {
    std::ifstream in(*config.exec_fixtures);
    if (!in) throw ConfigError("cannot read recorded reports " + config.exec_fixtures->string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
      return make_recorded_backend(load_recorded_reports(ss.str()));
    } catch (const Error& e) {
      throw ConfigError(config.exec_fixtures->string() + ": " + e.what());
    }
  }
  if (!config.worker_command.empty()) {
    return std::make_shared<WorkerPool>(config.worker_command, config.exec_workers);
  }
  throw ConfigError("no execution backend: give recorded reports or a worker command");
}

namespace {

// Serializes calls into a backend that cannot take concurrent requests.
class SerializedBackend : public ExecutionBackend {
 public:
  explicit SerializedBackend(std::shared_ptr<ExecutionBackend> inner) : inner_(std::move(inner)) {}
  ExecReport run(const ExecRequest& request) override {
    std::lock_guard lock(mutex_);
    return inner_->run(request);
  }

 private:
  std::shared_ptr<ExecutionBackend> inner_;
  std::mutex mutex_;
};

std::string timestamp_now() {
  auto now = std::chrono::system_clock::now();
  auto secs = std::chrono::system_clock::to_time_t(now);
  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03dZ", buf, static_cast<int>(ms));
  return out;
}

// The only thing that touches the log file. Workers hand over finished
// entries; a dedicated thread appends and flushes them in arrival order.
class LogWriter {
 public:
  explicit LogWriter(const fs::path& path) : out_(path, std::ios::app) {
    if (!out_) throw Error("cannot open run log " + path.string());
    thread_ = std::thread([this] { loop(); });
  }
  ~LogWriter() { close(); }

  void submit(const RunLogEntry& entry) {
    std::string line = to_json(entry).dump() + "\n";
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(line));
    }
    cv_.notify_one();
  }

  void close() {
    {
      std::lock_guard lock(mutex_);
      if (closed_) return;
      closed_ = true;
    }
    cv_.notify_one();
    thread_.join();
  }

 private:
  void loop() {
    std::unique_lock lock(mutex_);
    for (;;) {
      cv_.wait(lock, [this] { return closed_ || !queue_.empty(); });
      while (!queue_.empty()) {
        std::string line = std::move(queue_.front());
        queue_.pop_front();
        lock.unlock();
        out_ << line;
        out_.flush();
        lock.lock();
      }
      if (closed_) return;
    }
  }

  std::ofstream out_;
  std::thread thread_;
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<std::string> queue_;
  bool closed_ = false;
};

RunLogEntry run_one(const Problem& problem, StrategyId strategy, int repeat, ChatClient& client,
                    ExecutionBackend& backend, const GenerateOptions& options, int timeout_ms) {
  RunLogEntry e;
  e.task_id = problem.task_id;
  e.strategy = strategy;
  e.repeat = repeat;
  e.cases_total = static_cast<int>(problem.suite.cases.size());
  e.started_at = timestamp_now();
  const auto started = std::chrono::steady_clock::now();
  try {
    generate_into(e.record, strategy, problem, client, &backend, options);
    e.exec_report = evaluate_candidate(
        backend, make_exec_request(problem, strategy, e.record.extracted_code, timeout_ms));
    e.status = RunLogEntry::Status::Ok;
  } catch (const GenerationError& err) {
    // A missing executor is a harness problem, not a wrong answer.
    e.status = err.kind() == GenerationError::Kind::MissingExecutor
                   ? RunLogEntry::Status::InfraFailure
                   : RunLogEntry::Status::GenerationFailed;
    e.error = std::string(generation_error_kind_name(err.kind())) + ": " + err.what();
  } catch (const ProviderError& err) {
    e.status = RunLogEntry::Status::InfraFailure;
    e.error = std::string("provider ") + std::string(provider_error_kind_name(err.kind())) + ": " + err.what();
  } catch (const BackendUnavailable& err) {
    e.status = RunLogEntry::Status::InfraFailure;
    e.error = std::string("backend unavailable: ") + err.what();
  } catch (const std::exception& err) {
    e.status = RunLogEntry::Status::InfraFailure;
    e.error = err.what();
  }
  e.usage = e.record.total_usage();
  e.finished_at = timestamp_now();
  e.wall_time_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                       std::chrono::steady_clock::now() - started)
                       .count();
  return e;
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

}  // namespace

RunResult run_benchmark(const RunConfig& config, RunServices services) {
  config.validate();

  auto problems = load_dataset(config.dataset, config.data);
  if (config.problem_filter) {
    for (const auto& id : *config.problem_filter) {
      if (std::none_of(problems.begin(), problems.end(), [&](const Problem& p) { return p.task_id == id; })) {
        throw ConfigError("problem '" + id + "' is not in " + config.data.string());
      }
    }
    problems = select_problems(problems, *config.problem_filter);
  }

  if (!services.client) {
    if (config.mode != RunMode::Replay && !std::getenv(config.provider.api_key_env.c_str())) {
      throw ConfigError(std::string(run_mode_name(config.mode)) + " mode needs the API key in $" +
                        config.provider.api_key_env);
    }
    services.client = make_client(config);
  }
  if (!services.backend) services.backend = make_backend(config);
  std::shared_ptr<ExecutionBackend> backend = services.backend;
  if (!backend->concurrent()) backend = std::make_shared<SerializedBackend>(backend);

  GenerateOptions options;
  options.model = config.provider.model;
  options.max_output_tokens = config.max_output_tokens;
  options.per_node_phase2 = config.per_node_phase2;
  options.self_test_timeout_ms = config.timeout_ms;
  if (config.exemplars) {
    std::ifstream in(*config.exemplars);
    if (!in) throw ConfigError("cannot read exemplars " + config.exemplars->string());
    std::stringstream ss;
    ss << in.rdbuf();
    options.exemplars = parse_exemplars(ss.str());
  }

  RunResult result;
  for (int repeat = 1; repeat <= config.repeats; ++repeat) {
    fs::path dir = config.repeats == 1 ? config.output_dir
                                       : config.output_dir / ("repeat-" + std::to_string(repeat));
    fs::create_directories(dir);
    const fs::path log_path = dir / "log.jsonl";

    std::set<std::pair<std::string, StrategyId>> done;
    if (fs::exists(log_path)) {
      if (config.resume) {
        for (const auto& e : read_run_log(log_path)) {
          if (e.status != RunLogEntry::Status::InfraFailure) done.insert({e.task_id, e.strategy});
        }
      } else if (config.fresh) {
        fs::remove(log_path);
      } else {
        throw ConfigError(log_path.string() + " already exists; resume it or start fresh");
      }
    }

    struct Job {
      const Problem* problem;
      StrategyId strategy;
    };
    std::vector<Job> jobs;
    for (const auto& p : problems) {
      for (auto s : config.strategies) {
        if (!done.count({p.task_id, s})) jobs.push_back({&p, s});
      }
    }

    const std::string run_started = timestamp_now();
    {
      LogWriter writer(log_path);
      std::atomic<std::size_t> next{0};
      auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
          writer.submit(run_one(*jobs[i].problem, jobs[i].strategy, repeat, *services.client, *backend,
                                options, config.timeout_ms));
        }
      };
      const int threads = std::min<int>(config.parallelism, std::max<std::size_t>(jobs.size(), 1));
      std::vector<std::thread> pool;
      for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
      for (auto& t : pool) t.join();
      writer.close();
    }

    // The summary is recomputed from the log alone, so an offline
    // re-aggregation gives the same numbers.
    const auto entries = read_run_log(log_path);
    RunSummary summary =
        summarize_log(entries, config.dataset, config.strategies, config.provider.model, config.provider.pricing);
    write_file(dir / "summary.json", to_json(summary).dump(2) + "\n");

    json timings = {{"started_at", run_started}, {"finished_at", timestamp_now()}};
    json per_strategy = json::object();
    for (const auto& st : summary.strategies) {
      per_strategy[std::string(strategy_name(st.strategy))] = st.metrics.avg_wall_time_ms;
    }
    timings["avg_wall_time_ms"] = std::move(per_strategy);
    write_file(dir / "timings.json", timings.dump(2) + "\n");

    json failures = json::array();
    for (const auto& [key, e] : latest_entries(entries)) {
      if (e->status != RunLogEntry::Status::InfraFailure) continue;
      if (std::find(config.strategies.begin(), config.strategies.end(), key.second) == config.strategies.end()) {
        continue;
      }
      failures.push_back({{"task_id", e->task_id},
                          {"strategy", std::string(strategy_name(e->strategy))},
                          {"error", e->error}});
    }
    const fs::path failures_path = dir / "failures.json";
    if (!failures.empty()) {
      write_file(failures_path, failures.dump(2) + "\n");
    } else if (fs::exists(failures_path)) {
      fs::remove(failures_path);
    }

    result.infra_failures += static_cast<int>(failures.size());
    result.run_dirs.push_back(dir);
    result.summaries.push_back(std::move(summary));
  }
  result.exit_code = result.infra_failures > 0 ? 2 : 0;
  return result;
}

}  // namespace mot
