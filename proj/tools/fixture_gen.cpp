// Builds replay fixtures from a script of canned model replies.
//
//   mot_fixture_gen script.json
//
// script.json:
//   {"dataset": "humaneval", "data": "problems.jsonl", "model": "gpt-4o-mini",
//    "fixtures": "llm/", "exec_reports": "exec.json",
//    "entries": [{"task_id": "...", "strategy": "mot",
//                 "replies": [{"content": "...", "in_tokens": 1, "out_tokens": 2}],
//                 "self_tests": {"<request id>": {"results": [...]}},
//                 "exec": {"results": [{"status": "pass"}]}}]}
//
// Each entry is run through the real strategy code against the scripted
// replies; every request it makes is stored under its fixture key. Paths are
// relative to the script.

#include <nlohmann/json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "mot/benchmark.hpp"
#include "mot/executor.hpp"
#include "mot/llm_client.hpp"
#include "mot/strategies.hpp"

namespace {

using json = nlohmann::json;
using namespace mot;

// Stores every exchange; identical re-recordings are fine, diverging ones are not.
class Recorder : public ChatClient {
 public:
  Recorder(ChatClient& upstream, FixtureStore& store) : upstream_(upstream), store_(store) {}
  ChatResponse complete(const ChatRequest& request) override {
    auto response = upstream_.complete(request);
    auto key = fixture_key(request);
    FixtureEntry entry{response.content, response.usage};
    if (auto existing = store_.load(key)) {
      if (!(*existing == entry)) throw Error("conflicting replies recorded for fixture " + key);
    } else {
      store_.save(key, entry);
    }
    return response;
  }

 private:
  ChatClient& upstream_;
  FixtureStore& store_;
};

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw Error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: mot_fixture_gen script.json\n";
    return 64;
  }
  try {
    const std::filesystem::path script_path = argv[1];
    const auto base = script_path.parent_path();
    json script = json::parse(slurp(script_path));

    auto dataset = parse_dataset(script.at("dataset").get<std::string>());
    if (!dataset) throw Error("unknown dataset");
    auto problems = load_dataset(*dataset, base / script.at("data").get<std::string>());
    FixtureStore store(base / script.at("fixtures").get<std::string>());
    std::filesystem::create_directories(store.dir());

    GenerateOptions options;
    options.model = script.value("model", options.model);

    json exec_out = json::object();
    for (const auto& entry : script.at("entries")) {
      const auto task_id = entry.at("task_id").get<std::string>();
      auto strategy = parse_strategy(entry.at("strategy").get<std::string>());
      if (!strategy) throw Error("unknown strategy in entry for " + task_id);
      auto selected = select_problems(problems, {task_id});
      if (selected.empty()) throw Error("unknown task " + task_id);

      std::vector<ScriptedClient::Reply> replies;
      for (const auto& r : entry.at("replies")) {
        replies.push_back({r.at("content").get<std::string>(),
                           {r.value("in_tokens", std::int64_t{0}), r.value("out_tokens", std::int64_t{0})}});
      }
      ScriptedClient scripted(std::move(replies));
      Recorder recorder(scripted, store);

      std::map<std::string, ExecReport> self_tests;
      if (entry.contains("self_tests")) self_tests = load_recorded_reports(entry["self_tests"].dump());
      RecordedBackend backend(self_tests);
      for (const auto& [id, report] : self_tests) {
        exec_out[id] = json::parse(encode_wire_response(report));
        exec_out[id].erase("id");
      }

      std::string label = task_id + "/" + std::string(strategy_name(*strategy));
      try {
        auto record = generate(*strategy, selected.front(), recorder, &backend, options);
        std::cout << label << ": " << record.calls.size() << " calls\n";
      } catch (const GenerationError& e) {
        std::cout << label << ": generation failed (" << e.what() << ")\n";
      }
      if (scripted.remaining() != 0) {
        throw Error(label + ": " + std::to_string(scripted.remaining()) + " scripted replies unused");
      }
      if (entry.contains("exec")) {
        exec_out[task_id + "::" + std::string(strategy_name(*strategy))] = entry["exec"];
      }
    }
    if (script.contains("exec_reports")) {
      std::ofstream out(base / script["exec_reports"].get<std::string>());
      out << exec_out.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
