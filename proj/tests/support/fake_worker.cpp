// Speaks the executor wire protocol without running anything. Behaviour is
// chosen by markers in the request:
//   source contains "worker:crash"    -> exit without replying
//   source contains "worker:garbage"  -> reply with a non-JSON line
//   source contains "worker:wrong-id" -> reply under a different id
//   source contains "worker:short"    -> one result fewer than cases
//   source contains "worker:hang"     -> never reply
//   source contains "worker:pid"      -> every detail is the worker's pid
// Otherwise each case passes unless it contains FAIL, ERROR or TIMEOUT.
#include <unistd.h>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>

#include "mot/executor.hpp"

int main() {
  std::string line;
  while (std::getline(std::cin, line)) {
    mot::ExecRequest req;
    try {
      req = mot::decode_wire_request(line);
    } catch (const mot::Error&) {
      std::cout << "{\"id\": \"\", \"results\": []}" << std::endl;
      continue;
    }
    const auto& src = req.source;
    auto has = [&](const char* marker) { return src.find(marker) != std::string::npos; };
    if (has("worker:crash")) return 3;
    if (has("worker:hang")) std::this_thread::sleep_for(std::chrono::hours(1));
    if (has("worker:garbage")) {
      std::cout << "this is not a response" << std::endl;
      continue;
    }
    mot::ExecReport rep;
    rep.id = has("worker:wrong-id") ? req.id + "-other" : req.id;
    for (const auto& c : req.cases) {
      mot::CaseResult r{mot::CaseStatus::Pass, ""};
      if (c.find("FAIL") != std::string::npos) r = {mot::CaseStatus::Fail, "AssertionError"};
      else if (c.find("ERROR") != std::string::npos) r = {mot::CaseStatus::Error, "NameError"};
      else if (c.find("TIMEOUT") != std::string::npos) r = {mot::CaseStatus::Timeout, "timed out"};
      if (has("worker:pid")) r.detail = std::to_string(::getpid());
      rep.results.push_back(r);
    }
    if (has("worker:short") && !rep.results.empty()) rep.results.pop_back();
    rep.duration_ms = 1;
    std::cout << mot::encode_wire_response(rep) << std::endl;
  }
  return 0;
}
