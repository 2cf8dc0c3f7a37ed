#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mot/error.hpp"

namespace mot {

inline constexpr int kDefaultCaseTimeoutMs = 10'000;

struct ExecRequest {
  std::string id;
  std::string source;
  std::string setup;
  std::vector<std::string> cases;
  int timeout_ms = kDefaultCaseTimeoutMs;
};

enum class CaseStatus { Pass, Fail, Error, Timeout };

std::string_view case_status_name(CaseStatus status);
std::optional<CaseStatus> parse_case_status(std::string_view name);

struct CaseResult {
  CaseStatus status = CaseStatus::Error;
  std::string detail;  // empty on pass

  friend bool operator==(const CaseResult&, const CaseResult&) = default;
};

struct ExecReport {
  std::string id;
  std::vector<CaseResult> results;  // aligned with request cases
  int cases_passed = 0;             // c
  int cases_total = 0;              // n
  std::int64_t duration_ms = 0;

  friend bool operator==(const ExecReport&, const ExecReport&) = default;
};

/// The single definition of "solved": every case passed.
inline bool solved(const ExecReport& report) {
  return report.cases_total > 0 && report.cases_passed == report.cases_total;
}

/// Infrastructure failure, distinct from a candidate failing its cases.
class BackendUnavailable : public Error {
 public:
  using Error::Error;
};

class ExecRequestInvalid : public Error {
 public:
  using Error::Error;
};

/// Something that runs case programs. A backend that is not safe for
/// concurrent calls reports concurrent() == false and the caller serializes.
class ExecutionBackend {
 public:
  virtual ~ExecutionBackend() = default;
  virtual ExecReport run(const ExecRequest& request) = 0;
  virtual bool concurrent() const { return true; }
};

/// Runs `request` on `backend` and returns a report whose counts are derived
/// from its results. Throws BackendUnavailable (including for a backend reply
/// that does not have one result per case) and ExecRequestInvalid.
ExecReport evaluate_candidate(ExecutionBackend& backend, const ExecRequest& request);

/// Serves canned reports keyed by request id; unknown ids are unavailable.
class RecordedBackend : public ExecutionBackend {
 public:
  explicit RecordedBackend(std::map<std::string, ExecReport> fixtures);
  ExecReport run(const ExecRequest& request) override;

 private:
  std::map<std::string, ExecReport> fixtures_;
};

std::shared_ptr<ExecutionBackend> make_recorded_backend(std::map<std::string, ExecReport> fixtures);

/// Reads {"<id>": {"results": [...], "duration_ms": n}, ...}.
std::map<std::string, ExecReport> load_recorded_reports(const std::string& json_text);

// --- wire protocol ----------------------------------------------------------

/// One request line: {"id", "source", "setup", "cases", "timeout_ms"}.
std::string encode_wire_request(const ExecRequest& request);
/// One response line. Unknown fields are ignored. Throws BackendUnavailable on
/// malformed input.
ExecReport decode_wire_response(std::string_view line);
std::string encode_wire_response(const ExecReport& report);
ExecRequest decode_wire_request(std::string_view line);

/// Spawns `argv` as a worker process speaking the newline-delimited wire
/// protocol over stdin/stdout. The worker is started lazily and restarted
/// after it dies. Calls are serialized internally.
class SubprocessBackend : public ExecutionBackend {
 public:
  explicit SubprocessBackend(std::vector<std::string> argv,
                             std::chrono::milliseconds overhead = std::chrono::milliseconds(5000));
  ~SubprocessBackend() override;
  SubprocessBackend(const SubprocessBackend&) = delete;
  SubprocessBackend& operator=(const SubprocessBackend&) = delete;

  ExecReport run(const ExecRequest& request) override;
  bool concurrent() const override { return false; }

 private:
  void start();
  void stop();

  std::vector<std::string> argv_;
  std::chrono::milliseconds overhead_;
  std::mutex mutex_;
  int pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

/// Round-robins requests over several serial workers.
class WorkerPool : public ExecutionBackend {
 public:
  WorkerPool(std::vector<std::string> argv, int workers);
  ExecReport run(const ExecRequest& request) override;

 private:
  std::vector<std::unique_ptr<SubprocessBackend>> workers_;
  std::mutex pick_;
  std::size_t next_ = 0;
};

}  // namespace mot
