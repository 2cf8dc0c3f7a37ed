#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mot/error.hpp"
#include "mot/llm_client.hpp"

namespace mot {

struct GenerationRecord;

/// One problem's result. With one sample per problem, samples_correct is 1
/// exactly when every case passed.
struct ProblemOutcome {
  std::string task_id;
  int samples_total = 1;    // n in Pass@1
  int samples_correct = 0;  // c in Pass@1
  int cases_total = 0;
  int cases_passed = 0;
};

class MetricsError : public Error {
 public:
  enum class Kind { EmptyRun, AprUnsupported, ZeroReference, InvalidOutcome };
  MetricsError(Kind kind, const std::string& detail);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

/// Mean over problems of 1 - (n - c)/n, as a percentage (full precision).
double pass_at_1(const std::vector<ProblemOutcome>& outcomes);

/// Mean over problems of cases_passed / cases_total, as a percentage.
/// `apr_supported` = false (MBPP+) raises AprUnsupported.
double avg_pass_ratio(const std::vector<ProblemOutcome>& outcomes, bool apr_supported = true);

struct CostSummary {
  double avg_cost_usd = 0.0;
  double avg_in_tokens = 0.0;
  double avg_out_tokens = 0.0;
};

/// Per record: sum over calls of in * p_in + out * p_out; then means.
CostSummary cost_summary(const std::vector<Usage>& per_record_usage, const Pricing& pricing);
CostSummary cost_summary(const std::vector<GenerationRecord>& records, const Pricing& pricing);

/// 100 * (value - reference) / reference. Throws ZeroReference when
/// reference <= 0.
double relative_delta(double value, double reference);

/// "-4.02%", "+0.00%": two decimals, sign always shown.
std::string format_delta(double percent);

/// "92.1": one decimal.
std::string format_percent(double percent);

/// Four significant figures, e.g. "0.004400" -> "0.0044".
std::string format_cost(double usd);

/// "501.3": one decimal.
std::string format_tokens(double tokens);

struct RunMetrics {
  int problems = 0;          // excluding infrastructure failures
  int solved = 0;
  int infra_failures = 0;
  double pass_at_1_pct = 0.0;
  std::optional<double> apr_pct;
  CostSummary cost;
  double avg_wall_time_ms = 0.0;
};

}  // namespace mot
