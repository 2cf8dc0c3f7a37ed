#include "mot/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mot/strategies.hpp"

namespace mot {

MetricsError::MetricsError(Kind kind, const std::string& detail) : Error(detail), kind_(kind) {}

namespace {

void check_outcome(const ProblemOutcome& o) {
  if (o.samples_total < 1 || o.samples_correct < 0 || o.samples_correct > o.samples_total ||
      o.cases_passed < 0 || o.cases_passed > o.cases_total) {
    throw MetricsError(MetricsError::Kind::InvalidOutcome, "inconsistent outcome for " + o.task_id);
  }
}

std::string printf_string(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

// Rounds half away from zero at `decimals` places, so 92.05 -> 92.1 even when
// the binary value sits just below the midpoint.
double round_display(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  double scaled = value * scale;
  double r = std::round(scaled);
  // Absorb representation error near .5 boundaries.
  if (std::fabs(scaled - r) > 0.5 - 1e-9 && std::fabs(scaled - r) < 0.5) {
    r = scaled > r ? r + 1 : r - 1;
  }
  return r / scale;
}

}  // namespace

double pass_at_1(const std::vector<ProblemOutcome>& outcomes) {
  if (outcomes.empty()) throw MetricsError(MetricsError::Kind::EmptyRun, "no outcomes");
  double total = 0.0;
  for (const auto& o : outcomes) {
    check_outcome(o);
    double n = o.samples_total;
    double c = o.samples_correct;
    total += 1.0 - (n - c) / n;
  }
  return 100.0 * total / static_cast<double>(outcomes.size());
}

double avg_pass_ratio(const std::vector<ProblemOutcome>& outcomes, bool apr_supported) {
  if (!apr_supported) {
    throw MetricsError(MetricsError::Kind::AprUnsupported, "AvgPassRatio is not reported for this dataset");
  }
  if (outcomes.empty()) throw MetricsError(MetricsError::Kind::EmptyRun, "no outcomes");
  double total = 0.0;
  for (const auto& o : outcomes) {
    check_outcome(o);
    if (o.cases_total < 1) {
      throw MetricsError(MetricsError::Kind::InvalidOutcome, o.task_id + " has no test cases");
    }
    total += static_cast<double>(o.cases_passed) / static_cast<double>(o.cases_total);
  }
  return 100.0 * total / static_cast<double>(outcomes.size());
}

CostSummary cost_summary(const std::vector<Usage>& per_record_usage, const Pricing& pricing) {
  if (per_record_usage.empty()) throw MetricsError(MetricsError::Kind::EmptyRun, "no records");
  CostSummary s;
  for (const auto& u : per_record_usage) {
    s.avg_cost_usd += static_cast<double>(u.in_tokens) * pricing.usd_per_input_token +
                      static_cast<double>(u.out_tokens) * pricing.usd_per_output_token;
    s.avg_in_tokens += static_cast<double>(u.in_tokens);
    s.avg_out_tokens += static_cast<double>(u.out_tokens);
  }
  const double n = static_cast<double>(per_record_usage.size());
  s.avg_cost_usd /= n;
  s.avg_in_tokens /= n;
  s.avg_out_tokens /= n;
  return s;
}

CostSummary cost_summary(const std::vector<GenerationRecord>& records, const Pricing& pricing) {
  std::vector<Usage> usage;
  usage.reserve(records.size());
  for (const auto& r : records) usage.push_back(r.total_usage());
  return cost_summary(usage, pricing);
}

double relative_delta(double value, double reference) {
  if (!(reference > 0.0)) {
    throw MetricsError(MetricsError::Kind::ZeroReference, "reference value must be positive");
  }
  return 100.0 * (value - reference) / reference;
}

std::string format_delta(double percent) {
  double r = round_display(percent, 2);
  if (r == 0.0) r = 0.0;  // no "-0.00"
  return printf_string(r < 0 ? "%.2f%%" : "+%.2f%%", r);
}

std::string format_percent(double percent) { return printf_string("%.1f", round_display(percent, 1)); }

std::string format_tokens(double tokens) { return printf_string("%.1f", round_display(tokens, 1)); }

std::string format_cost(double usd) {
  std::string s = printf_string("%.4g", usd);
  auto e = s.find('e');
  if (e == std::string::npos) return s;
  // Small values: same four significant figures, without the exponent.
  int exponent = std::stoi(s.substr(e + 1));
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", std::max(0, 3 - exponent), std::stod(s));
  std::string fixed = buf;
  if (fixed.find('.') != std::string::npos) {
    while (fixed.back() == '0') fixed.pop_back();
    if (fixed.back() == '.') fixed.pop_back();
  }
  return fixed;
}

}  // namespace mot
