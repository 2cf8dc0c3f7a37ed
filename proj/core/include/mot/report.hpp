#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "mot/error.hpp"
#include "mot/run.hpp"

namespace mot {

class ReportError : public Error {
 public:
  enum class Kind { MissingSummary, MissingBaseline, Malformed };
  ReportError(Kind kind, const std::string& detail);
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

RunSummary load_summary(const std::filesystem::path& run_dir);

struct ReportOutput {
  std::string text;  // human-readable tables
  std::string csv;   // one row per (dataset, model, strategy)
};

/// Pass@1/APR table with deltas against `baseline`, followed by a cost table
/// (Cost ($), In-token, Out-Token). APR cells read "n/a" for datasets without
/// APR. Throws ReportError{MissingBaseline}.
ReportOutput render_report(const std::vector<RunSummary>& summaries, StrategyId baseline);

/// "88.4 (-4.02%)"
std::string value_with_delta(double value, double reference, int decimals = 1);

}  // namespace mot
