#include <gtest/gtest.h>

#include <numeric>
#include <random>

#include "mot/metrics.hpp"
#include "mot/strategies.hpp"

namespace mot {
namespace {

std::vector<ProblemOutcome> solved_count(int correct, int total) {
  std::vector<ProblemOutcome> out;
  for (int i = 0; i < total; ++i) out.push_back({"p" + std::to_string(i), 1, i < correct ? 1 : 0, 4, i < correct ? 4 : 1});
  return out;
}

// Exact rational mean via integer arithmetic over the common denominator.
double oracle_ratio_mean(const std::vector<std::pair<long long, long long>>& fractions) {
  long long lcm = 1;
  for (auto [_, d] : fractions) lcm = std::lcm(lcm, d);
  long long num = 0;
  for (auto [n, d] : fractions) num += n * (lcm / d);
  return 100.0 * static_cast<double>(num) / (static_cast<double>(lcm) * static_cast<double>(fractions.size()));
}

TEST(PassAt1, DisplayRoundingAnchors) {
  EXPECT_EQ(format_percent(pass_at_1(solved_count(151, 164))), "92.1");
  EXPECT_EQ(format_percent(pass_at_1(solved_count(164, 164))), "100.0");
  EXPECT_EQ(format_percent(pass_at_1(solved_count(0, 164))), "0.0");
}

TEST(PassAt1, MultipleSamplesUseUnbiasedEstimate) {
  std::vector<ProblemOutcome> o{{"a", 4, 1, 1, 1}, {"b", 2, 2, 1, 1}};
  EXPECT_DOUBLE_EQ(pass_at_1(o), 100.0 * (0.25 + 1.0) / 2);
}

TEST(PassAt1, RejectsEmptyAndInconsistentOutcomes) {
  try {
    pass_at_1({});
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.kind(), MetricsError::Kind::EmptyRun);
  }
  EXPECT_THROW(pass_at_1({{"a", 1, 2, 1, 1}}), MetricsError);
  EXPECT_THROW(pass_at_1({{"a", 0, 0, 1, 1}}), MetricsError);
  EXPECT_THROW(avg_pass_ratio({{"a", 1, 0, 2, 3}}), MetricsError);
}

TEST(AvgPassRatio, MeanOfPerProblemRatios) {
  std::vector<ProblemOutcome> o{{"a", 1, 0, 4, 1}, {"b", 1, 1, 3, 3}};
  EXPECT_DOUBLE_EQ(avg_pass_ratio(o), 100.0 * (0.25 + 1.0) / 2);
}

TEST(AvgPassRatio, UnsupportedAndZeroCaseProblems) {
  try {
    avg_pass_ratio({{"a", 1, 1, 1, 1}}, false);
    FAIL();
  } catch (const MetricsError& e) {
    EXPECT_EQ(e.kind(), MetricsError::Kind::AprUnsupported);
  }
  EXPECT_THROW(avg_pass_ratio({{"a", 1, 0, 0, 0}}), MetricsError);
}

TEST(Metrics, AgreeWithExactOracle) {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 50; ++round) {
    int size = std::uniform_int_distribution<int>(1, 300)(rng);
    std::vector<ProblemOutcome> outcomes;
    std::vector<std::pair<long long, long long>> pass, apr;
    for (int i = 0; i < size; ++i) {
      int n = std::uniform_int_distribution<int>(1, 5)(rng);
      int c = std::uniform_int_distribution<int>(0, n)(rng);
      int cases = std::uniform_int_distribution<int>(1, 12)(rng);
      int passed = std::uniform_int_distribution<int>(0, cases)(rng);
      outcomes.push_back({std::to_string(i), n, c, cases, passed});
      pass.push_back({c, n});
      apr.push_back({passed, cases});
    }
    EXPECT_NEAR(pass_at_1(outcomes), oracle_ratio_mean(pass), 1e-9);
    EXPECT_NEAR(avg_pass_ratio(outcomes), oracle_ratio_mean(apr), 1e-9);
  }
}

TEST(Metrics, SolvedProblemsAlwaysCountFullyInBoth) {
  auto all = solved_count(10, 10);
  EXPECT_DOUBLE_EQ(pass_at_1(all), 100.0);
  EXPECT_DOUBLE_EQ(avg_pass_ratio(all), 100.0);
  // APR is never below Pass@1 when solving means passing every case.
  auto some = solved_count(3, 10);
  EXPECT_GE(avg_pass_ratio(some), pass_at_1(some));
}

TEST(RelativeDelta, ConsistentTableCells) {
  EXPECT_EQ(format_delta(relative_delta(88.4, 92.1)), "-4.02%");
  EXPECT_EQ(format_delta(relative_delta(85.4, 92.1)), "-7.27%");
  EXPECT_EQ(format_delta(relative_delta(59.9, 73.9)), "-18.94%");
  // Cost table cells.
  EXPECT_EQ(format_delta(relative_delta(0.0047, 0.0044)), "+6.82%");
  EXPECT_EQ(format_delta(relative_delta(0.0028, 0.0044)), "-36.36%");
  EXPECT_EQ(format_delta(relative_delta(0.0071, 0.0044)), "+61.36%");
  EXPECT_EQ(format_delta(relative_delta(0.0050, 0.0042)), "+19.05%");
  EXPECT_EQ(format_delta(relative_delta(504.3, 501.3)), "+0.60%");
  EXPECT_EQ(format_delta(relative_delta(340.5, 382.4)), "-10.96%");
}

TEST(RelativeDelta, FormulaNotPrintedCell) {
  // (87.8 - 92.1) / 92.1 = -4.6688...; the formula rounds to -4.67.
  EXPECT_EQ(format_delta(relative_delta(87.8, 92.1)), "-4.67%");
}

TEST(RelativeDelta, SignsAndZero) {
  EXPECT_EQ(format_delta(relative_delta(92.1, 92.1)), "+0.00%");
  EXPECT_EQ(format_delta(-0.001), "+0.00%");
  EXPECT_EQ(format_delta(0.005), "+0.01%");
  EXPECT_EQ(format_delta(-0.005), "-0.01%");
  EXPECT_THROW(relative_delta(1.0, 0.0), MetricsError);
  EXPECT_THROW(relative_delta(1.0, -2.0), MetricsError);
}

TEST(Format, DisplayForms) {
  EXPECT_EQ(format_percent(92.05), "92.1");
  EXPECT_EQ(format_percent(83.54), "83.5");
  EXPECT_EQ(format_cost(0.0044), "0.0044");
  EXPECT_EQ(format_cost(0.00440049), "0.0044");
  EXPECT_EQ(format_cost(0.012345), "0.01235");
  EXPECT_EQ(format_cost(6.0375e-05), "0.00006037");
  EXPECT_EQ(format_cost(1.5e-7), "0.00000015");
  EXPECT_EQ(format_cost(0.0), "0");
  EXPECT_EQ(format_tokens(501.25), "501.3");
  EXPECT_EQ(format_tokens(282.4), "282.4");
}

TEST(Cost, PerRecordSumThenMean) {
  Pricing p{1e-6, 4e-6};
  auto s = cost_summary(std::vector<Usage>{{100, 10}, {300, 30}}, p);
  EXPECT_DOUBLE_EQ(s.avg_in_tokens, 200.0);
  EXPECT_DOUBLE_EQ(s.avg_out_tokens, 20.0);
  EXPECT_DOUBLE_EQ(s.avg_cost_usd, (100e-6 + 40e-6 + 300e-6 + 120e-6) / 2);
  EXPECT_THROW(cost_summary(std::vector<Usage>{}, p), MetricsError);
}

TEST(Cost, RecordsSumAllCalls) {
  GenerationRecord r;
  r.calls.resize(3);
  r.calls[0].usage = {10, 1};
  r.calls[1].usage = {20, 2};
  r.calls[2].usage = {30, 3};
  auto s = cost_summary(std::vector<GenerationRecord>{r}, Pricing{1.0, 10.0});
  EXPECT_DOUBLE_EQ(s.avg_in_tokens, 60.0);
  EXPECT_DOUBLE_EQ(s.avg_cost_usd, 60.0 + 60.0);
}

TEST(Cost, LinearInPricing) {
  std::mt19937_64 rng(11);
  std::vector<Usage> usage;
  for (int i = 0; i < 200; ++i) {
    usage.push_back({std::uniform_int_distribution<std::int64_t>(0, 5000)(rng),
                     std::uniform_int_distribution<std::int64_t>(0, 2000)(rng)});
  }
  Pricing p{1.5e-7, 6e-7};
  Pricing doubled{2 * p.usd_per_input_token, 2 * p.usd_per_output_token};
  auto a = cost_summary(usage, p);
  auto b = cost_summary(usage, doubled);
  EXPECT_DOUBLE_EQ(b.avg_cost_usd, 2 * a.avg_cost_usd);
  EXPECT_EQ(a.avg_in_tokens, b.avg_in_tokens);
  EXPECT_EQ(a.avg_out_tokens, b.avg_out_tokens);
}

}  // namespace
}  // namespace mot
