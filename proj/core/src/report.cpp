#include "mot/report.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mot {

using json = nlohmann::json;

ReportError::ReportError(Kind kind, const std::string& detail) : Error(detail), kind_(kind) {}

RunSummary load_summary(const std::filesystem::path& run_dir) {
  const auto path = run_dir / "summary.json";
  std::ifstream in(path);
  if (!in) throw ReportError(ReportError::Kind::MissingSummary, "no summary in " + run_dir.string());
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded()) throw ReportError(ReportError::Kind::Malformed, path.string() + " is not valid JSON");
  try {
    return run_summary_from_json(doc);
  } catch (const Error& e) {
    throw ReportError(ReportError::Kind::Malformed, path.string() + ": " + e.what());
  }
}

namespace {

// Deltas are taken between the printed values, as in published tables.
double shown(const std::string& display) { return std::stod(display); }

std::string delta_cell(double value, double reference) {
  if (!(reference > 0.0)) return "n/a";
  return format_delta(relative_delta(value, reference));
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

struct Group {
  DatasetId dataset;
  std::string model;
  std::vector<const StrategySummary*> rows;
};

struct Cell {
  std::string value;  // display form, or "n/a"
  std::string delta;  // "-4.02%", or "n/a"
};

Cell percent_cell(std::optional<double> value, std::optional<double> reference) {
  if (!value) return {"n/a", "n/a"};
  auto v = format_percent(*value);
  if (!reference) return {v, "n/a"};
  return {v, delta_cell(shown(v), shown(format_percent(*reference)))};
}

Cell number_cell(const std::string& v, const std::string& ref) { return {v, delta_cell(shown(v), shown(ref))}; }

std::optional<double> pass_of(const StrategySummary& s) {
  if (s.metrics.problems == 0) return std::nullopt;
  return s.metrics.pass_at_1_pct;
}

std::string joined(const Cell& c) { return c.value == "n/a" ? c.value : c.value + " (" + c.delta + ")"; }

}  // namespace

std::string value_with_delta(double value, double reference, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  char ref[64];
  std::snprintf(ref, sizeof ref, "%.*f", decimals, reference);
  return std::string(buf) + " (" + delta_cell(std::stod(buf), std::stod(ref)) + ")";
}

ReportOutput render_report(const std::vector<RunSummary>& summaries, StrategyId baseline) {
  std::vector<Group> groups;
  for (const auto& s : summaries) {
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const Group& g) { return g.dataset == s.dataset && g.model == s.model; });
    if (it == groups.end()) {
      groups.push_back({s.dataset, s.model, {}});
      it = std::prev(groups.end());
    }
    for (const auto& st : s.strategies) {
      for (const auto* existing : it->rows) {
        if (existing->strategy == st.strategy) {
          throw ReportError(ReportError::Kind::Malformed,
                            std::string(strategy_name(st.strategy)) + " appears twice for " +
                                std::string(dataset_name(s.dataset)));
        }
      }
      it->rows.push_back(&st);
    }
  }

  std::ostringstream text;
  std::ostringstream csv;
  csv << "dataset,model,strategy,pass_at_1,pass_at_1_delta,apr,apr_delta,cost_usd,cost_delta,"
         "in_tokens,in_tokens_delta,out_tokens,out_tokens_delta\n";

  bool first = true;
  for (auto& g : groups) {
    auto base_it = std::find_if(g.rows.begin(), g.rows.end(),
                                [&](const StrategySummary* s) { return s->strategy == baseline; });
    if (base_it == g.rows.end()) {
      throw ReportError(ReportError::Kind::MissingBaseline,
                        "baseline " + std::string(strategy_name(baseline)) + " has no results for " +
                            std::string(dataset_name(g.dataset)));
    }
    // Baseline goes last, the way comparison tables list the proposed method.
    std::stable_partition(g.rows.begin(), g.rows.end(),
                          [&](const StrategySummary* s) { return s->strategy != baseline; });
    const StrategySummary& base = *g.rows.back();

    if (!first) text << "\n";
    first = false;
    text << "Dataset: " << dataset_name(g.dataset) << "   Model: " << g.model << "\n";
    text << pad("Method", 24) << pad("Pass@1", 20) << "APR\n";
    for (const auto* row : g.rows) {
      auto pass = percent_cell(pass_of(*row), pass_of(base));
      Cell apr{"n/a", "n/a"};
      if (apr_supported(g.dataset)) apr = percent_cell(row->metrics.apr_pct, base.metrics.apr_pct);
      const auto& c = row->metrics.cost;
      const auto& bc = base.metrics.cost;
      auto cost = number_cell(format_cost(c.avg_cost_usd), format_cost(bc.avg_cost_usd));
      auto in = number_cell(format_tokens(c.avg_in_tokens), format_tokens(bc.avg_in_tokens));
      auto out = number_cell(format_tokens(c.avg_out_tokens), format_tokens(bc.avg_out_tokens));
      if (row->metrics.problems == 0) cost = in = out = {"n/a", "n/a"};

      text << pad(std::string(strategy_name(row->strategy)), 24) << pad(joined(pass), 20) << joined(apr)
           << "\n";
      csv << dataset_name(g.dataset) << ',' << g.model << ',' << strategy_name(row->strategy) << ','
          << pass.value << ',' << pass.delta << ',' << apr.value << ',' << apr.delta << ',' << cost.value
          << ',' << cost.delta << ',' << in.value << ',' << in.delta << ',' << out.value << ','
          << out.delta << "\n";
    }

    text << "\n" << pad("Method", 24) << pad("Cost ($)", 22) << pad("In-token", 22) << "Out-Token\n";
    for (const auto* row : g.rows) {
      const auto& c = row->metrics.cost;
      const auto& bc = base.metrics.cost;
      std::string cost = "n/a", in = "n/a", out = "n/a";
      if (row->metrics.problems > 0) {
        cost = joined(number_cell(format_cost(c.avg_cost_usd), format_cost(bc.avg_cost_usd)));
        in = joined(number_cell(format_tokens(c.avg_in_tokens), format_tokens(bc.avg_in_tokens)));
        out = joined(number_cell(format_tokens(c.avg_out_tokens), format_tokens(bc.avg_out_tokens)));
      }
      text << pad(std::string(strategy_name(row->strategy)), 24) << pad(cost, 22) << pad(in, 22) << out
           << "\n";
    }
  }
  return {text.str(), csv.str()};
}

}  // namespace mot
