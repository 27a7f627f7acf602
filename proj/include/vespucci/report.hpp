#pragma once

#include "vespucci/rule_engine.hpp"

#include <json.hpp>

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vespucci {

inline constexpr std::string_view kToolName = "vespucci";
inline constexpr std::string_view kToolVersion = "0.3.0";

struct NotebookReport {
  std::string tool_name{kToolName};
  std::string tool_version{kToolVersion};
  std::string notebook_path;
  bool analyzable_code = true;
  std::vector<std::string> diagnostics;
  std::vector<Violation> violations;
  std::map<std::string, int> summary;

  bool operator==(const NotebookReport &) const = default;
};

/// Builds a report, sorting violations and computing the summary.
NotebookReport make_report(std::string notebook_path, bool analyzable, std::vector<std::string> diagnostics,
                           std::vector<Violation> violations);

enum class ReportFormat { Json, Text };

nlohmann::json report_to_json(const NotebookReport &report);
/// Throws std::invalid_argument when the document does not follow the report schema.
NotebookReport report_from_json(const nlohmann::json &doc);

/// JSON: the report document; text: one line per violation.
std::string render_report(const NotebookReport &report, ReportFormat format);
std::string render_text_line(const Violation &v);

struct AggregateRow {
  std::string rule_id;
  RuleLevel level = RuleLevel::Python;
  long long num_violations = 0;
  long long num_notebooks = 0;
  /// Percentage of the corpus, in tenths of a percent, rounded half-up.
  long long pct_tenths = 0;
  /// Violations per affected notebook, in hundredths, rounded half-up.
  long long per_nb_hundredths = 0;

  std::string pct_text() const;
  std::string per_nb_text() const;

  bool operator==(const AggregateRow &) const = default;
};

/// Rounded 1000 * part / whole, half-up.
long long percent_tenths(long long part, long long whole);
/// Rounded 100 * num / den, half-up; 0 when den is 0.
long long ratio_hundredths(long long num, long long den);

/// Per-rule statistics, sorted by num_violations descending then rule id.
/// Throws EmptyCorpus when corpus_size is 0, std::invalid_argument when it
/// is smaller than the number of reports.
std::vector<AggregateRow> aggregate(const std::vector<NotebookReport> &reports, long long corpus_size);

std::string aggregate_to_csv(const std::vector<AggregateRow> &rows);
nlohmann::json aggregate_to_json(const std::vector<AggregateRow> &rows);

} // namespace vespucci
