#include "vespucci/report.hpp"

#include "vespucci/errors.hpp"

#include <algorithm>
#include <stdexcept>

namespace vespucci {

using nlohmann::json;

NotebookReport make_report(std::string notebook_path, bool analyzable, std::vector<std::string> diagnostics,
                           std::vector<Violation> violations) {
  NotebookReport r;
  r.notebook_path = std::move(notebook_path);
  r.analyzable_code = analyzable;
  r.diagnostics = std::move(diagnostics);
  r.violations = std::move(violations);
  for (auto &v : r.violations)
    v.notebook_path = r.notebook_path;
  std::stable_sort(r.violations.begin(), r.violations.end(), violation_less);
  for (const auto &v : r.violations)
    ++r.summary[v.rule_id];
  return r;
}

namespace {

template <typename T> json optional_json(const std::optional<T> &value) {
  return value ? json(*value) : json(nullptr);
}

[[noreturn]] void bad(const std::string &what) { throw std::invalid_argument("invalid report: " + what); }

const json &field(const json &obj, const char *key) {
  auto it = obj.find(key);
  if (it == obj.end())
    bad(std::string("missing field '") + key + "'");
  return *it;
}

std::string string_field(const json &obj, const char *key) {
  const json &v = field(obj, key);
  if (!v.is_string())
    bad(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::optional<int> optional_int(const json &obj, const char *key) {
  const json &v = field(obj, key);
  if (v.is_null())
    return std::nullopt;
  if (!v.is_number_integer())
    bad(std::string("field '") + key + "' must be an integer or null");
  return v.get<int>();
}

std::string fixed(long long scaled, int decimals) {
  long long unit = decimals == 1 ? 10 : 100;
  std::string frac = std::to_string(scaled % unit);
  while (static_cast<int>(frac.size()) < decimals)
    frac.insert(frac.begin(), '0');
  return std::to_string(scaled / unit) + "." + frac;
}

} // namespace

json report_to_json(const NotebookReport &report) {
  json doc;
  doc["tool"] = report.tool_name;
  doc["version"] = report.tool_version;
  doc["notebook"] = report.notebook_path;
  doc["analyzable_code"] = report.analyzable_code;
  doc["diagnostics"] = report.diagnostics;
  json violations = json::array();
  for (const auto &v : report.violations) {
    json item;
    item["rule_id"] = v.rule_id;
    item["level"] = std::string(to_string(v.level));
    item["severity"] = std::string(to_string(v.severity));
    item["cell_index"] = optional_json(v.cell_index);
    item["cell_id"] = optional_json(v.cell_id);
    item["line"] = optional_json(v.line);
    item["column"] = optional_json(v.column);
    item["message"] = v.message;
    item["suggestion"] = v.suggestion;
    violations.push_back(std::move(item));
  }
  doc["violations"] = std::move(violations);
  doc["summary"] = json::object();
  for (const auto &[id, count] : report.summary)
    doc["summary"][id] = count;
  return doc;
}

NotebookReport report_from_json(const json &doc) {
  if (!doc.is_object())
    bad("top level must be an object");
  NotebookReport r;
  r.tool_name = string_field(doc, "tool");
  r.tool_version = string_field(doc, "version");
  r.notebook_path = string_field(doc, "notebook");
  const json &analyzable = field(doc, "analyzable_code");
  if (!analyzable.is_boolean())
    bad("field 'analyzable_code' must be a boolean");
  r.analyzable_code = analyzable.get<bool>();
  const json &diagnostics = field(doc, "diagnostics");
  if (!diagnostics.is_array())
    bad("field 'diagnostics' must be an array");
  for (const auto &d : diagnostics) {
    if (!d.is_string())
      bad("diagnostics must be strings");
    r.diagnostics.push_back(d.get<std::string>());
  }
  const json &violations = field(doc, "violations");
  if (!violations.is_array())
    bad("field 'violations' must be an array");
  for (const auto &item : violations) {
    if (!item.is_object())
      bad("violations must be objects");
    Violation v;
    v.rule_id = string_field(item, "rule_id");
    auto level = parse_rule_level(string_field(item, "level"));
    auto severity = parse_severity(string_field(item, "severity"));
    if (!level || !severity)
      bad("unknown level or severity for " + v.rule_id);
    v.level = *level;
    v.severity = *severity;
    v.notebook_path = r.notebook_path;
    v.cell_index = optional_int(item, "cell_index");
    const json &cell_id = field(item, "cell_id");
    if (cell_id.is_string())
      v.cell_id = cell_id.get<std::string>();
    else if (!cell_id.is_null())
      bad("field 'cell_id' must be a string or null");
    v.line = optional_int(item, "line");
    v.column = optional_int(item, "column");
    v.message = string_field(item, "message");
    v.suggestion = string_field(item, "suggestion");
    r.violations.push_back(std::move(v));
  }
  const json &summary = field(doc, "summary");
  if (!summary.is_object())
    bad("field 'summary' must be an object");
  for (const auto &v : r.violations)
    ++r.summary[v.rule_id];
  for (const auto &[id, count] : summary.items())
    if (!count.is_number_integer() || r.summary[id] != count.get<int>())
      bad("summary does not match violations for " + id);
  if (summary.size() != r.summary.size())
    bad("summary does not match violations");
  return r;
}

std::string render_text_line(const Violation &v) {
  auto opt = [](const std::optional<int> &x) { return x ? std::to_string(*x) : std::string("-"); };
  return v.notebook_path + ":" + opt(v.cell_index) + ":" + opt(v.line) + " " + v.rule_id + " " +
         std::string(to_string(v.severity)) + " " + v.message;
}

std::string render_report(const NotebookReport &report, ReportFormat format) {
  if (format == ReportFormat::Json)
    return report_to_json(report).dump(2) + "\n";
  std::string out;
  for (const auto &v : report.violations)
    out += render_text_line(v) + "\n";
  return out;
}

long long percent_tenths(long long part, long long whole) {
  if (whole <= 0)
    throw EmptyCorpus();
  return (2000 * part + whole) / (2 * whole);
}

long long ratio_hundredths(long long num, long long den) {
  if (den <= 0)
    return 0;
  return (200 * num + den) / (2 * den);
}

std::string AggregateRow::pct_text() const { return fixed(pct_tenths, 1); }
std::string AggregateRow::per_nb_text() const { return fixed(per_nb_hundredths, 2); }

std::vector<AggregateRow> aggregate(const std::vector<NotebookReport> &reports, long long corpus_size) {
  if (corpus_size <= 0)
    throw EmptyCorpus();
  if (corpus_size < static_cast<long long>(reports.size()))
    throw std::invalid_argument("corpus size " + std::to_string(corpus_size) + " is smaller than the " +
                                std::to_string(reports.size()) + " reports given");

  std::map<std::string, AggregateRow> rows;
  for (const auto &report : reports) {
    std::map<std::string, long long> here;
    for (const auto &v : report.violations) {
      auto &row = rows[v.rule_id];
      row.rule_id = v.rule_id;
      row.level = v.level;
      ++row.num_violations;
      ++here[v.rule_id];
    }
    for (const auto &[id, _] : here)
      ++rows[id].num_notebooks;
  }

  std::vector<AggregateRow> out;
  for (auto &[_, row] : rows) {
    row.pct_tenths = percent_tenths(row.num_notebooks, corpus_size);
    row.per_nb_hundredths = ratio_hundredths(row.num_violations, row.num_notebooks);
    out.push_back(row);
  }
  std::sort(out.begin(), out.end(), [](const AggregateRow &a, const AggregateRow &b) {
    if (a.num_violations != b.num_violations)
      return a.num_violations > b.num_violations;
    return a.rule_id < b.rule_id;
  });
  return out;
}

std::string aggregate_to_csv(const std::vector<AggregateRow> &rows) {
  std::string out = "rule_id,level,num_violations,num_notebooks,pct_notebooks,violations_per_affected_nb\n";
  for (const auto &r : rows)
    out += r.rule_id + "," + std::string(to_string(r.level)) + "," + std::to_string(r.num_violations) + "," +
           std::to_string(r.num_notebooks) + "," + r.pct_text() + "," + r.per_nb_text() + "\n";
  return out;
}

json aggregate_to_json(const std::vector<AggregateRow> &rows) {
  json out = json::array();
  for (const auto &r : rows) {
    json item;
    item["rule_id"] = r.rule_id;
    item["level"] = std::string(to_string(r.level));
    item["num_violations"] = r.num_violations;
    item["num_notebooks"] = r.num_notebooks;
    item["pct_notebooks"] = static_cast<double>(r.pct_tenths) / 10.0;
    item["violations_per_affected_nb"] = static_cast<double>(r.per_nb_hundredths) / 100.0;
    out.push_back(std::move(item));
  }
  return out;
}

} // namespace vespucci
