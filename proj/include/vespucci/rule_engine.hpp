#pragma once

#include "vespucci/code_model.hpp"
#include "vespucci/knowledge_base.hpp"
#include "vespucci/notebook.hpp"
#include "vespucci/program.hpp"

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vespucci {

enum class RuleLevel { Python, Notebook, ML };

std::string_view to_string(RuleLevel level);
std::optional<RuleLevel> parse_rule_level(std::string_view text);

struct Violation {
  std::string rule_id;
  RuleLevel level = RuleLevel::Python;
  Severity severity = Severity::Warning;
  std::string notebook_path;
  std::optional<int> cell_index;
  std::optional<std::string> cell_id;
  std::optional<int> line;
  std::optional<int> column;
  std::string message;
  std::string suggestion;

  bool operator==(const Violation &) const = default;
};

/// Deterministic report order: (cell or -1, line or 0, rule id, column, message).
bool violation_less(const Violation &a, const Violation &b);

struct AnalysisContext {
  const Notebook &notebook;
  const CodeModel &code;
  const LineMap &map;
  const RuleConfig &config;
  const ApiKnowledgeBase &kb;
};

/// Collects the findings of one rule.
class RuleSink {
public:
  void at(std::string rule_id, const SourceLocation &where, std::string message, std::string suggestion);
  void at_cell(std::string rule_id, int cell_index, std::string message, std::string suggestion);
  void notebook(std::string rule_id, std::string message, std::string suggestion);

  std::vector<Violation> take() { return std::move(found_); }

private:
  std::vector<Violation> found_;
};

using RuleEvaluator = std::function<void(const AnalysisContext &, RuleSink &)>;

struct RuleInfo {
  std::string id;
  RuleLevel level = RuleLevel::Python;
  std::string description;
  /// Ids this rule may report under instead of its own (e.g. N1.1).
  std::vector<std::string> sub_ids;
  /// Skipped when the code cannot be parsed.
  bool needs_code = true;
  /// Findings concern the whole notebook and carry no cell.
  bool notebook_scoped = false;
  /// Human-readable active thresholds, if any.
  std::function<std::string(const RuleConfig &)> thresholds;
};

struct RunResult {
  std::vector<Violation> violations;
  std::vector<std::string> diagnostics;
};

class RuleRegistry {
public:
  /// Throws DuplicateRuleId when the id or one of its sub-ids is taken.
  const RuleInfo &register_rule(RuleInfo info, RuleEvaluator evaluator);

  /// Parent rules in registration order.
  std::vector<RuleInfo> catalog() const;
  /// Parent ids and sub-ids.
  std::set<std::string> known_ids() const;
  const RuleInfo *find(std::string_view id) const;
  bool is_enabled(std::string_view id, const RuleConfig &config) const;
  Severity severity_for(std::string_view id, const RuleConfig &config) const;

  RunResult run_all(const AnalysisContext &ctx) const;

private:
  struct Entry {
    RuleInfo info;
    RuleEvaluator evaluator;
  };
  std::vector<Entry> entries_;
  std::set<std::string> ids_;
};

void register_python_rules(RuleRegistry &registry);
void register_notebook_rules(RuleRegistry &registry);
void register_ml_rules(RuleRegistry &registry);

/// Registry holding the 22 built-in rules.
RuleRegistry builtin_registry();

/// Number of Unicode code points in UTF-8 text.
std::size_t codepoint_length(std::string_view text);

} // namespace vespucci
