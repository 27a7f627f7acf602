#include "vespucci/rule_engine.hpp"

#include "vespucci/errors.hpp"

#include <algorithm>
#include <tuple>

namespace vespucci {

std::string_view to_string(RuleLevel level) {
  switch (level) {
  case RuleLevel::Python:
    return "python";
  case RuleLevel::Notebook:
    return "notebook";
  case RuleLevel::ML:
    return "ml";
  }
  return "python";
}

std::optional<RuleLevel> parse_rule_level(std::string_view text) {
  if (text == "python")
    return RuleLevel::Python;
  if (text == "notebook")
    return RuleLevel::Notebook;
  if (text == "ml")
    return RuleLevel::ML;
  return std::nullopt;
}

bool violation_less(const Violation &a, const Violation &b) {
  auto key = [](const Violation &v) {
    return std::make_tuple(v.cell_index.value_or(-1), v.line.value_or(0), std::cref(v.rule_id),
                           v.column.value_or(0), std::cref(v.message), std::cref(v.suggestion));
  };
  return key(a) < key(b);
}

std::size_t codepoint_length(std::string_view text) {
  return static_cast<std::size_t>(std::count_if(text.begin(), text.end(), [](char c) {
    return (static_cast<unsigned char>(c) & 0xC0) != 0x80;
  }));
}

void RuleSink::at(std::string rule_id, const SourceLocation &where, std::string message, std::string suggestion) {
  Violation v;
  v.rule_id = std::move(rule_id);
  v.cell_index = where.cell_index;
  v.line = where.line;
  v.column = where.column;
  v.message = std::move(message);
  v.suggestion = std::move(suggestion);
  found_.push_back(std::move(v));
}

void RuleSink::at_cell(std::string rule_id, int cell_index, std::string message, std::string suggestion) {
  Violation v;
  v.rule_id = std::move(rule_id);
  v.cell_index = cell_index;
  v.message = std::move(message);
  v.suggestion = std::move(suggestion);
  found_.push_back(std::move(v));
}

void RuleSink::notebook(std::string rule_id, std::string message, std::string suggestion) {
  Violation v;
  v.rule_id = std::move(rule_id);
  v.message = std::move(message);
  v.suggestion = std::move(suggestion);
  found_.push_back(std::move(v));
}

const RuleInfo &RuleRegistry::register_rule(RuleInfo info, RuleEvaluator evaluator) {
  std::vector<std::string> ids{info.id};
  ids.insert(ids.end(), info.sub_ids.begin(), info.sub_ids.end());
  for (const auto &id : ids)
    if (id.empty() || ids_.count(id) || std::count(ids.begin(), ids.end(), id) > 1)
      throw DuplicateRuleId(id);
  ids_.insert(ids.begin(), ids.end());
  entries_.push_back({std::move(info), std::move(evaluator)});
  return entries_.back().info;
}

std::vector<RuleInfo> RuleRegistry::catalog() const {
  std::vector<RuleInfo> out;
  for (const auto &e : entries_)
    out.push_back(e.info);
  return out;
}

std::set<std::string> RuleRegistry::known_ids() const { return ids_; }

const RuleInfo *RuleRegistry::find(std::string_view id) const {
  for (const auto &e : entries_) {
    if (e.info.id == id)
      return &e.info;
    for (const auto &sub : e.info.sub_ids)
      if (sub == id)
        return &e.info;
  }
  return nullptr;
}

bool RuleRegistry::is_enabled(std::string_view id, const RuleConfig &config) const {
  if (config.disabled_rules.count(std::string(id)))
    return false;
  const RuleInfo *parent = find(id);
  return !parent || !config.disabled_rules.count(parent->id);
}

Severity RuleRegistry::severity_for(std::string_view id, const RuleConfig &config) const {
  auto it = config.severity_overrides.find(std::string(id));
  if (it != config.severity_overrides.end())
    return it->second;
  if (const RuleInfo *parent = find(id)) {
    it = config.severity_overrides.find(parent->id);
    if (it != config.severity_overrides.end())
      return it->second;
  }
  return Severity::Warning;
}

RunResult RuleRegistry::run_all(const AnalysisContext &ctx) const {
  RunResult result;
  std::vector<std::string> skipped;
  const std::string path = ctx.notebook.path.generic_string();

  for (const auto &entry : entries_) {
    const RuleInfo &info = entry.info;
    if (!is_enabled(info.id, ctx.config))
      continue;
    if (info.needs_code && !ctx.code.analyzable) {
      skipped.push_back(info.id);
      continue;
    }
    RuleSink sink;
    try {
      entry.evaluator(ctx, sink);
    } catch (const std::exception &e) {
      result.diagnostics.push_back("rule " + info.id + " failed: " + e.what());
      continue;
    }
    for (auto &v : sink.take()) {
      bool own = v.rule_id == info.id ||
                 std::find(info.sub_ids.begin(), info.sub_ids.end(), v.rule_id) != info.sub_ids.end();
      if (!own) {
        result.diagnostics.push_back("rule " + info.id + " reported unregistered id " + v.rule_id);
        continue;
      }
      if (!is_enabled(v.rule_id, ctx.config))
        continue;
      if (info.notebook_scoped) {
        v.cell_index.reset();
        v.line.reset();
        v.column.reset();
      } else if (!v.cell_index) {
        result.diagnostics.push_back("rule " + info.id + " reported a finding without a cell");
        continue;
      }
      if (v.cell_index && *v.cell_index >= 0 && *v.cell_index < static_cast<int>(ctx.notebook.cells.size()))
        v.cell_id = ctx.notebook.cells[*v.cell_index].id;
      v.level = info.level;
      v.severity = severity_for(v.rule_id, ctx.config);
      v.notebook_path = path;
      result.violations.push_back(std::move(v));
    }
  }
  if (!skipped.empty()) {
    std::string list;
    for (const auto &id : skipped)
      list += (list.empty() ? "" : ", ") + id;
    result.diagnostics.push_back("code could not be parsed; skipped rules " + list);
  }
  std::stable_sort(result.violations.begin(), result.violations.end(), violation_less);
  return result;
}

RuleRegistry builtin_registry() {
  RuleRegistry registry;
  register_python_rules(registry);
  register_notebook_rules(registry);
  register_ml_rules(registry);
  return registry;
}

} // namespace vespucci
