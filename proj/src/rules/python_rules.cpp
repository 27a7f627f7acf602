#include "vespucci/rule_engine.hpp"

#include <algorithm>
#include <map>

namespace vespucci {

namespace {

using ReadIndex = std::map<std::pair<int, std::string>, std::vector<const NameRead *>>;

ReadIndex index_reads(const CodeModel &code) {
  ReadIndex index;
  for (const auto &r : code.reads)
    index[{r.binding_scope.value, r.name}].push_back(&r);
  return index;
}

bool same_loop(const CodeModel &code, Order a, Order b) {
  return std::any_of(code.loops.begin(), code.loops.end(), [&](const LoopSpan &loop) {
    return loop.begin <= a && a <= loop.end && loop.begin <= b && b <= loop.end;
  });
}

// A read keeps a binding alive when it can run after the binding: it comes
// later, sits in a nested function, or shares a loop with the binding.
bool used_after(const CodeModel &code, const ReadIndex &index, ScopeId scope, const std::string &name,
                Order binding) {
  auto it = index.find({scope.value, name});
  if (it == index.end())
    return false;
  return std::any_of(it->second.begin(), it->second.end(), [&](const NameRead *r) {
    return r->order > binding || r->scope_id != scope || same_loop(code, r->order, binding);
  });
}

bool has_star_import(const CodeModel &code) {
  return std::any_of(code.imports.begin(), code.imports.end(), [](const ImportStmt &i) { return i.is_star; });
}

using Key = std::pair<int, std::string>;

std::string ticked(const std::string &name) { return "'" + name + "'"; }

void p1_unused_variables(const AnalysisContext &ctx, RuleSink &out) {
  const CodeModel &code = ctx.code;
  if (has_star_import(code))
    return;
  std::map<Key, std::vector<const Assignment *>> groups;
  for (const auto &a : code.assignments)
    groups[{a.scope_id.value, a.target_name}].push_back(&a);
  auto reads = index_reads(code);

  for (const auto &[key, list] : groups) {
    const std::string &name = key.second;
    if (name.front() == '_')
      continue;
    if (std::any_of(list.begin(), list.end(), [](auto *a) { return a->kind == AssignmentKind::Parameter; }))
      continue;
    const Assignment *first = nullptr;
    for (const Assignment *a : list)
      if (a->kind != AssignmentKind::ForTarget && (!first || a->order < first->order))
        first = a;
    if (!first || used_after(code, reads, first->scope_id, name, first->order))
      continue;
    out.at("P1", first->location, "Variable " + ticked(name) + " is assigned but never used.",
           "Remove the assignment or use the value.");
  }
}

void p2_variable_reassignment(const AnalysisContext &ctx, RuleSink &out) {
  std::set<Key> seen;
  std::vector<const Assignment *> plain;
  for (const auto &a : ctx.code.assignments)
    if (a.kind == AssignmentKind::Plain && a.target_name != "_")
      plain.push_back(&a);
  std::sort(plain.begin(), plain.end(), [](auto *a, auto *b) { return a->order < b->order; });
  for (const Assignment *a : plain) {
    if (seen.insert({a->scope_id.value, a->target_name}).second)
      continue;
    out.at("P2", a->location, "Variable " + ticked(a->target_name) + " is reassigned after its first assignment.",
           "Use a new, descriptive name for the new value.");
  }
}

void p3_variable_naming(const AnalysisContext &ctx, RuleSink &out) {
  const RuleConfig &cfg = ctx.config;
  std::map<Key, const Assignment *> first;
  for (const auto &a : ctx.code.assignments) {
    if (a.kind == AssignmentKind::Parameter)
      continue;
    auto &slot = first[{a.scope_id.value, a.target_name}];
    if (!slot || a.order < slot->order)
      slot = &a;
  }
  std::set<Key> parameters;
  for (const auto &a : ctx.code.assignments)
    if (a.kind == AssignmentKind::Parameter)
      parameters.insert({a.scope_id.value, a.target_name});

  for (const auto &[key, a] : first) {
    const std::string &name = key.second;
    if (parameters.count(key) || name.front() == '_' || cfg.name_allowlist.count(name))
      continue;
    if (codepoint_length(name) >= static_cast<std::size_t>(cfg.min_name_length))
      continue;
    out.at("P3", a->location,
           "Variable name " + ticked(name) + " is shorter than " + std::to_string(cfg.min_name_length) +
               " characters.",
           "Choose a descriptive name.");
  }
}

void p4_too_many_parameters(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &f : ctx.code.functions) {
    int count = 0;
    for (std::size_t i = 0; i < f.parameters.size(); ++i) {
      if (i == 0 && f.has_implicit_receiver)
        continue;
      if (!f.variadic_parameters.count(f.parameters[i]))
        ++count;
    }
    if (count <= ctx.config.max_parameters)
      continue;
    out.at("P4", f.location,
           "Function " + ticked(f.qualified_name) + " has " + std::to_string(count) + " parameters (limit " +
               std::to_string(ctx.config.max_parameters) + ").",
           "Group related parameters into an object or split the function.");
  }
}

void p5_consider_from_import(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &imp : ctx.code.imports) {
    if (!imp.is_dotted_module_import)
      continue;
    auto dot = imp.module_path.rfind('.');
    std::string parent = imp.module_path.substr(0, dot);
    std::string leaf = imp.module_path.substr(dot + 1);
    out.at("P5", imp.location, "Module " + ticked(imp.module_path) + " is imported by its full dotted path.",
           "Use 'from " + parent + " import " + leaf + "'.");
  }
}

void p6_unused_import(const AnalysisContext &ctx, RuleSink &out) {
  const CodeModel &code = ctx.code;
  if (has_star_import(code))
    return;
  auto reads = index_reads(code);
  for (const auto &imp : code.imports) {
    if (imp.in_class_body || imp.module_path == "__future__")
      continue;
    std::string name = imp.bound_name();
    if (used_after(code, reads, imp.scope_id, name, imp.order))
      continue;
    out.at("P6", imp.location, "Imported name " + ticked(name) + " is never used.", "Remove the unused import.");
  }
}

void p7_reimported(const AnalysisContext &ctx, RuleSink &out) {
  std::set<std::pair<std::string, std::string>> seen;
  std::vector<const ImportStmt *> imports;
  for (const auto &imp : ctx.code.imports)
    imports.push_back(&imp);
  std::sort(imports.begin(), imports.end(), [](auto *a, auto *b) { return a->order < b->order; });
  for (const ImportStmt *imp : imports) {
    std::string symbol = imp->is_star ? "*" : imp->imported_symbol.value_or("");
    if (seen.insert({imp->module_path, symbol}).second)
      continue;
    std::string what = symbol.empty() ? imp->module_path : imp->module_path + "." + symbol;
    out.at("P7", imp->location, ticked(what) + " is imported again.", "Remove the redundant import.");
  }
}

void p8_too_many_locals(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &f : ctx.code.functions) {
    std::size_t count = 0;
    for (const auto &name : f.local_assigned_names)
      if (!f.global_declarations.count(name) &&
          std::find(f.parameters.begin(), f.parameters.end(), name) == f.parameters.end())
        ++count;
    if (count <= static_cast<std::size_t>(ctx.config.max_locals))
      continue;
    out.at("P8", f.location,
           "Function " + ticked(f.qualified_name) + " has " + std::to_string(count) + " local variables (limit " +
               std::to_string(ctx.config.max_locals) + ").",
           "Split the function into smaller steps.");
  }
}

void p9_global_in_function(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &decl : ctx.code.global_decls) {
    const FunctionDef *f = ctx.code.function_for(decl.scope_id);
    std::string names;
    for (const auto &n : decl.names)
      names += (names.empty() ? "" : ", ") + n;
    std::string where = f ? "Function " + ticked(f->qualified_name) : std::string("A function");
    out.at("P9", decl.location, where + " declares global " + names + ".",
           "Pass values in as parameters and return results instead.");
  }
}

std::function<std::string(const RuleConfig &)> threshold(const char *key, int RuleConfig::*field) {
  return [key, field](const RuleConfig &c) { return std::string(key) + "=" + std::to_string(c.*field); };
}

} // namespace

void register_python_rules(RuleRegistry &r) {
  auto add = [&](const char *id, const char *description, RuleEvaluator eval,
                 std::function<std::string(const RuleConfig &)> thresholds = {}) {
    RuleInfo info;
    info.id = id;
    info.level = RuleLevel::Python;
    info.description = description;
    info.thresholds = std::move(thresholds);
    r.register_rule(std::move(info), std::move(eval));
  };
  add("P1", "Unused variable: assigned but never read afterwards", p1_unused_variables);
  add("P2", "Variable reassignment: the same name is assigned again", p2_variable_reassignment);
  add("P3", "Variable naming: name shorter than the minimum length", p3_variable_naming,
      [](const RuleConfig &c) {
        std::string allow;
        for (const auto &n : c.name_allowlist)
          allow += (allow.empty() ? "" : ",") + n;
        return "min_name_length=" + std::to_string(c.min_name_length) + " name_allowlist=" + allow;
      });
  add("P4", "Too many parameters in a function", p4_too_many_parameters,
      threshold("max_parameters", &RuleConfig::max_parameters));
  add("P5", "Dotted module import; consider a from-import", p5_consider_from_import);
  add("P6", "Unused import", p6_unused_import);
  add("P7", "Module or symbol imported more than once", p7_reimported);
  add("P8", "Too many local variables in a function", p8_too_many_locals,
      threshold("max_locals", &RuleConfig::max_locals));
  add("P9", "Global statement inside a function", p9_global_in_function);
}

} // namespace vespucci
