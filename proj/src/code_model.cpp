#include "vespucci/code_model.hpp"

#include "vespucci/python/parser.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace vespucci {

std::string ImportStmt::bound_name() const {
  if (is_star)
    return {};
  if (alias)
    return *alias;
  if (imported_symbol)
    return *imported_symbol;
  return module_path.substr(0, module_path.find('.'));
}

std::string ImportStmt::target_qname() const {
  if (imported_symbol) {
    if (!module_path.empty() && module_path.back() == '.')
      return module_path + *imported_symbol;
    return module_path + "." + *imported_symbol;
  }
  if (alias)
    return module_path;
  return module_path.substr(0, module_path.find('.'));
}

std::string_view to_string(AssignmentKind kind) {
  switch (kind) {
  case AssignmentKind::Plain:
    return "plain";
  case AssignmentKind::Augmented:
    return "augmented";
  case AssignmentKind::ForTarget:
    return "for";
  case AssignmentKind::WithTarget:
    return "with";
  case AssignmentKind::Parameter:
    return "parameter";
  }
  return "plain";
}

const FunctionDef *CodeModel::function_for(ScopeId scope) const {
  if (scope.value < 1 || scope.value > static_cast<int>(functions.size()))
    return nullptr;
  return &functions[scope.value - 1];
}

namespace {

using py::ExprKind;
using py::StmtKind;

struct ScopeData {
  ScopeId parent;
  std::set<std::string> params;
  std::set<std::string> bound;
  std::set<std::string> globals;
  std::set<std::string> nonlocals;
};

struct CallContext {
  bool expression_statement = false;
  bool cell_tail = false;
  std::optional<std::string> assigned_to;
};

std::string display(const py::Expr &e) {
  switch (e.kind) {
  case ExprKind::Name:
    return e.text;
  case ExprKind::Attribute:
    return display(*e.items[0]) + "." + e.text;
  case ExprKind::Call:
    return display(*e.items[0]) + "()";
  case ExprKind::Subscript:
    return display(*e.items[0]) + "[]";
  case ExprKind::String:
    return "\"\"";
  default:
    return "(...)";
  }
}

void collect_target_names(const py::Expr &e, std::set<std::string> &out) {
  switch (e.kind) {
  case ExprKind::Name:
    out.insert(e.text);
    break;
  case ExprKind::Tuple:
  case ExprKind::List:
  case ExprKind::Starred:
    for (const auto &item : e.items)
      collect_target_names(*item, out);
    break;
  default:
    break;
  }
}

class Builder {
public:
  explicit Builder(const LineMap &map) : map_(map) { scopes_.emplace_back(); }

  CodeModel run(const py::Module &module) {
    const auto &body = module.body;
    for (std::size_t i = 0; i < body.size(); ++i) {
      bool tail = i + 1 == body.size() ||
                  map_.to_cell(body[i + 1]->pos.line).cell_index != map_.to_cell(body[i]->pos.line).cell_index;
      visit_stmt(*body[i], tail);
    }
    resolve();
    return std::move(m_);
  }

private:
  SourceLocation loc(py::Pos p) const {
    CellPosition c = map_.to_cell(p.line);
    return {c.cell_index, c.local_line, p.column + 1};
  }

  Order next() { return ++order_; }

  void visit_block(const std::vector<py::StmtPtr> &body) {
    for (const auto &s : body)
      visit_stmt(*s, false);
  }

  void visit_stmt(const py::Stmt &s, bool tail) {
    switch (s.kind) {
    case StmtKind::Expr:
      if (s.value->kind == ExprKind::Call)
        visit_call(*s.value, {true, tail, std::nullopt});
      else
        visit_expr(*s.value);
      break;
    case StmtKind::Assign: {
      std::optional<std::size_t> value_call;
      if (s.value->kind == ExprKind::Call) {
        CallContext ctx;
        if (s.targets.size() == 1 && s.targets[0]->kind == ExprKind::Name)
          ctx.assigned_to = s.targets[0]->text;
        visit_call(*s.value, ctx);
        value_call = m_.calls.size() - 1;
      } else {
        visit_expr(*s.value);
      }
      for (const auto &target : s.targets)
        visit_target(*target, AssignmentKind::Plain, value_call);
      break;
    }
    case StmtKind::AugAssign: {
      const py::Expr &target = *s.targets[0];
      visit_expr(target);
      visit_expr(*s.value);
      if (target.kind == ExprKind::Name)
        add_assignment(target.text, AssignmentKind::Augmented, target.pos, std::nullopt);
      break;
    }
    case StmtKind::AnnAssign: {
      const py::Expr &target = *s.targets[0];
      visit_expr(*s.annotation);
      if (s.value) {
        std::optional<std::size_t> value_call;
        if (s.value->kind == ExprKind::Call) {
          CallContext ctx;
          if (target.kind == ExprKind::Name)
            ctx.assigned_to = target.text;
          visit_call(*s.value, ctx);
          value_call = m_.calls.size() - 1;
        } else {
          visit_expr(*s.value);
        }
        visit_target(target, AssignmentKind::Plain, value_call);
      } else if (target.kind == ExprKind::Name) {
        if (!in_class_)
          scopes_[cur_.value].bound.insert(target.text);
      } else {
        visit_expr(target);
      }
      break;
    }
    case StmtKind::FunctionDef:
      visit_function(s);
      break;
    case StmtKind::ClassDef:
      visit_class(s);
      break;
    case StmtKind::Return:
      if (s.value)
        visit_expr(*s.value);
      break;
    case StmtKind::Delete:
      for (const auto &target : s.targets)
        visit_delete(*target);
      break;
    case StmtKind::Raise:
    case StmtKind::Assert:
      for (const auto &e : s.exprs)
        visit_expr(*e);
      break;
    case StmtKind::Global:
      for (const auto &name : s.identifiers)
        scopes_[cur_.value].globals.insert(name);
      if (!cur_.is_global())
        m_.global_decls.push_back({s.identifiers, cur_, loc(s.pos)});
      break;
    case StmtKind::Nonlocal:
      for (const auto &name : s.identifiers)
        scopes_[cur_.value].nonlocals.insert(name);
      break;
    case StmtKind::Import:
    case StmtKind::ImportFrom:
      visit_import(s);
      break;
    case StmtKind::If:
      visit_expr(*s.value);
      visit_block(s.body);
      visit_block(s.orelse);
      break;
    case StmtKind::While: {
      LoopSpan span{order_ + 1, 0};
      visit_expr(*s.value);
      visit_block(s.body);
      span.end = order_;
      m_.loops.push_back(span);
      visit_block(s.orelse);
      break;
    }
    case StmtKind::For: {
      visit_expr(*s.value);
      LoopSpan span{order_ + 1, 0};
      visit_target(*s.targets[0], AssignmentKind::ForTarget, std::nullopt);
      visit_block(s.body);
      span.end = order_;
      m_.loops.push_back(span);
      visit_block(s.orelse);
      break;
    }
    case StmtKind::With:
      for (const auto &item : s.with_items) {
        visit_expr(*item.context);
        if (item.target)
          visit_target(*item.target, AssignmentKind::WithTarget, std::nullopt);
      }
      visit_block(s.body);
      break;
    case StmtKind::Try:
      visit_block(s.body);
      for (const auto &handler : s.handlers) {
        if (handler.type)
          visit_expr(*handler.type);
        if (handler.name)
          bind_only(*handler.name);
        visit_block(handler.body);
      }
      visit_block(s.orelse);
      visit_block(s.finalbody);
      break;
    case StmtKind::Match:
      visit_expr(*s.value);
      for (const auto &c : s.cases) {
        visit_expr(*c.pattern);
        if (c.guard)
          visit_expr(*c.guard);
        visit_block(c.body);
      }
      break;
    case StmtKind::Pass:
    case StmtKind::Break:
    case StmtKind::Continue:
      break;
    }
  }

  void visit_import(const py::Stmt &s) {
    std::string module = s.kind == StmtKind::ImportFrom ? std::string(s.level, '.') + s.module : std::string();
    for (const auto &name : s.names) {
      ImportStmt imp;
      if (s.kind == StmtKind::Import) {
        imp.module_path = name.name;
        imp.is_dotted_module_import = name.name.find('.') != std::string::npos;
      } else {
        imp.module_path = module;
        if (name.name == "*")
          imp.is_star = true;
        else
          imp.imported_symbol = name.name;
      }
      imp.alias = name.alias;
      imp.in_class_body = in_class_;
      imp.scope_id = cur_;
      imp.location = loc(name.pos);
      imp.order = next();
      m_.imports.push_back(imp);
      if (imp.is_star || in_class_)
        continue;
      std::string bound = imp.bound_name();
      scopes_[cur_.value].bound.insert(bound);
      m_.bindings.push_back({bound, cur_, imp.order, m_.imports.size() - 1});
    }
  }

  void visit_function(const py::Stmt &s) {
    for (const auto &d : s.decorators)
      visit_expr(*d);
    for (const auto &p : s.params) {
      if (p.annotation)
        visit_expr(*p.annotation);
      if (p.default_value)
        visit_expr(*p.default_value);
    }
    if (s.annotation)
      visit_expr(*s.annotation);
    bind_only(s.name);

    FunctionDef f;
    f.name = s.name;
    f.qualified_name = qual_prefix() + s.name;
    f.parent_scope = cur_;
    f.scope = ScopeId{static_cast<int>(m_.functions.size()) + 1};
    f.location = loc(s.pos);
    f.body_end = loc({s.end_line, 0});
    f.order = order_;
    for (const auto &p : s.params) {
      f.parameters.push_back(p.name);
      if (p.kind == py::ParamKind::VarArgs || p.kind == py::ParamKind::VarKeywords)
        f.variadic_parameters.insert(p.name);
    }
    f.has_implicit_receiver = in_class_ && !s.params.empty() && s.params[0].kind == py::ParamKind::Positional &&
                              (s.params[0].name == "self" || s.params[0].name == "cls");
    m_.functions.push_back(f);

    ScopeData data;
    data.parent = cur_;
    data.params.insert(f.parameters.begin(), f.parameters.end());
    scopes_.push_back(std::move(data));

    ScopeId saved_scope = cur_;
    bool saved_class = in_class_;
    auto saved_shadow = std::move(shadow_);
    shadow_.clear();
    cur_ = f.scope;
    in_class_ = false;
    qual_.push_back(f.qualified_name + ".<locals>.");

    for (const auto &p : s.params) {
      Assignment a;
      a.target_name = p.name;
      a.scope_id = cur_;
      a.site_scope = cur_;
      a.kind = AssignmentKind::Parameter;
      a.location = loc(p.pos);
      a.order = next();
      m_.assignments.push_back(std::move(a));
    }
    visit_block(s.body);

    qual_.pop_back();
    cur_ = saved_scope;
    in_class_ = saved_class;
    shadow_ = std::move(saved_shadow);
  }

  void visit_class(const py::Stmt &s) {
    for (const auto &d : s.decorators)
      visit_expr(*d);
    for (const auto &base : s.exprs)
      visit_expr(*base);
    for (const auto &kw : s.keywords)
      visit_expr(*kw.value);
    bind_only(s.name);

    ClassDef c;
    c.name = s.name;
    c.qualified_name = qual_prefix() + s.name;
    c.location = loc(s.pos);
    c.order = order_;
    m_.classes.push_back(c);

    bool saved_class = in_class_;
    in_class_ = true;
    qual_.push_back(c.qualified_name + ".");
    visit_block(s.body);
    qual_.pop_back();
    in_class_ = saved_class;
  }

  std::string qual_prefix() const { return qual_.empty() ? std::string() : qual_.back(); }

  void visit_target(const py::Expr &e, AssignmentKind kind, std::optional<std::size_t> value_call) {
    switch (e.kind) {
    case ExprKind::Name:
      add_assignment(e.text, kind, e.pos, value_call);
      break;
    case ExprKind::Tuple:
    case ExprKind::List:
    case ExprKind::Starred:
      for (const auto &item : e.items)
        visit_target(*item, kind, std::nullopt);
      break;
    case ExprKind::Attribute:
      visit_expr(*e.items[0]);
      break;
    case ExprKind::Subscript:
      visit_expr(*e.items[0]);
      visit_expr(*e.items[1]);
      break;
    default:
      visit_expr(e);
      break;
    }
  }

  void visit_delete(const py::Expr &e) {
    if (e.kind == ExprKind::Tuple || e.kind == ExprKind::List) {
      for (const auto &item : e.items)
        visit_delete(*item);
      return;
    }
    visit_expr(e);
    if (e.kind == ExprKind::Name && !in_class_)
      scopes_[cur_.value].bound.insert(e.text);
  }

  void add_assignment(const std::string &name, AssignmentKind kind, py::Pos pos,
                      std::optional<std::size_t> value_call) {
    if (in_class_)
      return;
    scopes_[cur_.value].bound.insert(name);
    Assignment a;
    a.target_name = name;
    a.scope_id = cur_;
    a.site_scope = cur_;
    a.kind = kind;
    a.value_call = value_call;
    a.location = loc(pos);
    a.order = next();
    m_.bindings.push_back({name, cur_, a.order, std::nullopt});
    m_.assignments.push_back(std::move(a));
  }

  void bind_only(const std::string &name) {
    if (in_class_)
      return;
    scopes_[cur_.value].bound.insert(name);
    m_.bindings.push_back({name, cur_, next(), std::nullopt});
  }

  bool shadowed(const std::string &name) const {
    return std::any_of(shadow_.begin(), shadow_.end(), [&](const auto &set) { return set.count(name) > 0; });
  }

  void read(const std::string &name, py::Pos pos) {
    if (shadowed(name))
      return;
    NameRead r;
    r.name = name;
    r.scope_id = cur_;
    r.binding_scope = cur_;
    r.location = loc(pos);
    r.order = next();
    m_.reads.push_back(std::move(r));
  }

  void visit_items(const py::Expr &e) {
    for (const auto &item : e.items)
      if (item)
        visit_expr(*item);
  }

  void visit_expr(const py::Expr &e) {
    switch (e.kind) {
    case ExprKind::Name:
      read(e.text, e.pos);
      break;
    case ExprKind::Constant:
      break;
    case ExprKind::Attribute:
      visit_expr(*e.items[0]);
      m_.attribute_reads.push_back({e.text, loc(e.pos)});
      break;
    case ExprKind::Call:
      visit_call(e, {});
      break;
    case ExprKind::NamedExpr: {
      std::optional<std::size_t> value_call;
      if (e.items[1]->kind == ExprKind::Call) {
        visit_call(*e.items[1], {});
        value_call = m_.calls.size() - 1;
      } else {
        visit_expr(*e.items[1]);
      }
      add_assignment(e.items[0]->text, AssignmentKind::Plain, e.items[0]->pos, value_call);
      break;
    }
    case ExprKind::Lambda: {
      std::set<std::string> names;
      for (const auto &p : e.params) {
        if (p.default_value)
          visit_expr(*p.default_value);
        names.insert(p.name);
      }
      shadow_.push_back(std::move(names));
      visit_expr(*e.items[0]);
      shadow_.pop_back();
      break;
    }
    case ExprKind::ListComp:
    case ExprKind::SetComp:
    case ExprKind::DictComp:
    case ExprKind::GeneratorExp:
      visit_comprehension(e);
      break;
    default:
      visit_items(e);
      for (const auto &kw : e.keywords)
        visit_expr(*kw.value);
      break;
    }
  }

  void visit_comprehension(const py::Expr &e) {
    visit_expr(*e.generators.front().iter);
    std::set<std::string> names;
    for (const auto &gen : e.generators)
      collect_target_names(*gen.target, names);
    shadow_.push_back(std::move(names));
    for (std::size_t i = 0; i < e.generators.size(); ++i) {
      const auto &gen = e.generators[i];
      if (i > 0)
        visit_expr(*gen.iter);
      for (const auto &cond : gen.conditions)
        visit_expr(*cond);
    }
    visit_items(e);
    shadow_.pop_back();
  }

  void visit_call(const py::Expr &e, const CallContext &ctx) {
    const py::Expr &callee = *e.items[0];
    visit_expr(callee);
    CallSite c;
    for (std::size_t i = 1; i < e.items.size(); ++i) {
      visit_expr(*e.items[i]);
      if (e.items[i]->kind == ExprKind::Starred)
        c.has_star_args = true;
      else
        ++c.positional_count;
    }
    for (const auto &kw : e.keywords) {
      visit_expr(*kw.value);
      if (!kw.name) {
        c.has_kwargs_unpack = true;
        continue;
      }
      c.keyword_args.insert(*kw.name);
      if (kw.value->kind == ExprKind::Constant && kw.value->text == "False")
        c.false_literal_kwargs.insert(*kw.name);
    }
    c.callee_display = display(callee);
    if (callee.kind == ExprKind::Attribute) {
      c.method_name = callee.text;
      if (callee.items[0]->kind == ExprKind::Name)
        c.receiver_name = callee.items[0]->text;
    }
    c.is_expression_statement = ctx.expression_statement;
    c.is_cell_tail = ctx.cell_tail;
    c.assigned_to = ctx.assigned_to;
    c.scope_id = cur_;
    c.location = loc(e.pos);
    c.order = next();
    m_.calls.push_back(std::move(c));
  }

  ScopeId resolve_name(const std::string &name, ScopeId s) const {
    while (!s.is_global()) {
      const ScopeData &d = scopes_[s.value];
      if (d.globals.count(name))
        return kGlobalScope;
      if (d.nonlocals.count(name)) {
        s = d.parent;
        continue;
      }
      if (d.bound.count(name) || d.params.count(name))
        return s;
      s = d.parent;
    }
    return kGlobalScope;
  }

  void resolve() {
    for (auto &a : m_.assignments)
      a.scope_id = resolve_name(a.target_name, a.site_scope);
    for (auto &r : m_.reads)
      r.binding_scope = resolve_name(r.name, r.scope_id);
    for (auto &imp : m_.imports)
      if (!imp.is_star && !imp.in_class_body)
        imp.scope_id = resolve_name(imp.bound_name(), imp.scope_id);
    for (auto &b : m_.bindings)
      b.scope_id = resolve_name(b.name, b.scope_id);
    for (auto &c : m_.calls) {
      if (c.receiver_name)
        c.receiver_binding_scope = resolve_name(*c.receiver_name, c.scope_id);
      std::size_t end = c.callee_display.find_first_of(".()[]\"");
      c.root_binding_scope = resolve_name(c.callee_display.substr(0, end), c.scope_id);
    }
    for (auto &f : m_.functions) {
      const ScopeData &d = scopes_[f.scope.value];
      f.global_declarations = d.globals;
      for (const auto &a : m_.assignments)
        if (a.scope_id == f.scope && a.kind != AssignmentKind::Parameter && !d.params.count(a.target_name))
          f.local_assigned_names.insert(a.target_name);
    }
  }

  const LineMap &map_;
  CodeModel m_;
  std::vector<ScopeData> scopes_;
  ScopeId cur_;
  bool in_class_ = false;
  Order order_ = 0;
  std::vector<std::set<std::string>> shadow_;
  std::vector<std::string> qual_;
};

} // namespace

CodeModel build_code_model(std::string_view program_text, const LineMap &map, const Notebook &) {
  py::LexOptions options;
  for (int line : map.cell_start_lines())
    options.unit_start_lines.insert(line);

  auto failed = [&](const std::string &diagnostic) {
    CodeModel bad;
    bad.analyzable = false;
    bad.map = map;
    bad.parse_diagnostics.push_back(diagnostic);
    return bad;
  };

  py::Module module;
  try {
    module = py::parse_module(program_text, options);
  } catch (const py::SyntaxError &e) {
    if (map.empty())
      return failed(std::string("syntax error: ") + e.what());
    int line = std::clamp(e.pos().line, 1, static_cast<int>(map.size()));
    CellPosition at = map.to_cell(line);
    return failed("syntax error in cell " + std::to_string(at.cell_index) + ", line " +
                  std::to_string(at.local_line) + ": " + e.what());
  }

  CodeModel model;
  try {
    model = Builder(map).run(module);
  } catch (const std::exception &e) {
    return failed(std::string("could not build code model: ") + e.what());
  }
  model.map = map;
  for (auto &call : model.calls)
    call.resolved_qname = resolve_qname(model, call);
  return model;
}

std::optional<std::string> resolve_qname(const CodeModel &model, const CallSite &call) {
  const std::string &shown = call.callee_display;
  if (shown.empty() || shown.find_first_of("()[]\"") != std::string::npos)
    return std::nullopt;
  std::size_t dot = shown.find('.');
  std::string root = shown.substr(0, dot);
  std::string rest = dot == std::string::npos ? std::string() : shown.substr(dot);

  const BindingEvent *latest = nullptr;
  for (const auto &b : model.bindings)
    if (b.order < call.order && b.name == root && b.scope_id == call.root_binding_scope &&
        (!latest || b.order > latest->order))
      latest = &b;
  if (!latest || !latest->import_index)
    return std::nullopt;
  return model.imports[*latest->import_index].target_qname() + rest;
}

CodeModel infer_types(CodeModel model, const ApiKnowledgeBase &kb) {
  struct Event {
    Order order;
    bool is_call;
    std::size_t index;
  };
  std::vector<Event> events;
  for (std::size_t i = 0; i < model.calls.size(); ++i) {
    model.calls[i].receiver_kb_type.reset();
    events.push_back({model.calls[i].order, true, i});
  }
  for (std::size_t i = 0; i < model.assignments.size(); ++i) {
    model.assignments[i].value_origin.reset();
    events.push_back({model.assignments[i].order, false, i});
  }
  std::sort(events.begin(), events.end(), [](const Event &a, const Event &b) { return a.order < b.order; });

  std::map<std::pair<int, std::string>, std::string> bound_types;
  for (const auto &ev : events) {
    if (ev.is_call) {
      CallSite &c = model.calls[ev.index];
      if (!c.receiver_name)
        continue;
      auto it = bound_types.find({c.receiver_binding_scope.value, *c.receiver_name});
      if (it != bound_types.end())
        c.receiver_kb_type = it->second;
      continue;
    }
    Assignment &a = model.assignments[ev.index];
    std::optional<std::string> tag;
    if (a.kind == AssignmentKind::Plain && a.value_call) {
      const CallSite &c = model.calls[*a.value_call];
      bool in_place = c.keyword_args.count("inplace") && !c.false_literal_kwargs.count("inplace");
      if (!in_place) {
        if (c.resolved_qname) {
          auto it = kb.return_types.find(*c.resolved_qname);
          if (it != kb.return_types.end())
            tag = it->second;
        } else if (c.receiver_kb_type && c.method_name) {
          auto it = kb.return_types.find(*c.receiver_kb_type + "." + *c.method_name);
          if (it != kb.return_types.end())
            tag = it->second;
        }
      }
    }
    a.value_origin = tag;
    std::pair<int, std::string> key{a.scope_id.value, a.target_name};
    if (tag)
      bound_types[key] = *tag;
    else
      bound_types.erase(key);
  }
  return model;
}

ScopeId scope_of(const CodeModel &model, SourceLocation location) {
  if (!model.map.to_global(location.cell_index, location.line))
    throw std::out_of_range("location is not inside a code cell");
  ScopeId best = kGlobalScope;
  int best_line = 0;
  for (const auto &f : model.functions) {
    if (f.location.cell_index != location.cell_index)
      continue;
    if (f.location.line <= location.line && location.line <= f.body_end.line && f.location.line >= best_line) {
      best = f.scope;
      best_line = f.location.line;
    }
  }
  return best;
}

} // namespace vespucci
