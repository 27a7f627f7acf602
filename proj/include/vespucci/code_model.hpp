#pragma once

#include "vespucci/knowledge_base.hpp"
#include "vespucci/notebook.hpp"
#include "vespucci/program.hpp"

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vespucci {

/// Cell-relative position. Line and column are 1-based.
struct SourceLocation {
  int cell_index = 0;
  int line = 1;
  int column = 1;

  auto operator<=>(const SourceLocation &) const = default;
};

/// 0 is the notebook-global scope; function k of CodeModel::functions has scope k + 1.
struct ScopeId {
  int value = 0;

  bool is_global() const { return value == 0; }
  auto operator<=>(const ScopeId &) const = default;
};

inline constexpr ScopeId kGlobalScope{};

/// Position of an event in evaluation order across the whole notebook.
using Order = std::uint32_t;

struct ImportStmt {
  /// Dotted module path; relative imports keep their leading dots.
  std::string module_path;
  std::optional<std::string> imported_symbol;
  std::optional<std::string> alias;
  bool is_star = false;
  bool is_dotted_module_import = false;
  /// Directly inside a class body: binds a class attribute, not a variable.
  bool in_class_body = false;
  ScopeId scope_id;
  SourceLocation location;
  Order order = 0;

  /// Name bound by the statement (alias, else symbol, else first module
  /// component). Empty for star imports.
  std::string bound_name() const;
  /// Dotted path the bound name stands for.
  std::string target_qname() const;
};

struct FunctionDef {
  std::string name;
  std::string qualified_name;
  ScopeId scope;
  ScopeId parent_scope;
  std::vector<std::string> parameters;
  std::set<std::string> variadic_parameters;
  bool has_implicit_receiver = false;
  std::set<std::string> local_assigned_names;
  std::set<std::string> global_declarations;
  SourceLocation location;
  SourceLocation body_end;
  Order order = 0;
};

struct ClassDef {
  std::string name;
  std::string qualified_name;
  SourceLocation location;
  Order order = 0;
};

enum class AssignmentKind { Plain, Augmented, ForTarget, WithTarget, Parameter };

std::string_view to_string(AssignmentKind kind);

struct Assignment {
  std::string target_name;
  /// Scope the name binds in (after global/nonlocal resolution).
  ScopeId scope_id;
  /// Scope the statement appears in.
  ScopeId site_scope;
  AssignmentKind kind = AssignmentKind::Plain;
  std::optional<std::string> value_origin;
  /// Index into CodeModel::calls when the assigned value is directly a call.
  std::optional<std::size_t> value_call;
  SourceLocation location;
  Order order = 0;
};

struct NameRead {
  std::string name;
  /// Scope the read appears in.
  ScopeId scope_id;
  /// Scope whose binding the read refers to.
  ScopeId binding_scope;
  SourceLocation location;
  Order order = 0;
};

struct AttributeRead {
  std::string attribute;
  SourceLocation location;
};

struct CallSite {
  /// Callee as written; "()" and "[]" mark calls and subscripts inside the chain.
  std::string callee_display;
  std::optional<std::string> resolved_qname;
  /// Last attribute of the callee, for method calls.
  std::optional<std::string> method_name;
  /// Receiver of a method call when it is a plain name.
  std::optional<std::string> receiver_name;
  ScopeId receiver_binding_scope;
  std::optional<std::string> receiver_kb_type;
  /// Binding scope of the first name of a dotted callee.
  ScopeId root_binding_scope;
  std::set<std::string> keyword_args;
  /// Keywords passed the literal False.
  std::set<std::string> false_literal_kwargs;
  bool has_kwargs_unpack = false;
  int positional_count = 0;
  bool has_star_args = false;
  bool is_expression_statement = false;
  bool is_cell_tail = false;
  std::optional<std::string> assigned_to;
  ScopeId scope_id;
  SourceLocation location;
  Order order = 0;
};

struct GlobalDecl {
  std::vector<std::string> names;
  ScopeId scope_id;
  SourceLocation location;
};

/// Evaluation-order range of a loop body, used to accept reads that precede
/// an assignment textually but follow it on the next iteration.
struct LoopSpan {
  Order begin = 0;
  Order end = 0;
};

/// Any event that (re)binds a name; imports carry their index.
struct BindingEvent {
  std::string name;
  ScopeId scope_id;
  Order order = 0;
  std::optional<std::size_t> import_index;
};

struct CodeModel {
  std::vector<ImportStmt> imports;
  std::vector<FunctionDef> functions;
  std::vector<ClassDef> classes;
  std::vector<Assignment> assignments;
  std::vector<NameRead> reads;
  std::vector<CallSite> calls;
  std::vector<AttributeRead> attribute_reads;
  std::vector<GlobalDecl> global_decls;
  std::vector<LoopSpan> loops;
  std::vector<BindingEvent> bindings;
  bool analyzable = true;
  std::vector<std::string> parse_diagnostics;
  LineMap map;

  const FunctionDef *function_for(ScopeId scope) const;
};

/// Parses the program and extracts entities. Never throws on bad Python:
/// syntax errors yield analyzable = false with a diagnostic.
CodeModel build_code_model(std::string_view program_text, const LineMap &map, const Notebook &nb);

/// Canonical dotted name of the callee, through the import binding of its
/// first name that is current at the call.
std::optional<std::string> resolve_qname(const CodeModel &model, const CallSite &call);

/// One-level flow typing in evaluation order. Deterministic and idempotent.
CodeModel infer_types(CodeModel model, const ApiKnowledgeBase &kb);

/// Innermost function containing the location, else the global scope.
/// Throws std::out_of_range for locations outside the code cells.
ScopeId scope_of(const CodeModel &model, SourceLocation location);

} // namespace vespucci
