#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vespucci::py {

/// Program position: 1-based line of the concatenated program, 0-based byte column.
struct Pos {
  int line = 0;
  int column = 0;
};

enum class ExprKind {
  Name,
  Constant, // numbers, True/False/None, Ellipsis; text holds the literal
  String,   // text holds the raw body of the first piece; items hold f-string fields
  Attribute,
  Subscript,
  Slice,
  Call,
  Starred, // text is "*" or "**"
  BinOp,
  UnaryOp,
  BoolOp,
  Compare,
  Lambda,
  IfExp,
  NamedExpr,
  Tuple,
  List,
  Set,
  Dict, // items alternate key, value; a "**" Starred stands alone
  ListComp,
  SetComp,
  DictComp,
  GeneratorExp,
  Await,
  Yield,
  YieldFrom,
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Keyword {
  /// Absent for a `**mapping` argument.
  std::optional<std::string> name;
  ExprPtr value;
  Pos pos;
};

struct Comprehension {
  ExprPtr target;
  ExprPtr iter;
  std::vector<ExprPtr> conditions;
};

enum class ParamKind { Positional, KeywordOnly, VarArgs, VarKeywords };

struct Parameter {
  std::string name;
  ParamKind kind = ParamKind::Positional;
  ExprPtr annotation;
  ExprPtr default_value;
  Pos pos;
};

/// Expression node. Child layout per kind:
///   Attribute: items[0] = value, text = attribute name
///   Subscript: items[0] = value, items[1] = index
///   Call:      items[0] = callee, items[1..] = positional args, keywords = named args
///   Lambda:    params, items[0] = body
///   comprehensions: items = element (key, value for DictComp), generators
struct Expr {
  ExprKind kind = ExprKind::Constant;
  Pos pos;
  std::string text;
  std::vector<ExprPtr> items;
  std::vector<Keyword> keywords;
  std::vector<Comprehension> generators;
  std::vector<Parameter> params;
};

enum class StmtKind {
  Expr,
  Assign,
  AugAssign,
  AnnAssign,
  FunctionDef,
  ClassDef,
  Return,
  Delete,
  Pass,
  Break,
  Continue,
  Raise,
  Global,
  Nonlocal,
  Import,
  ImportFrom,
  If,
  For,
  While,
  With,
  Try,
  Assert,
  Match,
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct ImportName {
  std::string name; // dotted module path, or imported symbol for from-imports
  std::optional<std::string> alias;
  Pos pos;
};

struct WithItem {
  ExprPtr context;
  ExprPtr target;
};

struct ExceptHandler {
  ExprPtr type;
  std::optional<std::string> name;
  Pos pos;
  std::vector<StmtPtr> body;
};

struct MatchCase {
  ExprPtr pattern;
  ExprPtr guard;
  std::vector<StmtPtr> body;
};

/// Statement node. Field use per kind:
///   Assign:      targets (chained `a = b = v`), value
///   AugAssign:   targets[0], value, text = operator
///   AnnAssign:   targets[0], annotation, value (optional)
///   For:         targets[0], value = iterable, body, orelse
///   If/While:    value = test, body, orelse
///   With:        with_items, body
///   Try:         body, handlers, orelse, finalbody
///   FunctionDef: name, params, decorators, annotation = return annotation, body
///   ClassDef:    name, decorators, exprs = bases, keywords, body
///   Import:      names; ImportFrom: module, level, names (name "*" for star)
///   Global/Nonlocal: identifiers
///   Match:       value = subject, cases
///   Delete/Raise/Assert/Return: exprs / value
struct Stmt {
  StmtKind kind = StmtKind::Pass;
  Pos pos;
  int end_line = 0;
  bool is_async = false;
  std::string text;
  std::string name;
  std::vector<ExprPtr> targets;
  ExprPtr value;
  ExprPtr annotation;
  std::vector<ExprPtr> exprs;
  std::vector<ExprPtr> decorators;
  std::vector<Keyword> keywords;
  std::vector<Parameter> params;
  std::vector<WithItem> with_items;
  std::vector<ExceptHandler> handlers;
  std::vector<MatchCase> cases;
  std::vector<ImportName> names;
  std::vector<std::string> identifiers;
  std::string module;
  int level = 0;
  std::vector<StmtPtr> body;
  std::vector<StmtPtr> orelse;
  std::vector<StmtPtr> finalbody;
};

struct Module {
  std::vector<StmtPtr> body;
};

} // namespace vespucci::py
