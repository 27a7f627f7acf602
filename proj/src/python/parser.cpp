#include "vespucci/python/parser.hpp"

#include <algorithm>
#include <set>

namespace vespucci::py {

namespace {

constexpr int kMaxDepth = 400;

constexpr std::string_view kAugOps[] = {"+=", "-=", "*=", "/=", "//=", "%=", "@=",
                                        "&=", "|=", "^=", ">>=", "<<=", "**="};

bool is_aug_op(const Token &tok) {
  return tok.kind == TokenKind::Op &&
         std::find(std::begin(kAugOps), std::end(kAugOps), tok.text) != std::end(kAugOps);
}

ExprPtr make_expr(ExprKind kind, Pos pos, std::string text = {}) {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->pos = pos;
  e->text = std::move(text);
  return e;
}

StmtPtr make_stmt(StmtKind kind, Pos pos) {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->pos = pos;
  return s;
}

void shift_positions(Expr &e, Pos origin);

void shift_pos(Pos &p, Pos origin) {
  // Field text is parsed wrapped in one leading '(' so columns on the first
  // line are off by one.
  if (p.line == 1)
    p.column = origin.column + std::max(0, p.column - 1);
  p.line = origin.line + p.line - 1;
}

void shift_positions(Expr &e, Pos origin) {
  shift_pos(e.pos, origin);
  for (auto &item : e.items)
    if (item)
      shift_positions(*item, origin);
  for (auto &kw : e.keywords) {
    shift_pos(kw.pos, origin);
    if (kw.value)
      shift_positions(*kw.value, origin);
  }
  for (auto &gen : e.generators) {
    shift_positions(*gen.target, origin);
    shift_positions(*gen.iter, origin);
    for (auto &cond : gen.conditions)
      shift_positions(*cond, origin);
  }
  for (auto &param : e.params) {
    shift_pos(param.pos, origin);
    if (param.default_value)
      shift_positions(*param.default_value, origin);
  }
}

struct FieldText {
  std::string text;
  std::size_t offset = 0;
};

// Splits the replacement fields out of an f-string body. Nested fields in
// format specs are returned as well. Malformed bodies yield what was found.
std::vector<FieldText> fstring_fields(std::string_view body) {
  std::vector<FieldText> fields;
  std::size_t i = 0;
  while (i < body.size()) {
    char c = body[i];
    if (c == '{' && i + 1 < body.size() && body[i + 1] == '{') {
      i += 2;
      continue;
    }
    if (c != '{') {
      ++i;
      continue;
    }
    std::size_t start = ++i;
    int depth = 0;
    char quote = 0;
    std::size_t expr_end = std::string_view::npos;
    for (; i < body.size(); ++i) {
      char d = body[i];
      if (quote) {
        if (d == '\\')
          ++i;
        else if (d == quote)
          quote = 0;
        continue;
      }
      if (d == '\'' || d == '"') {
        quote = d;
      } else if (d == '(' || d == '[' || d == '{') {
        ++depth;
      } else if (d == ')' || d == ']' || (d == '}' && depth > 0)) {
        --depth;
      } else if (depth == 0 && (d == '}' || d == ':' ||
                                (d == '!' && i + 1 < body.size() && body[i + 1] != '='))) {
        expr_end = i;
        break;
      }
    }
    if (expr_end == std::string_view::npos)
      break;
    std::string expr(body.substr(start, expr_end - start));
    // Self-documenting `{x=}`.
    std::size_t last = expr.find_last_not_of(" \t");
    if (last != std::string::npos && expr[last] == '=' && last > 0 &&
        std::string_view("=!<>").find(expr[last - 1]) == std::string_view::npos)
      expr.erase(last);
    fields.push_back({expr, start});

    // Skip conversion and format spec, collecting nested fields.
    int spec_depth = 0;
    for (i = expr_end; i < body.size(); ++i) {
      char d = body[i];
      if (d == '{') {
        std::size_t nested_start = i + 1;
        std::size_t close = body.find('}', nested_start);
        if (close == std::string_view::npos)
          break;
        fields.push_back({std::string(body.substr(nested_start, close - nested_start)), nested_start});
        i = close;
        continue;
      }
      if (d == '}') {
        if (spec_depth == 0) {
          ++i;
          break;
        }
        --spec_depth;
      }
    }
  }
  return fields;
}

Pos offset_to_pos(std::string_view body, Pos body_pos, std::size_t offset) {
  Pos p = body_pos;
  for (std::size_t k = 0; k < offset && k < body.size(); ++k) {
    if (body[k] == '\n') {
      ++p.line;
      p.column = 0;
    } else {
      ++p.column;
    }
  }
  return p;
}

class Parser {
public:
  explicit Parser(std::vector<Token> tokens) : t_(std::move(tokens)) {}

  Module module() {
    Module m;
    while (cur().kind != TokenKind::EndMarker)
      statement(m.body);
    return m;
  }

  ExprPtr lone_expression() {
    auto e = star_expressions();
    while (cur().kind == TokenKind::Newline)
      take();
    if (cur().kind != TokenKind::EndMarker)
      fail("invalid syntax");
    return e;
  }

private:
  struct DepthGuard {
    explicit DepthGuard(Parser &p) : p_(p) {
      if (++p_.depth_ > kMaxDepth)
        p_.fail("too many nested parentheses");
    }
    ~DepthGuard() { --p_.depth_; }
    Parser &p_;
  };

  // ---- token helpers ----

  const Token &cur() const { return t_[p_]; }
  const Token &peek(std::size_t k = 1) const { return t_[std::min(p_ + k, t_.size() - 1)]; }

  bool at_op(std::string_view op) const { return cur().kind == TokenKind::Op && cur().text == op; }
  bool at_kw(std::string_view kw) const { return cur().kind == TokenKind::Name && cur().text == kw; }
  static bool is_op(const Token &tok, std::string_view op) {
    return tok.kind == TokenKind::Op && tok.text == op;
  }

  const Token &take() {
    const Token &tok = t_[p_];
    if (tok.kind != TokenKind::Dedent && tok.kind != TokenKind::Indent)
      last_line_ = tok.end_line ? tok.end_line : tok.pos.line;
    if (p_ + 1 < t_.size())
      ++p_;
    return tok;
  }

  [[noreturn]] void fail(const std::string &message) const {
    const Token &tok = cur();
    std::string msg = message;
    if (tok.kind == TokenKind::Indent)
      msg = "unexpected indent";
    else if (tok.kind == TokenKind::Dedent && message == "invalid syntax")
      msg = "unexpected unindent";
    throw SyntaxError(msg, tok.pos);
  }

  void expect_op(std::string_view op) {
    if (!at_op(op))
      fail("expected '" + std::string(op) + "'");
    take();
  }

  void expect_kw(std::string_view kw) {
    if (!at_kw(kw))
      fail("expected '" + std::string(kw) + "'");
    take();
  }

  std::string expect_name() {
    if (cur().kind != TokenKind::Name || is_keyword(cur().text))
      fail("expected a name");
    return take().text;
  }

  bool can_start_expression() const {
    const Token &tok = cur();
    switch (tok.kind) {
    case TokenKind::Number:
    case TokenKind::String:
      return true;
    case TokenKind::Name:
      return !is_keyword(tok.text) || tok.text == "not" || tok.text == "lambda" ||
             tok.text == "await" || tok.text == "None" || tok.text == "True" || tok.text == "False" ||
             tok.text == "yield";
    case TokenKind::Op:
      return tok.text == "(" || tok.text == "[" || tok.text == "{" || tok.text == "-" ||
             tok.text == "+" || tok.text == "~" || tok.text == "*" || tok.text == "..." ||
             tok.text == "**";
    default:
      return false;
    }
  }

  // ---- statements ----

  void statement(std::vector<StmtPtr> &out) {
    DepthGuard guard(*this);
    if (cur().kind == TokenKind::Indent)
      fail("unexpected indent");
    if (auto s = compound_statement())
      out.push_back(std::move(s));
    else
      simple_statements(out);
  }

  StmtPtr compound_statement() {
    const Token &tok = cur();
    if (is_op(tok, "@"))
      return decorated();
    if (tok.kind != TokenKind::Name)
      return nullptr;
    const std::string &w = tok.text;
    if (w == "def")
      return function_def({}, false);
    if (w == "class")
      return class_def({});
    if (w == "if")
      return if_stmt();
    if (w == "while")
      return while_stmt();
    if (w == "for")
      return for_stmt(false);
    if (w == "try")
      return try_stmt();
    if (w == "with")
      return with_stmt(false);
    if (w == "async") {
      const Token &next = peek();
      if (next.kind == TokenKind::Name && (next.text == "def" || next.text == "for" || next.text == "with")) {
        take();
        if (next.text == "def")
          return function_def({}, true);
        if (next.text == "for")
          return for_stmt(true);
        return with_stmt(true);
      }
      fail("invalid syntax");
    }
    if (w == "match")
      return try_match();
    return nullptr;
  }

  std::vector<StmtPtr> block() {
    expect_op(":");
    std::vector<StmtPtr> body;
    if (cur().kind == TokenKind::Newline) {
      take();
      if (cur().kind != TokenKind::Indent)
        fail("expected an indented block");
      take();
      while (cur().kind != TokenKind::Dedent && cur().kind != TokenKind::EndMarker)
        statement(body);
      if (cur().kind == TokenKind::Dedent)
        take();
    } else {
      simple_statements(body);
    }
    return body;
  }

  StmtPtr decorated() {
    std::vector<ExprPtr> decorators;
    while (at_op("@")) {
      take();
      decorators.push_back(named_expression());
      if (cur().kind != TokenKind::Newline)
        fail("invalid syntax");
      take();
    }
    if (at_kw("def"))
      return function_def(std::move(decorators), false);
    if (at_kw("class"))
      return class_def(std::move(decorators));
    if (at_kw("async") && peek().kind == TokenKind::Name && peek().text == "def") {
      take();
      return function_def(std::move(decorators), true);
    }
    fail("invalid syntax");
  }

  StmtPtr function_def(std::vector<ExprPtr> decorators, bool is_async) {
    auto s = make_stmt(StmtKind::FunctionDef, cur().pos);
    s->is_async = is_async;
    take(); // def
    s->name = expect_name();
    s->decorators = std::move(decorators);
    expect_op("(");
    s->params = parameters(")", true);
    expect_op(")");
    if (at_op("->")) {
      take();
      s->annotation = expression();
    }
    s->body = block();
    s->end_line = last_line_;
    return s;
  }

  std::vector<Parameter> parameters(std::string_view terminator, bool annotations) {
    std::vector<Parameter> params;
    std::set<std::string> seen;
    bool keyword_only = false;
    while (!at_op(terminator)) {
      Parameter param;
      param.pos = cur().pos;
      if (at_op("/")) {
        take();
      } else if (at_op("*")) {
        take();
        keyword_only = true;
        if (cur().kind == TokenKind::Name) {
          param.kind = ParamKind::VarArgs;
          param.name = expect_name();
          if (annotations && at_op(":")) {
            take();
            param.annotation = star_expression();
          }
        }
      } else if (at_op("**")) {
        take();
        param.kind = ParamKind::VarKeywords;
        param.name = expect_name();
        if (annotations && at_op(":")) {
          take();
          param.annotation = expression();
        }
      } else {
        param.kind = keyword_only ? ParamKind::KeywordOnly : ParamKind::Positional;
        param.name = expect_name();
        if (annotations && at_op(":")) {
          take();
          param.annotation = expression();
        }
        if (at_op("=")) {
          take();
          param.default_value = expression();
        }
      }
      if (!param.name.empty()) {
        if (!seen.insert(param.name).second)
          throw SyntaxError("duplicate argument '" + param.name + "' in function definition", param.pos);
        params.push_back(std::move(param));
      }
      if (!at_op(","))
        break;
      take();
    }
    if (!at_op(terminator))
      fail("invalid syntax");
    return params;
  }

  StmtPtr class_def(std::vector<ExprPtr> decorators) {
    auto s = make_stmt(StmtKind::ClassDef, cur().pos);
    take(); // class
    s->name = expect_name();
    s->decorators = std::move(decorators);
    if (at_op("(")) {
      take();
      call_arguments(s->exprs, s->keywords);
      expect_op(")");
    }
    s->body = block();
    s->end_line = last_line_;
    return s;
  }

  StmtPtr if_stmt() {
    auto s = make_stmt(StmtKind::If, cur().pos);
    take(); // if / elif
    s->value = named_expression();
    s->body = block();
    if (at_kw("elif")) {
      s->orelse.push_back(if_stmt());
    } else if (at_kw("else")) {
      take();
      s->orelse = block();
    }
    s->end_line = last_line_;
    return s;
  }

  StmtPtr while_stmt() {
    auto s = make_stmt(StmtKind::While, cur().pos);
    take();
    s->value = named_expression();
    s->body = block();
    if (at_kw("else")) {
      take();
      s->orelse = block();
    }
    s->end_line = last_line_;
    return s;
  }

  StmtPtr for_stmt(bool is_async) {
    auto s = make_stmt(StmtKind::For, cur().pos);
    s->is_async = is_async;
    take();
    auto target = target_list();
    check_assignable(*target);
    s->targets.push_back(std::move(target));
    expect_kw("in");
    s->value = star_expressions();
    s->body = block();
    if (at_kw("else")) {
      take();
      s->orelse = block();
    }
    s->end_line = last_line_;
    return s;
  }

  StmtPtr try_stmt() {
    auto s = make_stmt(StmtKind::Try, cur().pos);
    take();
    s->body = block();
    while (at_kw("except")) {
      ExceptHandler handler;
      handler.pos = cur().pos;
      take();
      if (at_op("*"))
        take();
      if (!at_op(":")) {
        handler.type = expression();
        if (at_kw("as")) {
          take();
          handler.name = expect_name();
        } else if (at_op(",")) {
          fail("multiple exception types must be parenthesized");
        }
      }
      handler.body = block();
      s->handlers.push_back(std::move(handler));
    }
    if (at_kw("else")) {
      if (s->handlers.empty())
        fail("invalid syntax");
      take();
      s->orelse = block();
    }
    if (at_kw("finally")) {
      take();
      s->finalbody = block();
    }
    if (s->handlers.empty() && s->finalbody.empty())
      fail("expected 'except' or 'finally' block");
    s->end_line = last_line_;
    return s;
  }

  StmtPtr with_stmt(bool is_async) {
    auto s = make_stmt(StmtKind::With, cur().pos);
    s->is_async = is_async;
    take();
    bool parsed = false;
    if (at_op("(")) {
      // Parenthesized with-items; fall back to an ordinary expression.
      std::size_t saved = p_;
      try {
        take();
        std::vector<WithItem> items;
        while (!at_op(")")) {
          items.push_back(with_item());
          if (!at_op(","))
            break;
          take();
        }
        expect_op(")");
        if (at_op(":")) {
          s->with_items = std::move(items);
          parsed = true;
        } else {
          p_ = saved;
        }
      } catch (const SyntaxError &) {
        p_ = saved;
      }
    }
    if (!parsed) {
      s->with_items.push_back(with_item());
      while (at_op(",")) {
        take();
        s->with_items.push_back(with_item());
      }
    }
    s->body = block();
    s->end_line = last_line_;
    return s;
  }

  WithItem with_item() {
    WithItem item;
    item.context = expression();
    if (at_kw("as")) {
      take();
      item.target = single_target();
      check_assignable(*item.target);
    }
    return item;
  }

  StmtPtr try_match() {
    const Token &next = peek();
    bool plausible = next.kind == TokenKind::Name || next.kind == TokenKind::Number ||
                     next.kind == TokenKind::String || is_op(next, "(") || is_op(next, "[") ||
                     is_op(next, "{") || is_op(next, "-") || is_op(next, "*");
    if (!plausible)
      return nullptr;
    std::size_t saved = p_;
    int saved_line = last_line_;
    try {
      auto s = make_stmt(StmtKind::Match, cur().pos);
      take();
      s->value = star_expressions();
      expect_op(":");
      if (cur().kind != TokenKind::Newline)
        fail("invalid syntax");
      take();
      if (cur().kind != TokenKind::Indent)
        fail("expected an indented block");
      take();
      while (cur().kind == TokenKind::Name && cur().text == "case") {
        MatchCase c;
        take();
        c.pattern = pattern_list();
        if (at_kw("if")) {
          take();
          c.guard = named_expression();
        }
        c.body = block();
        s->cases.push_back(std::move(c));
      }
      if (s->cases.empty() || cur().kind != TokenKind::Dedent)
        fail("invalid syntax");
      take();
      s->end_line = last_line_;
      return s;
    } catch (const SyntaxError &) {
      p_ = saved;
      last_line_ = saved_line;
      return nullptr;
    }
  }

  ExprPtr pattern_list() {
    Pos pos = cur().pos;
    std::vector<ExprPtr> items;
    do {
      if (!items.empty())
        take();
      if (at_op(":"))
        break;
      ExprPtr item;
      if (at_op("*")) {
        Pos star = cur().pos;
        take();
        item = make_expr(ExprKind::Starred, star, "*");
        item->items.push_back(bitwise_or());
      } else {
        item = bitwise_or();
      }
      if (at_kw("as")) {
        take();
        expect_name();
      }
      items.push_back(std::move(item));
    } while (at_op(","));
    if (items.size() == 1)
      return std::move(items.front());
    auto tuple = make_expr(ExprKind::Tuple, pos);
    tuple->items = std::move(items);
    return tuple;
  }

  void simple_statements(std::vector<StmtPtr> &out) {
    while (true) {
      out.push_back(simple_statement());
      if (at_op(";")) {
        take();
        if (cur().kind == TokenKind::Newline)
          break;
        continue;
      }
      break;
    }
    if (cur().kind != TokenKind::Newline)
      fail("invalid syntax");
    take();
  }

  bool at_simple_end() const { return cur().kind == TokenKind::Newline || at_op(";"); }

  StmtPtr simple_statement() {
    Pos pos = cur().pos;
    StmtPtr s;
    if (cur().kind == TokenKind::Name) {
      const std::string &w = cur().text;
      if (w == "pass" || w == "break" || w == "continue") {
        s = make_stmt(w == "pass" ? StmtKind::Pass : w == "break" ? StmtKind::Break : StmtKind::Continue, pos);
        take();
      } else if (w == "return") {
        s = make_stmt(StmtKind::Return, pos);
        take();
        if (!at_simple_end())
          s->value = star_expressions();
      } else if (w == "raise") {
        s = make_stmt(StmtKind::Raise, pos);
        take();
        if (!at_simple_end()) {
          s->exprs.push_back(expression());
          if (at_kw("from")) {
            take();
            s->exprs.push_back(expression());
          }
        }
      } else if (w == "global" || w == "nonlocal") {
        s = make_stmt(w == "global" ? StmtKind::Global : StmtKind::Nonlocal, pos);
        take();
        s->identifiers.push_back(expect_name());
        while (at_op(",")) {
          take();
          s->identifiers.push_back(expect_name());
        }
      } else if (w == "del") {
        s = make_stmt(StmtKind::Delete, pos);
        take();
        auto targets = target_list();
        check_deletable(*targets);
        s->targets.push_back(std::move(targets));
      } else if (w == "assert") {
        s = make_stmt(StmtKind::Assert, pos);
        take();
        s->exprs.push_back(expression());
        if (at_op(",")) {
          take();
          s->exprs.push_back(expression());
        }
      } else if (w == "import") {
        s = import_stmt();
      } else if (w == "from") {
        s = from_import_stmt();
      }
    }
    if (!s)
      s = expression_statement();
    s->end_line = last_line_;
    return s;
  }

  std::string dotted_name() {
    std::string name = expect_name();
    while (at_op(".")) {
      take();
      name += ".";
      name += expect_name();
    }
    return name;
  }

  StmtPtr import_stmt() {
    auto s = make_stmt(StmtKind::Import, cur().pos);
    take();
    do {
      if (!s->names.empty())
        take();
      ImportName name;
      name.pos = cur().pos;
      name.name = dotted_name();
      if (at_kw("as")) {
        take();
        name.alias = expect_name();
      }
      s->names.push_back(std::move(name));
    } while (at_op(","));
    return s;
  }

  StmtPtr from_import_stmt() {
    auto s = make_stmt(StmtKind::ImportFrom, cur().pos);
    take();
    while (at_op(".") || at_op("...")) {
      s->level += static_cast<int>(cur().text.size());
      take();
    }
    if (!at_kw("import"))
      s->module = dotted_name();
    else if (s->level == 0)
      fail("invalid syntax");
    expect_kw("import");
    if (at_op("*")) {
      ImportName star;
      star.pos = cur().pos;
      star.name = "*";
      take();
      s->names.push_back(std::move(star));
      return s;
    }
    bool parenthesized = at_op("(");
    if (parenthesized)
      take();
    while (true) {
      ImportName name;
      name.pos = cur().pos;
      name.name = expect_name();
      if (at_kw("as")) {
        take();
        name.alias = expect_name();
      }
      s->names.push_back(std::move(name));
      if (!at_op(","))
        break;
      take();
      if (parenthesized && at_op(")"))
        break;
      if (!parenthesized && at_simple_end())
        fail("trailing comma not allowed without surrounding parentheses");
    }
    if (parenthesized)
      expect_op(")");
    return s;
  }

  StmtPtr expression_statement() {
    Pos pos = cur().pos;
    ExprPtr first = at_kw("yield") ? yield_expression() : star_expressions();

    if (at_op(":")) {
      auto s = make_stmt(StmtKind::AnnAssign, pos);
      check_single_target(*first);
      take();
      s->annotation = expression();
      if (at_op("=")) {
        take();
        s->value = at_kw("yield") ? yield_expression() : star_expressions();
      }
      s->targets.push_back(std::move(first));
      return s;
    }
    if (is_aug_op(cur())) {
      auto s = make_stmt(StmtKind::AugAssign, pos);
      check_single_target(*first);
      s->text = take().text;
      s->value = at_kw("yield") ? yield_expression() : star_expressions();
      s->targets.push_back(std::move(first));
      return s;
    }
    if (at_op("=")) {
      auto s = make_stmt(StmtKind::Assign, pos);
      std::vector<ExprPtr> chain;
      chain.push_back(std::move(first));
      while (at_op("=")) {
        take();
        chain.push_back(at_kw("yield") ? yield_expression() : star_expressions());
      }
      s->value = std::move(chain.back());
      chain.pop_back();
      for (auto &target : chain)
        check_assignable(*target);
      s->targets = std::move(chain);
      return s;
    }
    auto s = make_stmt(StmtKind::Expr, pos);
    s->value = std::move(first);
    return s;
  }

  // ---- target validation ----

  static std::string describe(const Expr &e) {
    switch (e.kind) {
    case ExprKind::Call:
      return "function call";
    case ExprKind::Constant:
    case ExprKind::String:
      return "literal";
    case ExprKind::Compare:
      return "comparison";
    case ExprKind::Lambda:
      return "lambda";
    default:
      return "expression";
    }
  }

  void check_assignable(const Expr &e) const {
    switch (e.kind) {
    case ExprKind::Name:
      if (is_keyword(e.text))
        throw SyntaxError("cannot assign to " + e.text, e.pos);
      return;
    case ExprKind::Attribute:
    case ExprKind::Subscript:
      return;
    case ExprKind::Starred:
      check_assignable(*e.items.front());
      return;
    case ExprKind::Tuple:
    case ExprKind::List:
      for (const auto &item : e.items)
        check_assignable(*item);
      return;
    default:
      throw SyntaxError("cannot assign to " + describe(e), e.pos);
    }
  }

  void check_single_target(const Expr &e) const {
    if (e.kind != ExprKind::Name && e.kind != ExprKind::Attribute && e.kind != ExprKind::Subscript)
      throw SyntaxError("illegal target for assignment: " + describe(e), e.pos);
  }

  void check_deletable(const Expr &e) const {
    switch (e.kind) {
    case ExprKind::Name:
    case ExprKind::Attribute:
    case ExprKind::Subscript:
      return;
    case ExprKind::Tuple:
    case ExprKind::List:
      for (const auto &item : e.items)
        check_deletable(*item);
      return;
    default:
      throw SyntaxError("cannot delete " + describe(e), e.pos);
    }
  }

  // ---- expressions ----

  // Targets of for-loops and comprehensions: no comparisons, so `in` ends them.
  ExprPtr target_list() {
    Pos pos = cur().pos;
    auto first = star_target();
    if (!at_op(","))
      return first;
    auto tuple = make_expr(ExprKind::Tuple, pos);
    tuple->items.push_back(std::move(first));
    while (at_op(",")) {
      take();
      if (at_kw("in") || at_op("=") || at_simple_end() || at_op(")"))
        break;
      tuple->items.push_back(star_target());
    }
    return tuple;
  }

  ExprPtr star_target() {
    if (at_op("*")) {
      auto star = make_expr(ExprKind::Starred, cur().pos, "*");
      take();
      star->items.push_back(bitwise_or());
      return star;
    }
    return bitwise_or();
  }

  ExprPtr single_target() { return star_target(); }

  ExprPtr star_expressions() {
    Pos pos = cur().pos;
    auto first = star_expression();
    if (!at_op(","))
      return first;
    auto tuple = make_expr(ExprKind::Tuple, pos);
    tuple->items.push_back(std::move(first));
    while (at_op(",")) {
      take();
      if (!can_start_expression())
        break;
      tuple->items.push_back(star_expression());
    }
    return tuple;
  }

  ExprPtr star_expression() {
    if (at_op("*")) {
      auto star = make_expr(ExprKind::Starred, cur().pos, "*");
      take();
      star->items.push_back(bitwise_or());
      return star;
    }
    return expression();
  }

  ExprPtr star_named_expression() {
    if (at_op("*"))
      return star_expression();
    return named_expression();
  }

  ExprPtr named_expression() {
    if (cur().kind == TokenKind::Name && is_op(peek(), ":=")) {
      auto e = make_expr(ExprKind::NamedExpr, cur().pos);
      auto target = make_expr(ExprKind::Name, cur().pos, expect_name());
      take(); // :=
      e->items.push_back(std::move(target));
      e->items.push_back(expression());
      return e;
    }
    return expression();
  }

  ExprPtr expression() {
    DepthGuard guard(*this);
    if (at_kw("lambda"))
      return lambda();
    auto body = disjunction();
    if (at_kw("if")) {
      auto e = make_expr(ExprKind::IfExp, body->pos);
      take();
      auto test = disjunction();
      expect_kw("else");
      auto orelse = expression();
      e->items.push_back(std::move(body));
      e->items.push_back(std::move(test));
      e->items.push_back(std::move(orelse));
      return e;
    }
    return body;
  }

  ExprPtr lambda() {
    auto e = make_expr(ExprKind::Lambda, cur().pos);
    take();
    e->params = parameters(":", false);
    expect_op(":");
    e->items.push_back(expression());
    return e;
  }

  ExprPtr yield_expression() {
    Pos pos = cur().pos;
    take();
    if (at_kw("from")) {
      take();
      auto e = make_expr(ExprKind::YieldFrom, pos);
      e->items.push_back(expression());
      return e;
    }
    auto e = make_expr(ExprKind::Yield, pos);
    if (can_start_expression())
      e->items.push_back(star_expressions());
    return e;
  }

  ExprPtr disjunction() {
    auto left = conjunction();
    if (!at_kw("or"))
      return left;
    auto e = make_expr(ExprKind::BoolOp, left->pos, "or");
    e->items.push_back(std::move(left));
    while (at_kw("or")) {
      take();
      e->items.push_back(conjunction());
    }
    return e;
  }

  ExprPtr conjunction() {
    auto left = inversion();
    if (!at_kw("and"))
      return left;
    auto e = make_expr(ExprKind::BoolOp, left->pos, "and");
    e->items.push_back(std::move(left));
    while (at_kw("and")) {
      take();
      e->items.push_back(inversion());
    }
    return e;
  }

  ExprPtr inversion() {
    if (at_kw("not")) {
      DepthGuard guard(*this);
      auto e = make_expr(ExprKind::UnaryOp, cur().pos, "not");
      take();
      e->items.push_back(inversion());
      return e;
    }
    return comparison();
  }

  bool at_comparison_op() const {
    if (cur().kind == TokenKind::Op) {
      const auto &o = cur().text;
      return o == "<" || o == ">" || o == "==" || o == ">=" || o == "<=" || o == "!=";
    }
    if (at_kw("in") || at_kw("is"))
      return true;
    return at_kw("not") && peek().kind == TokenKind::Name && peek().text == "in";
  }

  ExprPtr comparison() {
    auto left = bitwise_or();
    if (!at_comparison_op())
      return left;
    auto e = make_expr(ExprKind::Compare, left->pos);
    e->items.push_back(std::move(left));
    while (at_comparison_op()) {
      if (at_kw("not") || at_kw("is")) {
        bool is = at_kw("is");
        take();
        if (is && at_kw("not"))
          take();
        else if (!is)
          take(); // in
      } else {
        take();
      }
      e->items.push_back(bitwise_or());
    }
    return e;
  }

  template <typename Next>
  ExprPtr binary(std::initializer_list<std::string_view> ops, Next next) {
    auto left = (this->*next)();
    while (cur().kind == TokenKind::Op &&
           std::find(ops.begin(), ops.end(), cur().text) != ops.end()) {
      auto e = make_expr(ExprKind::BinOp, left->pos, take().text);
      e->items.push_back(std::move(left));
      e->items.push_back((this->*next)());
      left = std::move(e);
    }
    return left;
  }

  ExprPtr bitwise_or() { return binary({"|"}, &Parser::bitwise_xor); }
  ExprPtr bitwise_xor() { return binary({"^"}, &Parser::bitwise_and); }
  ExprPtr bitwise_and() { return binary({"&"}, &Parser::shift_expr); }
  ExprPtr shift_expr() { return binary({"<<", ">>"}, &Parser::sum); }
  ExprPtr sum() { return binary({"+", "-"}, &Parser::term); }
  ExprPtr term() { return binary({"*", "/", "//", "%", "@"}, &Parser::factor); }

  ExprPtr factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      DepthGuard guard(*this);
      auto e = make_expr(ExprKind::UnaryOp, cur().pos, take().text);
      e->items.push_back(factor());
      return e;
    }
    return power();
  }

  ExprPtr power() {
    auto base = await_primary();
    if (at_op("**")) {
      auto e = make_expr(ExprKind::BinOp, base->pos, take().text);
      e->items.push_back(std::move(base));
      e->items.push_back(factor());
      return e;
    }
    return base;
  }

  ExprPtr await_primary() {
    if (at_kw("await")) {
      auto e = make_expr(ExprKind::Await, cur().pos);
      take();
      e->items.push_back(primary());
      return e;
    }
    return primary();
  }

  ExprPtr primary() {
    auto e = atom();
    while (true) {
      if (at_op(".")) {
        take();
        auto attr = make_expr(ExprKind::Attribute, e->pos, expect_name());
        attr->items.push_back(std::move(e));
        e = std::move(attr);
      } else if (at_op("(")) {
        DepthGuard guard(*this);
        auto call = make_expr(ExprKind::Call, e->pos);
        take();
        call->items.push_back(std::move(e));
        std::vector<ExprPtr> args;
        call_arguments(args, call->keywords);
        for (auto &a : args)
          call->items.push_back(std::move(a));
        expect_op(")");
        e = std::move(call);
      } else if (at_op("[")) {
        DepthGuard guard(*this);
        auto sub = make_expr(ExprKind::Subscript, e->pos);
        take();
        sub->items.push_back(std::move(e));
        sub->items.push_back(slices());
        expect_op("]");
        e = std::move(sub);
      } else {
        return e;
      }
    }
  }

  void call_arguments(std::vector<ExprPtr> &positional, std::vector<Keyword> &keywords) {
    while (!at_op(")")) {
      if (at_op("*")) {
        auto star = make_expr(ExprKind::Starred, cur().pos, "*");
        take();
        star->items.push_back(expression());
        positional.push_back(std::move(star));
      } else if (at_op("**")) {
        Keyword kw;
        kw.pos = cur().pos;
        take();
        kw.value = expression();
        keywords.push_back(std::move(kw));
      } else if (cur().kind == TokenKind::Name && is_op(peek(), "=")) {
        Keyword kw;
        kw.pos = cur().pos;
        kw.name = expect_name();
        take(); // =
        kw.value = expression();
        keywords.push_back(std::move(kw));
      } else {
        auto arg = named_expression();
        if (at_kw("for") || at_kw("async")) {
          auto gen = make_expr(ExprKind::GeneratorExp, arg->pos);
          gen->items.push_back(std::move(arg));
          gen->generators = comprehension_clauses();
          arg = std::move(gen);
        }
        positional.push_back(std::move(arg));
      }
      if (!at_op(","))
        break;
      take();
    }
  }

  ExprPtr slices() {
    Pos pos = cur().pos;
    auto first = slice();
    if (!at_op(","))
      return first;
    auto tuple = make_expr(ExprKind::Tuple, pos);
    tuple->items.push_back(std::move(first));
    while (at_op(",")) {
      take();
      if (at_op("]"))
        break;
      tuple->items.push_back(slice());
    }
    return tuple;
  }

  ExprPtr slice() {
    Pos pos = cur().pos;
    ExprPtr lower;
    if (!at_op(":")) {
      lower = star_named_expression();
      if (!at_op(":"))
        return lower;
    }
    auto s = make_expr(ExprKind::Slice, pos);
    take(); // :
    ExprPtr upper;
    ExprPtr step;
    if (!at_op(":") && !at_op("]") && !at_op(","))
      upper = expression();
    if (at_op(":")) {
      take();
      if (!at_op("]") && !at_op(","))
        step = expression();
    }
    s->items.push_back(std::move(lower));
    s->items.push_back(std::move(upper));
    s->items.push_back(std::move(step));
    return s;
  }

  std::vector<Comprehension> comprehension_clauses() {
    std::vector<Comprehension> gens;
    while (at_kw("for") || (at_kw("async") && peek().kind == TokenKind::Name && peek().text == "for")) {
      if (at_kw("async"))
        take();
      take(); // for
      Comprehension c;
      c.target = target_list();
      check_assignable(*c.target);
      expect_kw("in");
      c.iter = disjunction();
      while (at_kw("if")) {
        take();
        c.conditions.push_back(disjunction());
      }
      gens.push_back(std::move(c));
    }
    return gens;
  }

  ExprPtr atom() {
    DepthGuard guard(*this);
    const Token &tok = cur();
    switch (tok.kind) {
    case TokenKind::Name: {
      if (tok.text == "True" || tok.text == "False" || tok.text == "None")
        return make_expr(ExprKind::Constant, tok.pos, take().text);
      if (is_keyword(tok.text))
        fail("invalid syntax");
      return make_expr(ExprKind::Name, tok.pos, take().text);
    }
    case TokenKind::Number:
      return make_expr(ExprKind::Constant, tok.pos, take().text);
    case TokenKind::String:
      return strings();
    case TokenKind::Op:
      if (tok.text == "...")
        return make_expr(ExprKind::Constant, tok.pos, take().text);
      if (tok.text == "(")
        return paren_atom();
      if (tok.text == "[")
        return list_atom();
      if (tok.text == "{")
        return brace_atom();
      break;
    default:
      break;
    }
    fail("invalid syntax");
  }

  ExprPtr strings() {
    auto e = make_expr(ExprKind::String, cur().pos, cur().text);
    while (cur().kind == TokenKind::String) {
      const Token &tok = take();
      if (!tok.is_fstring)
        continue;
      for (const auto &field : fstring_fields(tok.text)) {
        if (field.text.find_first_not_of(" \t\n") == std::string::npos)
          continue;
        try {
          e->items.push_back(parse_expression(field.text, offset_to_pos(tok.text, tok.body_pos, field.offset)));
        } catch (const SyntaxError &) {
          // Unparseable replacement fields are ignored.
        }
      }
    }
    return e;
  }

  ExprPtr paren_atom() {
    Pos pos = cur().pos;
    take();
    if (at_op(")")) {
      take();
      return make_expr(ExprKind::Tuple, pos);
    }
    if (at_kw("yield")) {
      auto y = yield_expression();
      expect_op(")");
      return y;
    }
    auto first = star_named_expression();
    if (at_kw("for") || at_kw("async")) {
      auto gen = make_expr(ExprKind::GeneratorExp, pos);
      gen->items.push_back(std::move(first));
      gen->generators = comprehension_clauses();
      expect_op(")");
      return gen;
    }
    if (at_op(")")) {
      take();
      return first;
    }
    auto tuple = make_expr(ExprKind::Tuple, pos);
    tuple->items.push_back(std::move(first));
    while (at_op(",")) {
      take();
      if (at_op(")"))
        break;
      tuple->items.push_back(star_named_expression());
    }
    expect_op(")");
    return tuple;
  }

  ExprPtr list_atom() {
    Pos pos = cur().pos;
    take();
    auto list = make_expr(ExprKind::List, pos);
    if (at_op("]")) {
      take();
      return list;
    }
    auto first = star_named_expression();
    if (at_kw("for") || at_kw("async")) {
      auto comp = make_expr(ExprKind::ListComp, pos);
      comp->items.push_back(std::move(first));
      comp->generators = comprehension_clauses();
      expect_op("]");
      return comp;
    }
    list->items.push_back(std::move(first));
    while (at_op(",")) {
      take();
      if (at_op("]"))
        break;
      list->items.push_back(star_named_expression());
    }
    expect_op("]");
    return list;
  }

  ExprPtr brace_atom() {
    Pos pos = cur().pos;
    take();
    if (at_op("}")) {
      take();
      return make_expr(ExprKind::Dict, pos);
    }
    // Dict with a leading unpack, or key: value pairs.
    bool is_dict = at_op("**");
    ExprPtr first_key;
    if (!is_dict) {
      first_key = star_named_expression();
      is_dict = at_op(":");
    }
    if (is_dict) {
      auto dict = make_expr(ExprKind::Dict, pos);
      auto entry = [&](ExprPtr key) {
        if (!key && at_op("**")) {
          auto unpack = make_expr(ExprKind::Starred, cur().pos, "**");
          take();
          unpack->items.push_back(bitwise_or());
          dict->items.push_back(std::move(unpack));
          return;
        }
        if (!key)
          key = expression();
        expect_op(":");
        dict->items.push_back(std::move(key));
        dict->items.push_back(expression());
      };
      entry(std::move(first_key));
      if ((at_kw("for") || at_kw("async")) && dict->items.size() == 2) {
        auto comp = make_expr(ExprKind::DictComp, pos);
        comp->items = std::move(dict->items);
        comp->generators = comprehension_clauses();
        expect_op("}");
        return comp;
      }
      while (at_op(",")) {
        take();
        if (at_op("}"))
          break;
        entry(nullptr);
      }
      expect_op("}");
      return dict;
    }
    if (at_kw("for") || at_kw("async")) {
      auto comp = make_expr(ExprKind::SetComp, pos);
      comp->items.push_back(std::move(first_key));
      comp->generators = comprehension_clauses();
      expect_op("}");
      return comp;
    }
    auto set = make_expr(ExprKind::Set, pos);
    set->items.push_back(std::move(first_key));
    while (at_op(",")) {
      take();
      if (at_op("}"))
        break;
      set->items.push_back(star_named_expression());
    }
    expect_op("}");
    return set;
  }

  std::vector<Token> t_;
  std::size_t p_ = 0;
  int last_line_ = 0;
  int depth_ = 0;
};

} // namespace

Module parse_module(std::string_view source, const LexOptions &options) {
  return Parser(tokenize(source, options)).module();
}

ExprPtr parse_expression(std::string_view source, Pos origin) {
  std::string wrapped = "(" + std::string(source) + ")";
  auto expr = Parser(tokenize(wrapped)).lone_expression();
  shift_positions(*expr, origin);
  return expr;
}

} // namespace vespucci::py
