#include "vespucci/python/lexer.hpp"
#include "vespucci/python/parser.hpp"

#include <doctest.h>

#include <string>

using namespace vespucci::py;

namespace {
bool parses(const std::string &src) {
  try {
    parse_module(src);
    return true;
  } catch (const SyntaxError &) {
    return false;
  }
}
} // namespace

TEST_CASE("tokenizer emits indentation tokens") {
  auto tokens = tokenize("if x:\n    y = 1\nz = 2\n");
  int indents = 0, dedents = 0;
  for (const auto &t : tokens) {
    indents += t.kind == TokenKind::Indent;
    dedents += t.kind == TokenKind::Dedent;
  }
  CHECK(indents == 1);
  CHECK(dedents == 1);
  CHECK(tokens.back().kind == TokenKind::EndMarker);
}

TEST_CASE("string prefixes and f-strings") {
  auto tokens = tokenize("s = rb'x' + f\"{a!r:>{w}}\"\n");
  int fstrings = 0;
  for (const auto &t : tokens)
    if (t.kind == TokenKind::String && t.is_fstring)
      ++fstrings;
  CHECK(fstrings == 1);
}

TEST_CASE("valid Python 3 constructs parse") {
  const char *sources[] = {
      "x = 1\n",
      "a = b = c\n",
      "x: int = 3\n",
      "x += 1\n",
      "def f(a, b=1, *args, c, d=2, **kw) -> int:\n    return a\n",
      "def g(a, /, b):\n    pass\n",
      "async def h():\n    async with a as b:\n        await b\n    async for i in x:\n        yield i\n",
      "class A(B, metaclass=M):\n    x = 1\n    def m(self):\n        return self.x\n",
      "@dec(1)\nclass C: pass\n",
      "try:\n    pass\nexcept (A, B) as e:\n    raise\nelse:\n    pass\nfinally:\n    pass\n",
      "try:\n    pass\nexcept* ValueError:\n    pass\n",
      "with (open(a) as f, open(b) as g):\n    pass\n",
      "with (a, b):\n    pass\n",
      "match p:\n    case {\"k\": [1, *rest]} | Point(x=0) if rest:\n        pass\n    case _:\n        pass\n",
      "match = 3\nmatch.x = 1\n",
      "lambda x, *y, **z: x\n",
      "y = [i for i in range(3) if i for j in k]\n",
      "d = {**a, 'b': 1}\n",
      "s = {1, 2}\n",
      "t = x if y else z\n",
      "if (n := len(a)) > 10: pass\n",
      "print(*args, **kwargs)\n",
      "a[1:2, ::3]\n",
      "from . import x\nfrom ..m import (a as b, c,)\nfrom m import *\n",
      "import a.b.c as d, e\n",
      "global a, b\n",
      "del a[0], b.c\n",
      "assert x, 'msg'\n",
      "x = not a and b or c in d is not e\n",
      "x = 1_000 + 0x1f + 1.5e3j\n",
      "x = (yield)\n",
      "x = '''multi\nline'''\n",
      "x = [\n  1,\n  2,\n]\n",
      "x = 1 \\\n  + 2\n",
      "for i, (a, b) in enumerate(z):\n    continue\nelse:\n    break\n",
      "while True:\n    pass\n",
      "nonlocal_ok = 1\n",
      "x = f'{a[\"k\"]} {b:{w}.{p}}'\n",
      "x = ...\n",
      "c = a @ b\nc @= d\n",
  };
  for (std::string src : sources) {
    INFO(src);
    CHECK(parses(src));
  }
}

TEST_CASE("invalid Python is rejected") {
  const char *sources[] = {
      "def f(:\n    pass\n", "x = (1,\n", "1 = x\n", "f() = 3\n", "x +=\n", "  x = 1\n", "if x\n    pass\n",
      "return return\n", "del f()\n", "a, b += 1\n", "x = 'unterminated\n", "class\n", "import\n",
  };
  for (std::string src : sources) {
    INFO(src);
    CHECK_FALSE(parses(src));
  }
}

TEST_CASE("brackets cannot cross a unit boundary") {
  LexOptions opts;
  opts.unit_start_lines = {1, 2};
  CHECK_THROWS_AS(parse_module("x = (1,\n2)\n", opts), SyntaxError);
  CHECK_NOTHROW(parse_module("x = (1,\n2)\n"));
}

TEST_CASE("indentation resets at a unit boundary") {
  LexOptions opts;
  opts.unit_start_lines = {1, 3};
  CHECK_NOTHROW(parse_module("if x:\n    y = 1\nz = 2\n", opts));
}

TEST_CASE("syntax error positions") {
  try {
    parse_module("x = 1\ny = (\n");
    FAIL("expected SyntaxError");
  } catch (const SyntaxError &e) {
    CHECK(e.pos().line == 2);
  }
}

TEST_CASE("deep nesting is rejected rather than overflowing") {
  std::string deep(5000, '(');
  deep += "1";
  deep += std::string(5000, ')');
  CHECK_FALSE(parses(deep + "\n"));
}

TEST_CASE("statement structure") {
  auto mod = parse_module("import pandas as pd\ndef f(a, *b):\n    return a\n");
  REQUIRE(mod.body.size() == 2);
  CHECK(mod.body[0]->kind == StmtKind::Import);
  CHECK(mod.body[0]->names[0].name == "pandas");
  CHECK(mod.body[0]->names[0].alias == "pd");
  CHECK(mod.body[1]->kind == StmtKind::FunctionDef);
  CHECK(mod.body[1]->params.size() == 2);
  CHECK(mod.body[1]->params[1].kind == ParamKind::VarArgs);
  CHECK(mod.body[1]->end_line == 3);
}

TEST_CASE("call expression layout") {
  auto e = parse_expression("pd.read_csv(p, dtype=str, **kw)");
  REQUIRE(e->kind == ExprKind::Call);
  CHECK(e->items.size() == 2);
  CHECK(e->items[0]->kind == ExprKind::Attribute);
  CHECK(e->items[0]->text == "read_csv");
  REQUIRE(e->keywords.size() == 2);
  CHECK(e->keywords[0].name == "dtype");
  CHECK_FALSE(e->keywords[1].name.has_value());
}
