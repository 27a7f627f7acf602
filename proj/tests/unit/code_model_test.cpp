#include "vespucci/code_model.hpp"

#include "notebook_builder.hpp"

#include <doctest.h>

#include <algorithm>

using namespace vespucci;

namespace {

CodeModel model_of(const Notebook &nb, bool typed = true) {
  auto program = build_program(nb);
  auto model = build_code_model(program.text, program.map, nb);
  return typed ? infer_types(std::move(model), default_kb()) : model;
}

CodeModel model_of(const testing::NotebookBuilder &b, bool typed = true) { return model_of(b.parse(), typed); }

const CallSite *call_named(const CodeModel &m, const std::string &display) {
  for (const auto &c : m.calls)
    if (c.callee_display == display)
      return &c;
  return nullptr;
}

} // namespace

TEST_CASE("empty program") {
  auto m = model_of(testing::NotebookBuilder().code(""));
  CHECK(m.analyzable);
  CHECK(m.imports.empty());
  CHECK(m.assignments.empty());
  CHECK(m.calls.empty());
}

TEST_CASE("import, typed assignment and resolved call") {
  auto m = model_of(testing::NotebookBuilder().code("import pandas as pd\ndf = pd.read_csv(\"a.csv\")"));
  REQUIRE(m.imports.size() == 1);
  CHECK(m.imports[0].module_path == "pandas");
  CHECK(m.imports[0].alias == "pd");
  REQUIRE(m.assignments.size() == 1);
  CHECK(m.assignments[0].target_name == "df");
  CHECK(m.assignments[0].value_origin == "DataFrame");
  REQUIRE(m.calls.size() == 1);
  CHECK(m.calls[0].resolved_qname == "pandas.read_csv");
  CHECK(m.calls[0].assigned_to == "df");
  CHECK(m.calls[0].location == SourceLocation{0, 2, 6});
}

TEST_CASE("syntax error makes the model unanalyzable") {
  auto m = model_of(testing::NotebookBuilder().code("def f(:"));
  CHECK_FALSE(m.analyzable);
  REQUIRE(m.parse_diagnostics.size() == 1);
  CHECK(m.parse_diagnostics[0].find("cell 0, line 1") != std::string::npos);
}

TEST_CASE("syntax error location is cell relative") {
  auto m = model_of(testing::NotebookBuilder().code("x = 1").markdown("m").code("y = 2\nz = (", std::nullopt));
  CHECK_FALSE(m.analyzable);
  CHECK(m.parse_diagnostics[0].find("cell 2, line 2") != std::string::npos);
}

TEST_CASE("resolve_qname through aliases") {
  auto m = model_of(testing::NotebookBuilder()
                        .code("import pandas as pd\nfrom sklearn.model_selection import train_test_split")
                        .code("pd.read_csv(p)\ntrain_test_split(X, y)\nfoo.bar()"));
  CHECK(call_named(m, "pd.read_csv")->resolved_qname == "pandas.read_csv");
  CHECK(call_named(m, "train_test_split")->resolved_qname == "sklearn.model_selection.train_test_split");
  CHECK_FALSE(call_named(m, "foo.bar")->resolved_qname.has_value());
  for (const auto &c : m.calls)
    CHECK(resolve_qname(m, c) == c.resolved_qname);
}

TEST_CASE("a later rebinding hides the import") {
  auto m = model_of(testing::NotebookBuilder().code("import pandas as pd\npd = object()\npd.read_csv(p)"));
  CHECK_FALSE(call_named(m, "pd.read_csv")->resolved_qname.has_value());
}

TEST_CASE("a local name shadows a global import inside a function") {
  auto m = model_of(testing::NotebookBuilder().code("import pandas as pd\ndef f(pd):\n    return pd.read_csv(p)"));
  CHECK_FALSE(call_named(m, "pd.read_csv")->resolved_qname.has_value());
}

TEST_CASE("dotted module import resolves") {
  auto m = model_of(testing::NotebookBuilder().code("import numpy.random\nnumpy.random.seed(0)"));
  CHECK(call_named(m, "numpy.random.seed")->resolved_qname == "numpy.random.seed");
}

TEST_CASE("receiver typing follows the last writer") {
  auto typed = model_of(testing::NotebookBuilder()
                            .code("import pandas as pd\ndf = pd.read_csv(p)")
                            .code("df.dropna()\ndf = 3\ndf.dropna()"));
  std::vector<const CallSite *> drops;
  for (const auto &c : typed.calls)
    if (c.method_name == "dropna")
      drops.push_back(&c);
  REQUIRE(drops.size() == 2);
  CHECK(drops[0]->receiver_kb_type == "DataFrame");
  CHECK_FALSE(drops[1]->receiver_kb_type.has_value());
}

TEST_CASE("method results propagate one level") {
  auto m = model_of(testing::NotebookBuilder().code("import pandas as pd\na = pd.read_csv(p)\nb = a.copy()\nb.dropna()"));
  CHECK(call_named(m, "b.dropna")->receiver_kb_type == "DataFrame");
}

TEST_CASE("infer_types is idempotent and leaves untyped models unchanged") {
  auto raw = model_of(testing::NotebookBuilder().code("import pandas as pd\ndf = pd.read_csv(p)\ndf.dropna()"), false);
  auto once = infer_types(raw, default_kb());
  auto twice = infer_types(once, default_kb());
  CHECK(once.assignments.size() == twice.assignments.size());
  for (std::size_t i = 0; i < once.assignments.size(); ++i)
    CHECK(once.assignments[i].value_origin == twice.assignments[i].value_origin);
  for (std::size_t i = 0; i < once.calls.size(); ++i)
    CHECK(once.calls[i].receiver_kb_type == twice.calls[i].receiver_kb_type);

  auto plain = model_of(testing::NotebookBuilder().code("print(1)\nlen([])"), false);
  auto inferred = infer_types(plain, default_kb());
  for (std::size_t i = 0; i < plain.calls.size(); ++i)
    CHECK(plain.calls[i].receiver_kb_type == inferred.calls[i].receiver_kb_type);
}

TEST_CASE("scope_of finds the innermost function") {
  auto m = model_of(testing::NotebookBuilder().code("x = 1\ndef f():\n    y = 2\n    def g():\n        z = 3\n    return y\n"));
  REQUIRE(m.functions.size() == 2);
  CHECK(scope_of(m, {0, 1, 1}) == kGlobalScope);
  CHECK(scope_of(m, {0, 3, 5}) == m.functions[0].scope);
  CHECK(scope_of(m, {0, 5, 9}) == m.functions[1].scope);
  CHECK(scope_of(m, {0, 6, 5}) == m.functions[0].scope);
  CHECK_THROWS_AS(scope_of(m, {0, 40, 1}), std::out_of_range);
  CHECK_THROWS_AS(scope_of(m, {3, 1, 1}), std::out_of_range);
  CHECK(m.functions[1].qualified_name == "f.<locals>.g");
}

TEST_CASE("functions, parameters and locals") {
  auto m = model_of(testing::NotebookBuilder().code(
      "class A:\n    k = 1\n    def m(self, a, *rest, **kw):\n        global g\n        g = a\n        t = 1\n        for i in rest:\n            t += i\n        return t\n"));
  REQUIRE(m.functions.size() == 1);
  const auto &f = m.functions[0];
  CHECK(f.qualified_name == "A.m");
  CHECK(f.has_implicit_receiver);
  CHECK(f.parameters == std::vector<std::string>{"self", "a", "rest", "kw"});
  CHECK(f.variadic_parameters == std::set<std::string>{"rest", "kw"});
  CHECK(f.global_declarations == std::set<std::string>{"g"});
  CHECK(f.local_assigned_names.count("t"));
  CHECK(f.local_assigned_names.count("i"));
  REQUIRE(m.classes.size() == 1);
  auto g = std::find_if(m.assignments.begin(), m.assignments.end(), [](auto &a) { return a.target_name == "g"; });
  REQUIRE(g != m.assignments.end());
  CHECK(g->scope_id == kGlobalScope);
  CHECK(g->site_scope == f.scope);
  CHECK(std::none_of(m.assignments.begin(), m.assignments.end(), [](auto &a) { return a.target_name == "k"; }));
}

TEST_CASE("assignment kinds") {
  auto m = model_of(testing::NotebookBuilder().code("a = 1\na += 1\nfor b in c: pass\nwith o as d: pass\n(e, [f, *g]) = h\n"));
  auto kind_of = [&](const std::string &name) {
    for (const auto &a : m.assignments)
      if (a.target_name == name)
        return a.kind;
    FAIL("missing " << name);
    return AssignmentKind::Plain;
  };
  CHECK(kind_of("b") == AssignmentKind::ForTarget);
  CHECK(kind_of("d") == AssignmentKind::WithTarget);
  CHECK(kind_of("e") == AssignmentKind::Plain);
  CHECK(kind_of("g") == AssignmentKind::Plain);
  CHECK(std::count_if(m.assignments.begin(), m.assignments.end(),
                      [](auto &a) { return a.kind == AssignmentKind::Augmented; }) == 1);
}

TEST_CASE("call statement context") {
  auto m = model_of(testing::NotebookBuilder().code("df.dropna()\nx = df.fillna(0)\ndf.head()"));
  CHECK(call_named(m, "df.dropna")->is_expression_statement);
  CHECK_FALSE(call_named(m, "df.dropna")->is_cell_tail);
  CHECK_FALSE(call_named(m, "df.fillna")->is_expression_statement);
  CHECK(call_named(m, "df.head")->is_cell_tail);
  CHECK(call_named(m, "df.dropna")->receiver_name == "df");
}

TEST_CASE("keyword bookkeeping") {
  auto m = model_of(testing::NotebookBuilder().code("f(1, *a, inplace=False, k=2, **kw)"));
  const CallSite *c = call_named(m, "f");
  REQUIRE(c);
  CHECK(c->keyword_args == std::set<std::string>{"inplace", "k"});
  CHECK(c->false_literal_kwargs == std::set<std::string>{"inplace"});
  CHECK(c->has_kwargs_unpack);
  CHECK(c->has_star_args);
  CHECK(c->positional_count == 1);
}

TEST_CASE("magic lines introduce no entities") {
  auto with = model_of(testing::NotebookBuilder().code("%matplotlib inline\nimport os\n!ls\nos.getcwd()"));
  auto without = model_of(testing::NotebookBuilder().code("\nimport os\n\nos.getcwd()"));
  CHECK(with.imports.size() == without.imports.size());
  CHECK(with.calls.size() == without.calls.size());
  CHECK(with.assignments.size() == without.assignments.size());
  CHECK(with.calls[0].location == without.calls[0].location);
}

TEST_CASE("entity locations map into code cells") {
  auto nb = testing::NotebookBuilder()
                .markdown("m")
                .code("import os\nx = os.getcwd()")
                .markdown("n")
                .code("def f(a):\n    return a + x\nf(1)")
                .parse();
  auto m = model_of(nb);
  auto is_code = [&](const SourceLocation &l) {
    return l.cell_index >= 0 && static_cast<std::size_t>(l.cell_index) < nb.cells.size() &&
           nb.cells[l.cell_index].kind == CellKind::Code && l.line >= 1 &&
           static_cast<std::size_t>(l.line) <= nb.cells[l.cell_index].source_lines.size();
  };
  for (const auto &i : m.imports)
    CHECK(is_code(i.location));
  for (const auto &a : m.assignments)
    CHECK(is_code(a.location));
  for (const auto &r : m.reads)
    CHECK(is_code(r.location));
  for (const auto &c : m.calls)
    CHECK(is_code(c.location));
  for (const auto &f : m.functions)
    CHECK(is_code(f.location));
}
