#include "vespucci/code_model.hpp"

#include "notebook_builder.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace vespucci;

namespace {

const std::vector<std::string> kSnippets = {
    "import pandas as pd",
    "import numpy as np",
    "import os",
    "from sklearn.model_selection import train_test_split",
    "from sklearn.cluster import KMeans",
    "frame = pd.read_csv('data.csv')",
    "frame.dropna()",
    "frame = frame.fillna(0)",
    "print(frame.head())",
    "np.random.seed(3)",
    "noise = np.random.rand(4)",
    "parts = train_test_split(frame, random_state=1)",
    "parts = train_test_split(frame)",
    "model = KMeans()",
    "value = 3",
    "value = value + 1",
    "print(value)",
    "ab = 2",
    "for item in range(3):\n    total = item\nprint(total)",
    "def helper(a, b, c, d, e, f):\n    global value\n    return a",
    "merged = pd.merge(frame, frame)",
    "%matplotlib inline",
    "!ls",
    "",
};

testing::NotebookBuilder random_notebook(std::mt19937 &rng) {
  testing::NotebookBuilder nb;
  int cells = std::uniform_int_distribution<int>(1, 8)(rng);
  for (int c = 0; c < cells; ++c) {
    if (std::uniform_int_distribution<int>(0, 4)(rng) == 0) {
      nb.markdown("note " + std::to_string(c));
      continue;
    }
    int lines = std::uniform_int_distribution<int>(0, 5)(rng);
    std::string src;
    for (int l = 0; l < lines; ++l)
      src += (l ? "\n" : "") + kSnippets[std::uniform_int_distribution<std::size_t>(0, kSnippets.size() - 1)(rng)];
    nb.code(src, std::uniform_int_distribution<int>(1, 9)(rng));
  }
  return nb;
}

CodeModel model_of(const testing::NotebookBuilder &b) {
  auto nb = b.parse();
  auto program = build_program(nb);
  return infer_types(build_code_model(program.text, program.map, nb), default_kb());
}

std::multiset<std::string> entities(const CodeModel &m, int inserted) {
  auto loc = [&](const SourceLocation &l) {
    int cell = l.cell_index > inserted ? l.cell_index - 1 : l.cell_index;
    return std::to_string(cell) + ":" + std::to_string(l.line) + ":" + std::to_string(l.column);
  };
  std::multiset<std::string> out;
  for (const auto &i : m.imports)
    out.insert("import " + i.module_path + " " + i.bound_name() + " " + loc(i.location));
  for (const auto &a : m.assignments)
    out.insert("assign " + a.target_name + " " + std::string(to_string(a.kind)) + " " + loc(a.location) + " " +
               a.value_origin.value_or("-"));
  for (const auto &r : m.reads)
    out.insert("read " + r.name + " " + loc(r.location));
  for (const auto &c : m.calls)
    out.insert("call " + c.callee_display + " " + c.resolved_qname.value_or("-") + " " +
               c.receiver_kb_type.value_or("-") + " " + loc(c.location) + (c.is_cell_tail ? " tail" : ""));
  for (const auto &f : m.functions)
    out.insert("def " + f.qualified_name + " " + loc(f.location));
  return out;
}

} // namespace

TEST_CASE("markdown insertion only shifts cell indices of entities") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    auto nb = random_notebook(rng);
    auto base = model_of(nb);
    if (!base.analyzable)
      continue;
    auto before = entities(base, 1 << 20);
    std::size_t cells = nb.json()["cells"].size();
    std::size_t at = std::uniform_int_distribution<std::size_t>(0, cells)(rng);
    auto changed = nb;
    changed.insert_markdown(at, "inserted");
    auto after = model_of(changed);
    CHECK(after.analyzable);
    CHECK(entities(after, static_cast<int>(at)) == before);
  }
}

TEST_CASE("P1 and P6 never report a name that is read later") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    auto nb = random_notebook(rng);
    auto model = model_of(nb);
    if (!model.analyzable)
      continue;
    auto report = testing::lint(nb);
    for (const auto &v : report.violations) {
      if (v.rule_id != "P1" && v.rule_id != "P6")
        continue;
      auto open = v.message.find('\'');
      auto name = v.message.substr(open + 1, v.message.find('\'', open + 1) - open - 1);
      // A read on the binding's own line may be evaluated first (x = x + 1).
      std::pair<int, int> site{*v.cell_index, *v.line};
      for (const auto &r : model.reads) {
        if (r.name != name || !r.binding_scope.is_global())
          continue;
        INFO(nb.bytes());
        CHECK_FALSE(site < std::make_pair(r.location.cell_index, r.location.line));
      }
    }
  }
}

TEST_CASE("lint output is deterministic on random notebooks") {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    auto nb = random_notebook(rng);
    CHECK(testing::lint(nb) == testing::lint(nb));
  }
}

TEST_CASE("a threshold override only affects the rule that reads it") {
  std::mt19937 rng(17);
  auto strict = testing::default_settings();
  strict.config.max_parameters = 1;
  for (int trial = 0; trial < 200; ++trial) {
    auto nb = random_notebook(rng);
    auto base = testing::lint(nb);
    auto changed = testing::lint(nb, strict);
    auto without_p4 = [](std::vector<Violation> vs) {
      vs.erase(std::remove_if(vs.begin(), vs.end(), [](const Violation &v) { return v.rule_id == "P4"; }), vs.end());
      return vs;
    };
    CHECK(without_p4(base.violations) == without_p4(changed.violations));
    CHECK(testing::only(changed, "P4").size() >= testing::only(base, "P4").size());
  }
}

TEST_CASE("seeding earlier never adds M1 findings") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 200; ++trial) {
    auto nb = random_notebook(rng);
    auto seeded = testing::NotebookBuilder();
    seeded.json() = nb.json();
    auto &cells = seeded.json()["cells"];
    cells.insert(cells.begin(), nlohmann::json{{"cell_type", "code"},
                                               {"metadata", nlohmann::json::object()},
                                               {"outputs", nlohmann::json::array()},
                                               {"execution_count", nullptr},
                                               {"source", "import numpy\nnumpy.random.seed(0)"}});
    CHECK(testing::only(testing::lint(seeded), "M1").size() <= testing::only(testing::lint(nb), "M1").size());
  }
}
