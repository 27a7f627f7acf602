// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.
#include "vespucci/analyzer.hpp"
#include "vespucci/errors.hpp"
#include "vespucci/program.hpp"
#include "vespucci/report.hpp"

#include "cli_harness.hpp"
#include "notebook_builder.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#ifndef VESPUCCI_FIXTURE_DIR
#error "VESPUCCI_FIXTURE_DIR must point at the fixture corpus"
#endif

namespace fs = std::filesystem;
using namespace vespucci;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

const fs::path kCorpus = fs::path(VESPUCCI_FIXTURE_DIR) / "corpus";

std::vector<fs::path> corpus_files() {
  std::vector<fs::path> files;
  for (const auto &entry : fs::directory_iterator(kCorpus))
    if (entry.path().extension() == ".ipynb")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::string opt(const std::optional<int> &v) { return v ? std::to_string(*v) : "-"; }

std::multiset<std::string> findings(const NotebookReport &report) {
  std::multiset<std::string> out;
  for (const auto &v : report.violations)
    out.insert(v.rule_id + " " + opt(v.cell_index) + " " + opt(v.line));
  return out;
}

std::multiset<std::string> expected_for(const fs::path &notebook) {
  fs::path file = notebook;
  file.replace_extension(".expected");
  std::multiset<std::string> out;
  std::istringstream in(testing::read_file(file));
  std::string line;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#')
      out.insert(line);
  return out;
}

std::string join(const std::multiset<std::string> &items) {
  std::string out;
  for (const auto &i : items)
    out += (out.empty() ? "" : ", ") + i;
  return "{" + out + "}";
}

Outcome fixture_corpus() {
  auto start = std::chrono::steady_clock::now();
  auto files = corpus_files();
  auto settings = testing::default_settings();
  Outcome o;
  std::set<std::string> covered;
  int clean = 0, rejected = 0, unparseable_code = 0;
  for (const auto &file : files) {
    auto expected = expected_for(file);
    std::multiset<std::string> actual;
    try {
      auto report = analyze_bytes(testing::read_file(file), file, settings, testing::registry());
      actual = findings(report);
      if (!report.analyzable_code)
        ++unparseable_code;
      if (report.violations.empty())
        ++clean;
    } catch (const IngestError &) {
      actual = {"error"};
      ++rejected;
    }
    for (const auto &e : expected)
      covered.insert(e.substr(0, e.find_first_of(". ")));
    if (actual != expected) {
      o.pass = false;
      o.detail += " " + file.filename().string() + ": expected " + join(expected) + " got " + join(actual) + ";";
    }
  }
  auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::vector<std::string> missing;
  for (const auto &info : testing::registry().catalog())
    if (!covered.count(info.id))
      missing.push_back(info.id);
  if (files.size() < 26) {
    o.pass = false;
    o.detail += " only " + std::to_string(files.size()) + " notebooks;";
  }
  if (!missing.empty()) {
    o.pass = false;
    o.detail += " no fixture for";
    for (const auto &m : missing)
      o.detail += " " + m;
    o.detail += ";";
  }
  if (clean == 0 || rejected == 0 || unparseable_code == 0) {
    o.pass = false;
    o.detail += " corpus lacks clean, rejected or unparseable-code notebooks;";
  }
  if (elapsed >= 5.0) {
    o.pass = false;
    o.detail += " took " + std::to_string(elapsed) + " s;";
  }
  std::ostringstream summary;
  summary << files.size() << " notebooks, " << covered.size() - covered.count("error") << " rules covered, " << clean
          << " clean, " << rejected << " rejected, " << unparseable_code << " with unparseable code, " << elapsed
          << " s";
  o.detail = summary.str() + (o.detail.empty() ? "" : ";" + o.detail);
  return o;
}

Outcome aggregation_math() {
  struct Case {
    const char *id;
    long long violations, notebooks;
    const char *pct, *per_nb;
  };
  const Case cases[] = {{"N3", 15527, 1931, "38.6", "8.04"},
                        {"P2", 14767, 2874, "57.5", "5.14"},
                        {"N2", 4951, 4951, "99.0", "1.00"}};
  Outcome o;
  for (const Case &c : cases) {
    std::vector<NotebookReport> reports;
    for (long long i = 0; i < c.notebooks; ++i) {
      long long share = c.violations / c.notebooks + (i < c.violations % c.notebooks ? 1 : 0);
      std::vector<Violation> found;
      for (long long k = 0; k < share; ++k) {
        Violation v;
        v.rule_id = c.id;
        v.cell_index = static_cast<int>(k);
        found.push_back(v);
      }
      reports.push_back(make_report("nb" + std::to_string(i) + ".ipynb", true, {}, std::move(found)));
    }
    auto rows = aggregate(reports, 5000);
    std::string got = rows.size() == 1 ? rows[0].pct_text() + "/" + rows[0].per_nb_text() : "no single row";
    o.detail += std::string(o.detail.empty() ? "" : ", ") + c.id + " " + got;
    if (rows.size() != 1 || rows[0].pct_text() != c.pct || rows[0].per_nb_text() != c.per_nb ||
        rows[0].num_violations != c.violations || rows[0].num_notebooks != c.notebooks) {
      o.pass = false;
      o.detail += std::string(" (expected ") + c.pct + "/" + c.per_nb + ")";
    }
  }
  return o;
}

Outcome threshold_boundaries() {
  auto count = [](const testing::NotebookBuilder &nb, const std::string &id) {
    return testing::only(testing::lint(nb), id).size();
  };
  auto params = [](int n) {
    std::string args, sum;
    for (int i = 0; i < n; ++i) {
      args += (i ? ", " : "") + std::string("arg") + std::to_string(i);
      sum += (i ? " + " : "") + std::string("arg") + std::to_string(i);
    }
    return testing::NotebookBuilder().markdown("m").code("def combine(" + args + "):\n    return " + sum);
  };
  auto locals = [](int n) {
    std::string body = "def compute():\n", names;
    for (int i = 0; i < n; ++i) {
      body += "    part" + std::to_string(i) + " = " + std::to_string(i) + "\n";
      names += (i ? ", " : "") + std::string("part") + std::to_string(i);
    }
    return testing::NotebookBuilder().markdown("m").code(body + "    return " + names);
  };
  auto cell_lines = [](int n) {
    std::string src;
    for (int i = 0; i < n; ++i)
      src += "print(" + std::to_string(i) + ")\n";
    return testing::NotebookBuilder().markdown("m").code(src);
  };
  auto code_cells = [](int n) {
    testing::NotebookBuilder nb;
    nb.markdown("m");
    for (int i = 0; i < n; ++i)
      nb.code("print(" + std::to_string(i) + ")");
    return nb;
  };
  struct Probe {
    const char *id;
    int threshold;
    std::function<testing::NotebookBuilder(int)> make;
  };
  const Probe probes[] = {{"P4", 5, params}, {"P8", 11, locals}, {"N4", 30, cell_lines}, {"N7", 50, code_cells}};
  Outcome o;
  for (const auto &p : probes) {
    auto at = count(p.make(p.threshold), p.id);
    auto above = count(p.make(p.threshold + 1), p.id);
    o.detail += std::string(o.detail.empty() ? "" : ", ") + p.id + " " + std::to_string(p.threshold) + "->" +
                std::to_string(at) + " " + std::to_string(p.threshold + 1) + "->" + std::to_string(above);
    if (at != 0 || above != 1)
      o.pass = false;
  }
  return o;
}

Outcome determinism() {
  const std::string dir = kCorpus.string();
  auto first = testing::run({"lint", "--format", "json", "--jobs", "1", dir});
  auto second = testing::run({"lint", "--format", "json", "--jobs", "1", dir});
  auto parallel = testing::run({"lint", "--format", "json", "--jobs", "8", dir});
  Outcome o;
  o.pass = first.out == second.out && first.out == parallel.out && first.err == parallel.err && !first.out.empty();
  o.detail = std::to_string(first.out.size()) + " bytes of JSON; repeat " +
             (first.out == second.out ? "identical" : "differs") + ", jobs 1 vs 8 " +
             (first.out == parallel.out ? "identical" : "differs");
  return o;
}

// Random notebook with up to 20 cells of up to 40 lines, mixing Python,
// magics, shell escapes, help queries and cell magics.
Notebook random_notebook(std::mt19937 &rng) {
  static const std::vector<std::string> pieces = {
      "x = 1", "print(x)", "%matplotlib inline", "!ls -la", "df?", "?len", "", "   ", "# comment",
      "  %time f()", "def f():", "    return 2", "a = [1,", "s = '''", "\t!echo hi", "y = x ?"};
  Notebook nb;
  nb.path = "random.ipynb";
  nb.name_stem = "random";
  int cells = std::uniform_int_distribution<int>(0, 20)(rng);
  for (int c = 0; c < cells; ++c) {
    Cell cell;
    cell.index = c;
    int kind = std::uniform_int_distribution<int>(0, 5)(rng);
    cell.kind = kind < 4 ? CellKind::Code : kind == 4 ? CellKind::Markdown : CellKind::Raw;
    int lines = std::uniform_int_distribution<int>(0, 40)(rng);
    bool cell_magic = std::uniform_int_distribution<int>(0, 7)(rng) == 0;
    for (int l = 0; l < lines; ++l) {
      if (l == 0 && cell_magic)
        cell.source_lines.push_back("%%bash");
      else
        cell.source_lines.push_back(pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)]);
    }
    nb.cells.push_back(std::move(cell));
  }
  return nb;
}

Outcome line_map_property() {
  std::mt19937 rng(20240611);
  const int trials = 1500;
  std::size_t lines_checked = 0;
  Outcome o;
  for (int t = 0; t < trials && o.pass; ++t) {
    Notebook nb = random_notebook(rng);
    Program program = build_program(nb);
    std::size_t code_lines = 0;
    for (const auto &cell : nb.cells) {
      if (cell.kind != CellKind::Code)
        continue;
      if (sanitize_cell_source(cell).size() != cell.source_lines.size()) {
        o.pass = false;
        o.detail = "sanitization changed the line count of cell " + std::to_string(cell.index);
      }
      for (int line = 1; line <= static_cast<int>(cell.source_lines.size()); ++line) {
        auto global = program.map.to_global(cell.index, line);
        if (!global || map_line(program.map, *global) != CellPosition{cell.index, line}) {
          o.pass = false;
          o.detail = "round trip failed at cell " + std::to_string(cell.index) + " line " + std::to_string(line);
        }
        ++lines_checked;
      }
      code_lines += cell.source_lines.size();
    }
    if (program.map.size() != code_lines) {
      o.pass = false;
      o.detail = "map has " + std::to_string(program.map.size()) + " lines, cells have " + std::to_string(code_lines);
    }
    for (std::size_t g = 0; g < program.map.size(); ++g)
      if (program.map.entries()[g].global_line != static_cast<int>(g + 1))
        o.pass = false;
    if (nb.cells.size() > 0 && program.map.size() > 0) {
      try {
        map_line(program.map, static_cast<int>(program.map.size()) + 1);
        o.pass = false;
        o.detail = "no error past the end of the map";
      } catch (const std::out_of_range &) {
      }
    }
  }
  if (o.pass)
    o.detail = std::to_string(trials) + " random notebooks, " + std::to_string(lines_checked) + " lines round-tripped";
  return o;
}

// P and M findings with the inserted cell undone.
std::multiset<std::string> code_findings(const NotebookReport &report, std::optional<int> inserted) {
  std::multiset<std::string> out;
  for (const auto &v : report.violations) {
    if (v.level == RuleLevel::Notebook)
      continue;
    int cell = v.cell_index.value_or(-1);
    if (inserted && cell > *inserted)
      --cell;
    out.insert(v.rule_id + " " + std::to_string(cell) + " " + opt(v.line) + " " + opt(v.column) + " " + v.message);
  }
  return out;
}

Outcome markdown_insertion() {
  auto settings = testing::default_settings();
  Outcome o;
  int notebooks = 0, insertions = 0;
  for (const auto &file : corpus_files()) {
    auto bytes = testing::read_file(file);
    nlohmann::json doc;
    try {
      doc = nlohmann::json::parse(bytes);
      parse_notebook(bytes, file);
    } catch (...) {
      continue;
    }
    if (doc.value("nbformat", 0) != 4)
      continue;
    ++notebooks;
    auto base = code_findings(analyze_bytes(bytes, file, settings, testing::registry()), std::nullopt);
    std::size_t cells = doc["cells"].size();
    for (std::size_t at = 0; at <= cells; ++at) {
      nlohmann::json changed = doc;
      changed["cells"].insert(changed["cells"].begin() + static_cast<std::ptrdiff_t>(at),
                              nlohmann::json{{"cell_type", "markdown"}, {"metadata", nlohmann::json::object()},
                                             {"source", "Inserted note.\n\n```python\nimport os\n```"}});
      auto report = analyze_bytes(changed.dump(), file, settings, testing::registry());
      ++insertions;
      if (code_findings(report, static_cast<int>(at)) != base) {
        o.pass = false;
        o.detail += " " + file.filename().string() + " at " + std::to_string(at) + ";";
      }
    }
  }
  std::string summary = std::to_string(notebooks) + " notebooks, " + std::to_string(insertions) + " insertions";
  o.detail = o.pass ? summary : summary + "; changed:" + o.detail;
  if (notebooks == 0)
    o.pass = false;
  return o;
}

Outcome robustness() {
  testing::TempDir dir;
  auto good = testing::NotebookBuilder().markdown("m").code("import pandas as pd\nprint(pd.__version__)", 1).bytes();
  dir.write("a_valid.ipynb", good);
  dir.write("b_malformed.ipynb", "{\"cells\": [ {\"cell_type\": ");
  dir.write("c_empty.ipynb", "");
  dir.write("d_legacy_v3.ipynb", testing::read_file(kCorpus / "nbformat3_legacy.ipynb"));
  dir.write("e_v2.ipynb", R"({"nbformat": 2, "nbformat_minor": 0, "worksheets": []})");
  dir.write("f_binary.ipynb", std::string("\x89PNG\r\n\x1a\n\0\0\xff", 12));
  dir.write("g_cells_not_list.ipynb", R"({"nbformat": 4, "nbformat_minor": 5, "metadata": {}, "cells": "oops"})");
  dir.write("h_deep.ipynb", std::string(100000, '[') + std::string(100000, ']'));
  std::string deep_python = std::string(3000, '(') + "1" + std::string(3000, ')');
  dir.write("i_deep_code.ipynb", testing::NotebookBuilder().markdown("m").code(deep_python).bytes());
  dir.write("j_bad_cell.ipynb",
            R"({"nbformat": 4, "nbformat_minor": 5, "metadata": {}, "cells": [{"cell_type": "code", "source": 7}]})");

  const std::set<std::string> bad = {"b_malformed", "c_empty",          "e_v2",   "f_binary",
                                     "g_cells_not_list", "h_deep", "j_bad_cell"};
  Outcome o;
  testing::CliResult r;
  try {
    r = testing::run({"lint", "--format", "json", "--jobs", "4", dir.path().string()});
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail = std::string("batch threw: ") + e.what();
    return o;
  }
  std::set<std::string> reported;
  try {
    for (const auto &rep : nlohmann::json::parse(r.out))
      reported.insert(fs::path(rep["notebook"].get<std::string>()).stem().string());
  } catch (const std::exception &e) {
    o.pass = false;
    o.detail = std::string("stdout is not JSON: ") + e.what();
    return o;
  }
  std::vector<std::string> problems;
  if (r.code != kExitError)
    problems.push_back("exit code " + std::to_string(r.code));
  for (const auto &name : bad)
    if (r.err.find(name + ".ipynb: error:") == std::string::npos)
      problems.push_back("no diagnostic for " + name);
  for (const char *name : {"a_valid", "d_legacy_v3", "i_deep_code"})
    if (!reported.count(name))
      problems.push_back(std::string("no report for ") + name);
  o.pass = problems.empty();
  o.detail = "exit " + std::to_string(r.code) + ", " + std::to_string(reported.size()) + " reports, " +
             std::to_string(bad.size()) + " rejected files";
  for (const auto &p : problems)
    o.detail += "; " + p;
  return o;
}

} // namespace

int main() {
  struct Criterion {
    const char *name;
    Outcome (*check)();
  };
  const Criterion criteria[] = {
      {"fixture corpus exactness", fixture_corpus},
      {"aggregation math", aggregation_math},
      {"threshold boundaries", threshold_boundaries},
      {"determinism", determinism},
      {"line-map property", line_map_property},
      {"markdown-insertion invariance", markdown_insertion},
      {"robustness", robustness},
  };
  int failed = 0;
  int n = 0;
  for (const auto &c : criteria) {
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception &e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << ++n << " " << c.name << ": " << o.detail << "\n";
  }
  std::cout << (n - failed) << "/" << n << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
