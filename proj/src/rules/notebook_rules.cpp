#include "vespucci/rule_engine.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

namespace vespucci {

namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

bool is_blank_line(const std::string &line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

void n1_notebook_naming(const AnalysisContext &ctx, RuleSink &out) {
  const std::string &stem = ctx.notebook.name_stem;
  const RuleConfig &cfg = ctx.config;
  if (codepoint_length(stem) <= static_cast<std::size_t>(cfg.min_filename_length))
    out.notebook("N1.1", "Notebook name '" + stem + "' is too short.",
                 "Use a file name longer than " + std::to_string(cfg.min_filename_length) + " characters.");
  if (std::regex_search(stem, std::regex("[^" + cfg.filename_pattern + "]")))
    out.notebook("N1.2", "Notebook name '" + stem + "' contains characters outside [" + cfg.filename_pattern + "].",
                 "Use only letters, digits, hyphens and underscores.");
  if (lower(stem).find("untitled") != std::string::npos)
    out.notebook("N1.3", "Notebook name '" + stem + "' still contains 'Untitled'.",
                 "Rename the notebook after its content.");
}

const std::regex &load_ext_watermark() {
  static const std::regex re(R"(^\s*%load_ext\s+watermark\b)");
  return re;
}

const std::regex &raw_watermark_import() {
  static const std::regex re(R"(^\s*(import\s+watermark\b|from\s+watermark\b))");
  return re;
}

void n2_version_control(const AnalysisContext &ctx, RuleSink &out) {
  const Notebook &nb = ctx.notebook;
  if (nb.code_cell_count() == 0)
    return;
  bool documented = false;
  for (const auto &cell : nb.cells) {
    if (cell.kind != CellKind::Code)
      continue;
    for (const auto &line : cell.source_lines) {
      if (std::regex_search(line, load_ext_watermark()))
        documented = true;
      else if (!ctx.code.analyzable &&
               (line.find("__version__") != std::string::npos || std::regex_search(line, raw_watermark_import())))
        documented = true;
    }
  }
  if (ctx.code.analyzable) {
    const CodeModel &code = ctx.code;
    documented = documented ||
                 std::any_of(code.attribute_reads.begin(), code.attribute_reads.end(),
                             [](const AttributeRead &a) { return a.attribute == "__version__"; }) ||
                 std::any_of(code.imports.begin(), code.imports.end(), [](const ImportStmt &i) {
                   return i.module_path == "watermark" || i.module_path.rfind("watermark.", 0) == 0;
                 });
  }
  if (!documented)
    out.notebook("N2", "The notebook never records the versions of the libraries it uses.",
                 "Print package.__version__ for key libraries or use the watermark extension.");
}

void n3_imports_at_top(const AnalysisContext &ctx, RuleSink &out) {
  int anchor = -1;
  for (const auto &cell : ctx.notebook.cells) {
    if (cell.kind == CellKind::Code && !cell.is_blank()) {
      anchor = cell.index;
      break;
    }
  }
  for (const auto &imp : ctx.code.imports) {
    if (imp.location.cell_index == anchor)
      continue;
    std::string what = imp.module_path + (imp.is_star ? ".*" : imp.imported_symbol ? "." + *imp.imported_symbol : "");
    out.at("N3", imp.location, "Import of '" + what + "' is outside the first code cell.",
           "Move all imports into the first code cell.");
  }
}

void n4_long_code_cells(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &cell : ctx.notebook.cells) {
    if (cell.kind != CellKind::Code)
      continue;
    auto lines = std::count_if(cell.source_lines.begin(), cell.source_lines.end(),
                               [](const std::string &l) { return !is_blank_line(l); });
    if (lines <= ctx.config.max_cell_lines)
      continue;
    out.at_cell("N4", cell.index,
                "Code cell has " + std::to_string(lines) + " non-blank lines (limit " +
                    std::to_string(ctx.config.max_cell_lines) + ").",
                "Split the cell into smaller cells or move logic into functions.");
  }
}

void n5_empty_code_cells(const AnalysisContext &ctx, RuleSink &out) {
  for (const auto &cell : ctx.notebook.cells)
    if (cell.kind == CellKind::Code && cell.is_blank())
      out.at_cell("N5", cell.index, "Code cell is empty.", "Delete the empty cell.");
}

void n6_missing_text_cells(const AnalysisContext &ctx, RuleSink &out) {
  if (ctx.notebook.markdown_cell_count() == 0)
    out.notebook("N6", "The notebook has no Markdown cells.",
                 "Add Markdown cells that explain the purpose and steps of the analysis.");
}

void n7_notebook_too_long(const AnalysisContext &ctx, RuleSink &out) {
  auto count = ctx.notebook.code_cell_count();
  if (count > static_cast<std::size_t>(ctx.config.max_code_cells))
    out.notebook("N7",
                 "The notebook has " + std::to_string(count) + " code cells (limit " +
                     std::to_string(ctx.config.max_code_cells) + ").",
                 "Split the notebook or move reusable code into modules.");
}

void n8_nonlinear_execution(const AnalysisContext &ctx, RuleSink &out) {
  std::optional<std::int64_t> previous;
  for (const auto &cell : ctx.notebook.cells) {
    if (cell.kind != CellKind::Code || !cell.execution_count)
      continue;
    std::int64_t count = *cell.execution_count;
    if (previous && count <= *previous) {
      out.at_cell("N8", cell.index,
                  "Execution count " + std::to_string(count) + " does not increase after " +
                      std::to_string(*previous) + "; cells were run out of order.",
                  "Restart the kernel and run all cells from top to bottom.");
      if (!ctx.config.n8_per_inversion)
        return;
    }
    previous = count;
  }
}

} // namespace

void register_notebook_rules(RuleRegistry &r) {
  auto add = [&](const char *id, const char *description, RuleEvaluator eval, bool notebook_scoped,
                 bool needs_code = false, std::vector<std::string> subs = {},
                 std::function<std::string(const RuleConfig &)> thresholds = {}) {
    RuleInfo info;
    info.id = id;
    info.level = RuleLevel::Notebook;
    info.description = description;
    info.notebook_scoped = notebook_scoped;
    info.needs_code = needs_code;
    info.sub_ids = std::move(subs);
    info.thresholds = std::move(thresholds);
    r.register_rule(std::move(info), std::move(eval));
  };
  add("N1", "Notebook naming: too short, unusual characters, or 'Untitled'", n1_notebook_naming, true, false,
      {"N1.1", "N1.2", "N1.3"}, [](const RuleConfig &c) {
        return "min_filename_length=" + std::to_string(c.min_filename_length) +
               " filename_pattern=" + c.filename_pattern;
      });
  add("N2", "No library version information recorded", n2_version_control, true);
  add("N3", "Import outside the first code cell", n3_imports_at_top, false, true);
  add("N4", "Long code cell", n4_long_code_cells, false, false, {},
      [](const RuleConfig &c) { return "max_cell_lines=" + std::to_string(c.max_cell_lines); });
  add("N5", "Empty code cell", n5_empty_code_cells, false);
  add("N6", "No Markdown cells", n6_missing_text_cells, true);
  add("N7", "Too many code cells", n7_notebook_too_long, true, false, {},
      [](const RuleConfig &c) { return "max_code_cells=" + std::to_string(c.max_code_cells); });
  add("N8", "Cells executed out of order", n8_nonlinear_execution, false, false, {},
      [](const RuleConfig &c) { return std::string("n8_per_inversion=") + (c.n8_per_inversion ? "true" : "false"); });
}

} // namespace vespucci
