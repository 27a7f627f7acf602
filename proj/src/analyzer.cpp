#include "vespucci/analyzer.hpp"

#include "vespucci/code_model.hpp"
#include "vespucci/errors.hpp"
#include "vespucci/program.hpp"

#include <fstream>
#include <sstream>

namespace vespucci {

NotebookReport analyze_notebook(const Notebook &nb, const Settings &settings, const RuleRegistry &registry) {
  Program program = build_program(nb);
  CodeModel code = build_code_model(program.text, program.map, nb);
  if (code.analyzable)
    code = infer_types(std::move(code), settings.kb);

  AnalysisContext ctx{nb, code, program.map, settings.config, settings.kb};
  RunResult run = registry.run_all(ctx);

  std::vector<std::string> diagnostics = nb.warnings;
  diagnostics.insert(diagnostics.end(), code.parse_diagnostics.begin(), code.parse_diagnostics.end());
  diagnostics.insert(diagnostics.end(), run.diagnostics.begin(), run.diagnostics.end());
  return make_report(nb.path.generic_string(), code.analyzable, std::move(diagnostics), std::move(run.violations));
}

NotebookReport analyze_bytes(std::string_view bytes, const std::filesystem::path &path, const Settings &settings,
                             const RuleRegistry &registry) {
  return analyze_notebook(parse_notebook(bytes, path), settings, registry);
}

Settings load_config_file(const std::filesystem::path &path, const RuleRegistry &registry) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw ConfigError(ConfigError::Kind::InvalidValue, "cannot read config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error &e) {
    throw ConfigError(ConfigError::Kind::InvalidValue, "config file " + path.string() + " is not valid JSON: " + e.what());
  }
  return load_overrides(doc, registry.known_ids());
}

} // namespace vespucci
