#pragma once

#include "vespucci/knowledge_base.hpp"
#include "vespucci/notebook.hpp"
#include "vespucci/report.hpp"
#include "vespucci/rule_engine.hpp"

#include <filesystem>
#include <string_view>

namespace vespucci {

/// Runs model building and all enabled rules on a parsed notebook.
NotebookReport analyze_notebook(const Notebook &nb, const Settings &settings, const RuleRegistry &registry);

/// Full pipeline from raw file bytes. Throws IngestError.
NotebookReport analyze_bytes(std::string_view bytes, const std::filesystem::path &path, const Settings &settings,
                             const RuleRegistry &registry);

/// Reads a JSON config file and applies it over the defaults. Throws ConfigError.
Settings load_config_file(const std::filesystem::path &path, const RuleRegistry &registry);

} // namespace vespucci
