#pragma once

#include "vespucci/analyzer.hpp"
#include "vespucci/notebook.hpp"
#include "vespucci/report.hpp"

#include <json.hpp>

#include <algorithm>
#include <optional>
#include <string>
#include <vector>

namespace testing {

// Assembles nbformat 4 JSON in memory.
class NotebookBuilder {
public:
  NotebookBuilder() {
    doc_ = {{"nbformat", 4}, {"nbformat_minor", 5}, {"metadata", nlohmann::json::object()},
            {"cells", nlohmann::json::array()}};
  }

  NotebookBuilder &code(const std::string &source, std::optional<int> execution_count = std::nullopt) {
    nlohmann::json cell = {{"cell_type", "code"},
                           {"metadata", nlohmann::json::object()},
                           {"source", source},
                           {"outputs", nlohmann::json::array()}};
    cell["execution_count"] = execution_count ? nlohmann::json(*execution_count) : nlohmann::json(nullptr);
    cell["id"] = "cell-" + std::to_string(doc_["cells"].size());
    doc_["cells"].push_back(cell);
    return *this;
  }

  NotebookBuilder &markdown(const std::string &source) {
    doc_["cells"].push_back({{"cell_type", "markdown"},
                             {"metadata", nlohmann::json::object()},
                             {"source", source},
                             {"id", "cell-" + std::to_string(doc_["cells"].size())}});
    return *this;
  }

  NotebookBuilder &raw(const std::string &source) {
    doc_["cells"].push_back({{"cell_type", "raw"}, {"metadata", nlohmann::json::object()}, {"source", source}});
    return *this;
  }

  /// Inserts a markdown cell before position `at`.
  NotebookBuilder &insert_markdown(std::size_t at, const std::string &source) {
    auto &cells = doc_["cells"];
    nlohmann::json cell = {{"cell_type", "markdown"}, {"metadata", nlohmann::json::object()}, {"source", source}};
    cells.insert(cells.begin() + static_cast<std::ptrdiff_t>(std::min(at, cells.size())), cell);
    return *this;
  }

  std::string bytes() const { return doc_.dump(); }
  nlohmann::json &json() { return doc_; }

  vespucci::Notebook parse(const std::string &path = "analysis_notebook.ipynb") const {
    return vespucci::parse_notebook(bytes(), path);
  }

private:
  nlohmann::json doc_;
};

inline const vespucci::RuleRegistry &registry() {
  static const vespucci::RuleRegistry r = vespucci::builtin_registry();
  return r;
}

inline vespucci::Settings default_settings() {
  return vespucci::load_overrides(nullptr, registry().known_ids());
}

inline vespucci::NotebookReport lint(const NotebookBuilder &nb, const vespucci::Settings &settings = default_settings(),
                                     const std::string &path = "analysis_notebook.ipynb") {
  return vespucci::analyze_bytes(nb.bytes(), path, settings, registry());
}

/// Violations whose id is `id` or one of its sub-ids.
inline std::vector<vespucci::Violation> only(const vespucci::NotebookReport &report, const std::string &id) {
  std::vector<vespucci::Violation> out;
  for (const auto &v : report.violations)
    if (v.rule_id == id || v.rule_id.rfind(id + ".", 0) == 0)
      out.push_back(v);
  return out;
}

/// Lints a notebook whose single code cell holds `source`, keeping only `id`.
inline std::vector<vespucci::Violation> lint_code(const std::string &source, const std::string &id) {
  return only(lint(NotebookBuilder().markdown("# notes").code(source)), id);
}

} // namespace testing
