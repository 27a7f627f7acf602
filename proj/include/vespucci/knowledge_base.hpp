#pragma once

#include <json.hpp>

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace vespucci {

enum class Severity { Info, Warning, Error };

std::string_view to_string(Severity severity);
std::optional<Severity> parse_severity(std::string_view text);

struct RuleConfig {
  int max_parameters = 5;
  int max_locals = 11;
  int max_cell_lines = 30;
  int max_code_cells = 50;
  int min_name_length = 3;
  std::set<std::string> name_allowlist{"X", "y"};
  int min_filename_length = 2;
  /// Contents of a regex bracket expression listing the characters allowed in a notebook stem.
  std::string filename_pattern = "A-Za-z0-9_-";
  std::map<std::string, Severity> severity_overrides;
  std::set<std::string> disabled_rules;
  /// N8 reports every inversion instead of the first one.
  bool n8_per_inversion = false;
  /// M2 matches in-place methods by name alone, without a typed receiver.
  bool name_match_fallback = false;

  bool operator==(const RuleConfig &) const = default;
};

/// (type tag, method name), e.g. ("DataFrame", "dropna").
using TypedMethod = std::pair<std::string, std::string>;

struct ApiKnowledgeBase {
  /// Call qname -> seed keyword. An empty keyword marks members of a global-seed family.
  std::map<std::string, std::string> seed_required;
  /// Call qname -> keyword that must be present (and not literal False) before the seed matters.
  std::map<std::string, std::string> seed_only_with;
  /// Module prefixes whose functions draw from a global generator.
  std::set<std::string> global_seed_families;
  std::set<std::string> global_seed_calls;
  /// Generator constructors inside a global-seed family; seeded when given any argument.
  std::set<std::string> seedable_constructors;
  std::set<TypedMethod> inplace_methods;
  std::map<std::string, std::set<std::string>> key_hyperparams;
  /// Parameters that may be passed positionally, in order. Keys are qnames or "Type.method".
  std::map<std::string, std::vector<std::string>> positional_params;
  std::set<std::string> loader_qnames;
  std::set<std::string> merge_functions;
  std::set<TypedMethod> merge_methods;
  /// Call qname or "Type.method" -> type tag of the returned value.
  std::map<std::string, std::string> return_types;

  bool operator==(const ApiKnowledgeBase &) const = default;
};

RuleConfig default_config();
ApiKnowledgeBase default_kb();

struct Settings {
  RuleConfig config;
  ApiKnowledgeBase kb;
};

/// Applies a config document on top of the defaults. Rule ids in
/// disabled_rules and severity_overrides must appear in known_rule_ids.
/// Throws ConfigError.
Settings load_overrides(const nlohmann::json &doc, const std::set<std::string> &known_rule_ids);

nlohmann::json kb_to_json(const ApiKnowledgeBase &kb);
nlohmann::json config_to_json(const RuleConfig &config);

} // namespace vespucci
