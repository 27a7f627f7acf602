#include "vespucci/knowledge_base.hpp"

#include "vespucci/errors.hpp"

#include <regex>
#include <type_traits>

namespace vespucci {

using nlohmann::json;

std::string_view to_string(Severity severity) {
  switch (severity) {
  case Severity::Info:
    return "info";
  case Severity::Warning:
    return "warning";
  case Severity::Error:
    return "error";
  }
  return "warning";
}

std::optional<Severity> parse_severity(std::string_view text) {
  if (text == "info")
    return Severity::Info;
  if (text == "warning")
    return Severity::Warning;
  if (text == "error")
    return Severity::Error;
  return std::nullopt;
}

RuleConfig default_config() { return RuleConfig{}; }

ApiKnowledgeBase default_kb() {
  ApiKnowledgeBase kb;

  kb.seed_required = {
      // sklearn.model_selection.train_test_split(*arrays, random_state=None, ...)
      {"sklearn.model_selection.train_test_split", "random_state"},
      // sklearn.model_selection.KFold(n_splits=5, *, shuffle=False, random_state=None)
      {"sklearn.model_selection.KFold", "random_state"},
      // sklearn.model_selection.StratifiedKFold, same signature as KFold
      {"sklearn.model_selection.StratifiedKFold", "random_state"},
      // sklearn.model_selection.ShuffleSplit(n_splits=10, *, ..., random_state=None)
      {"sklearn.model_selection.ShuffleSplit", "random_state"},
      // sklearn.ensemble.RandomForestClassifier / RandomForestRegressor(..., random_state=None)
      {"sklearn.ensemble.RandomForestClassifier", "random_state"},
      {"sklearn.ensemble.RandomForestRegressor", "random_state"},
      // sklearn.tree.DecisionTreeClassifier / DecisionTreeRegressor(..., random_state=None)
      {"sklearn.tree.DecisionTreeClassifier", "random_state"},
      {"sklearn.tree.DecisionTreeRegressor", "random_state"},
      // sklearn.cluster.KMeans(n_clusters=8, *, ..., random_state=None)
      {"sklearn.cluster.KMeans", "random_state"},
      // numpy.random.shuffle(x), numpy.random.permutation(x): global generator
      {"numpy.random.shuffle", ""},
      {"numpy.random.permutation", ""},
  };
  // KFold ignores random_state unless shuffle is enabled.
  kb.seed_only_with = {
      {"sklearn.model_selection.KFold", "shuffle"},
      {"sklearn.model_selection.StratifiedKFold", "shuffle"},
  };
  kb.global_seed_families = {"numpy.random"};
  // numpy.random.seed(seed), random.seed(a)
  kb.global_seed_calls = {"numpy.random.seed", "random.seed"};
  // numpy.random.default_rng(seed), RandomState(seed), SeedSequence(entropy), bit generators
  kb.seedable_constructors = {
      "numpy.random.default_rng", "numpy.random.RandomState", "numpy.random.SeedSequence",
      "numpy.random.Generator",   "numpy.random.PCG64",       "numpy.random.PCG64DXSM",
      "numpy.random.MT19937",     "numpy.random.Philox",      "numpy.random.SFC64",
  };

  // pandas.DataFrame methods taking inplace=False and returning a new frame
  for (const char *method : {"dropna", "fillna", "drop", "sort_values", "reset_index", "rename", "replace"})
    kb.inplace_methods.insert({"DataFrame", method});

  kb.key_hyperparams = {
      {"sklearn.cluster.KMeans", {"n_clusters", "n_init"}},
      {"sklearn.ensemble.RandomForestClassifier", {"n_estimators", "max_depth"}},
      {"sklearn.ensemble.RandomForestRegressor", {"n_estimators", "max_depth"}},
      {"sklearn.linear_model.LogisticRegression", {"C", "max_iter"}},
      {"sklearn.svm.SVC", {"C", "kernel"}},
  };
  kb.positional_params = {
      // KMeans(n_clusters=8, *, ...)
      {"sklearn.cluster.KMeans", {"n_clusters"}},
      // RandomForest*(n_estimators=100, *, ...)
      {"sklearn.ensemble.RandomForestClassifier", {"n_estimators"}},
      {"sklearn.ensemble.RandomForestRegressor", {"n_estimators"}},
      // LogisticRegression(penalty='l2', *, ...)
      {"sklearn.linear_model.LogisticRegression", {"penalty"}},
      // pandas.merge(left, right, how, on, left_on, right_on, left_index, right_index, ...)
      {"pandas.merge", {"left", "right", "how", "on", "left_on", "right_on", "left_index", "right_index"}},
      // DataFrame.merge(right, how, on, left_on, right_on, left_index, right_index, ...)
      {"DataFrame.merge", {"right", "how", "on", "left_on", "right_on", "left_index", "right_index"}},
  };

  // pandas.read_csv / read_table(filepath_or_buffer, *, usecols=None, dtype=None, ...)
  kb.loader_qnames = {"pandas.read_csv", "pandas.read_table"};
  kb.merge_functions = {"pandas.merge"};
  kb.merge_methods = {{"DataFrame", "merge"}};

  kb.return_types = {
      {"pandas.read_csv", "DataFrame"},
      {"pandas.read_table", "DataFrame"},
      {"pandas.read_excel", "DataFrame"},
      {"pandas.read_parquet", "DataFrame"},
      {"pandas.DataFrame", "DataFrame"},
      {"pandas.merge", "DataFrame"},
      {"DataFrame.merge", "DataFrame"},
      {"DataFrame.copy", "DataFrame"},
  };
  for (const auto &[type, method] : kb.inplace_methods)
    kb.return_types[type + "." + method] = type;
  return kb;
}

namespace {

[[noreturn]] void mismatch(const std::string &key, const char *expected) {
  throw ConfigError(ConfigError::Kind::TypeMismatch, "config key '" + key + "' must be " + expected);
}

template <typename T> struct is_map : std::false_type {};
template <typename V> struct is_map<std::map<std::string, V>> : std::true_type {};

template <typename T> T parse_value(const json &v, const std::string &key) {
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean())
      mismatch(key, "a boolean");
    return v.get<bool>();
  } else if constexpr (std::is_same_v<T, int>) {
    if (!v.is_number_integer())
      mismatch(key, "an integer");
    auto value = v.get<long long>();
    if (value <= 0 || value > 1'000'000)
      throw ConfigError(ConfigError::Kind::InvalidValue, "config key '" + key + "' must be a positive integer");
    return static_cast<int>(value);
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string())
      mismatch(key, "a string");
    return v.get<std::string>();
  } else if constexpr (std::is_same_v<T, std::set<std::string>> || std::is_same_v<T, std::vector<std::string>>) {
    if (!v.is_array())
      mismatch(key, "an array of strings");
    T out;
    for (const auto &item : v) {
      if (!item.is_string())
        mismatch(key, "an array of strings");
      out.insert(out.end(), item.get<std::string>());
    }
    return out;
  } else if constexpr (std::is_same_v<T, std::set<TypedMethod>>) {
    if (!v.is_array())
      mismatch(key, "an array of \"Type.method\" strings");
    T out;
    for (const auto &item : v) {
      if (!item.is_string())
        mismatch(key, "an array of \"Type.method\" strings");
      auto text = item.get<std::string>();
      auto dot = text.find('.');
      if (dot == std::string::npos || dot == 0 || dot + 1 == text.size())
        throw ConfigError(ConfigError::Kind::InvalidValue,
                          "config key '" + key + "': expected \"Type.method\", got \"" + text + "\"");
      out.insert({text.substr(0, dot), text.substr(dot + 1)});
    }
    return out;
  } else {
    static_assert(is_map<T>::value);
    if (!v.is_object())
      mismatch(key, "an object");
    T out;
    for (const auto &[k, item] : v.items())
      out[k] = parse_value<typename T::mapped_type>(item, key + "." + k);
    return out;
  }
}

template <typename T> void merge_into(T &dst, T src, bool replace) {
  if (replace) {
    dst = std::move(src);
  } else if constexpr (is_map<T>::value) {
    for (auto &[k, v] : src)
      dst[k] = std::move(v);
  } else {
    dst.insert(src.begin(), src.end());
  }
}

void apply_kb(const json &doc, ApiKnowledgeBase &kb) {
  if (!doc.is_object())
    mismatch("kb", "an object");
  std::set<std::string> replace;
  if (doc.contains("replace"))
    replace = parse_value<std::set<std::string>>(doc["replace"], "kb.replace");

  std::set<std::string> seen;
  auto field = [&](const char *name, auto &dst) {
    seen.insert(name);
    if (!doc.contains(name))
      return;
    using T = std::decay_t<decltype(dst)>;
    merge_into(dst, parse_value<T>(doc[name], std::string("kb.") + name), replace.count(name) > 0);
  };
  field("seed_required", kb.seed_required);
  field("seed_only_with", kb.seed_only_with);
  field("global_seed_families", kb.global_seed_families);
  field("global_seed_calls", kb.global_seed_calls);
  field("seedable_constructors", kb.seedable_constructors);
  field("inplace_methods", kb.inplace_methods);
  field("key_hyperparams", kb.key_hyperparams);
  field("positional_params", kb.positional_params);
  field("loader_qnames", kb.loader_qnames);
  field("merge_functions", kb.merge_functions);
  field("merge_methods", kb.merge_methods);
  field("return_types", kb.return_types);

  for (const auto &[key, _] : doc.items())
    if (key != "replace" && !seen.count(key))
      throw ConfigError(ConfigError::Kind::UnknownKey, "unknown config key 'kb." + key + "'");
  for (const auto &name : replace)
    if (!seen.count(name))
      throw ConfigError(ConfigError::Kind::UnknownKey, "unknown kb field in replace: '" + name + "'");
}

void check_rule_id(const std::string &id, const std::set<std::string> &known) {
  if (!known.count(id))
    throw ConfigError(ConfigError::Kind::UnknownRuleId, "unknown rule id '" + id + "'");
}

json typed_methods_json(const std::set<TypedMethod> &methods) {
  json out = json::array();
  for (const auto &[type, method] : methods)
    out.push_back(type + "." + method);
  return out;
}

} // namespace

Settings load_overrides(const json &doc, const std::set<std::string> &known_rule_ids) {
  Settings s{default_config(), default_kb()};
  if (doc.is_null())
    return s;
  if (!doc.is_object())
    throw ConfigError(ConfigError::Kind::TypeMismatch, "config document must be a JSON object");

  RuleConfig &c = s.config;
  for (const auto &[key, value] : doc.items()) {
    if (key == "max_parameters")
      c.max_parameters = parse_value<int>(value, key);
    else if (key == "max_locals")
      c.max_locals = parse_value<int>(value, key);
    else if (key == "max_cell_lines")
      c.max_cell_lines = parse_value<int>(value, key);
    else if (key == "max_code_cells")
      c.max_code_cells = parse_value<int>(value, key);
    else if (key == "min_name_length")
      c.min_name_length = parse_value<int>(value, key);
    else if (key == "min_filename_length")
      c.min_filename_length = parse_value<int>(value, key);
    else if (key == "name_allowlist")
      c.name_allowlist = parse_value<std::set<std::string>>(value, key);
    else if (key == "filename_pattern") {
      c.filename_pattern = parse_value<std::string>(value, key);
      try {
        std::regex probe("[^" + c.filename_pattern + "]");
      } catch (const std::regex_error &) {
        throw ConfigError(ConfigError::Kind::InvalidValue,
                          "filename_pattern is not a valid character class: " + c.filename_pattern);
      }
    } else if (key == "severity_overrides") {
      for (const auto &[id, sev] : parse_value<std::map<std::string, std::string>>(value, key)) {
        check_rule_id(id, known_rule_ids);
        auto parsed = parse_severity(sev);
        if (!parsed)
          throw ConfigError(ConfigError::Kind::InvalidValue,
                            "severity for " + id + " must be info, warning or error");
        c.severity_overrides[id] = *parsed;
      }
    } else if (key == "disabled_rules") {
      c.disabled_rules = parse_value<std::set<std::string>>(value, key);
      for (const auto &id : c.disabled_rules)
        check_rule_id(id, known_rule_ids);
    } else if (key == "n8_per_inversion")
      c.n8_per_inversion = parse_value<bool>(value, key);
    else if (key == "name_match_fallback")
      c.name_match_fallback = parse_value<bool>(value, key);
    else if (key == "kb")
      apply_kb(value, s.kb);
    else
      throw ConfigError(ConfigError::Kind::UnknownKey, "unknown config key '" + key + "'");
  }
  return s;
}

json kb_to_json(const ApiKnowledgeBase &kb) {
  json out;
  out["seed_required"] = kb.seed_required;
  out["seed_only_with"] = kb.seed_only_with;
  out["global_seed_families"] = kb.global_seed_families;
  out["global_seed_calls"] = kb.global_seed_calls;
  out["seedable_constructors"] = kb.seedable_constructors;
  out["inplace_methods"] = typed_methods_json(kb.inplace_methods);
  out["key_hyperparams"] = kb.key_hyperparams;
  out["positional_params"] = kb.positional_params;
  out["loader_qnames"] = kb.loader_qnames;
  out["merge_functions"] = kb.merge_functions;
  out["merge_methods"] = typed_methods_json(kb.merge_methods);
  out["return_types"] = kb.return_types;
  return out;
}

json config_to_json(const RuleConfig &c) {
  json out;
  out["max_parameters"] = c.max_parameters;
  out["max_locals"] = c.max_locals;
  out["max_cell_lines"] = c.max_cell_lines;
  out["max_code_cells"] = c.max_code_cells;
  out["min_name_length"] = c.min_name_length;
  out["name_allowlist"] = c.name_allowlist;
  out["min_filename_length"] = c.min_filename_length;
  out["filename_pattern"] = c.filename_pattern;
  json sev = json::object();
  for (const auto &[id, s] : c.severity_overrides)
    sev[id] = std::string(to_string(s));
  out["severity_overrides"] = sev;
  out["disabled_rules"] = c.disabled_rules;
  out["n8_per_inversion"] = c.n8_per_inversion;
  out["name_match_fallback"] = c.name_match_fallback;
  return out;
}

} // namespace vespucci
