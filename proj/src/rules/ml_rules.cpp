#include "vespucci/rule_engine.hpp"

#include <algorithm>

namespace vespucci {

namespace {

std::string short_name(const std::string &qname) {
  auto dot = qname.rfind('.');
  return dot == std::string::npos ? qname : qname.substr(dot + 1);
}

std::string join(const std::vector<std::string> &items) {
  std::string out;
  for (const auto &item : items)
    out += (out.empty() ? "" : ", ") + item;
  return out;
}

/// Keyword names plus parameters filled positionally, per the KB signature.
std::set<std::string> supplied_params(const CallSite &call, const ApiKnowledgeBase &kb, const std::string &key) {
  std::set<std::string> out = call.keyword_args;
  auto it = kb.positional_params.find(key);
  if (it != kb.positional_params.end()) {
    std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(call.positional_count), it->second.size());
    out.insert(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return out;
}

bool set_not_false(const CallSite &call, const std::set<std::string> &supplied, const std::string &name) {
  return supplied.count(name) && !call.false_literal_kwargs.count(name);
}

bool in_family(const ApiKnowledgeBase &kb, const std::string &qname) {
  return std::any_of(kb.global_seed_families.begin(), kb.global_seed_families.end(),
                     [&](const std::string &family) { return qname.rfind(family + ".", 0) == 0; });
}

void m1_uncontrolled_randomness(const AnalysisContext &ctx, RuleSink &out) {
  const ApiKnowledgeBase &kb = ctx.kb;
  std::vector<const CallSite *> calls;
  for (const auto &c : ctx.code.calls)
    calls.push_back(&c);
  std::sort(calls.begin(), calls.end(), [](auto *a, auto *b) { return a->order < b->order; });

  bool seeded = false;
  for (const CallSite *c : calls) {
    if (!c->resolved_qname)
      continue;
    const std::string &q = *c->resolved_qname;
    if (kb.global_seed_calls.count(q)) {
      seeded = true;
      continue;
    }
    if (c->has_kwargs_unpack)
      continue;

    auto seed = kb.seed_required.find(q);
    if (seed != kb.seed_required.end() && !seed->second.empty()) {
      auto cond = kb.seed_only_with.find(q);
      bool relevant = cond == kb.seed_only_with.end() || set_not_false(*c, c->keyword_args, cond->second);
      if (relevant && !c->keyword_args.count(seed->second))
        out.at("M1", c->location, short_name(q) + " is called without " + seed->second + ".",
               "Pass " + seed->second + "=<int> so results are reproducible.");
      continue;
    }

    if (seeded || !in_family(kb, q))
      continue;
    bool given_args = c->positional_count > 0 || c->has_star_args || !c->keyword_args.empty();
    if (kb.seedable_constructors.count(q) && given_args)
      continue;
    out.at("M1", c->location, q + " uses a random generator that is not seeded beforehand.",
           "Seed the generator first (e.g. numpy.random.seed) or use a seeded numpy.random.default_rng.");
  }
}

void m2_inplace_api_misuse(const AnalysisContext &ctx, RuleSink &out) {
  const ApiKnowledgeBase &kb = ctx.kb;
  for (const auto &c : ctx.code.calls) {
    if (!c.method_name || !c.is_expression_statement || c.is_cell_tail || c.has_kwargs_unpack)
      continue;
    if (set_not_false(c, c.keyword_args, "inplace"))
      continue;
    const std::string &method = *c.method_name;
    bool match = c.receiver_kb_type && kb.inplace_methods.count({*c.receiver_kb_type, method});
    if (!match && ctx.config.name_match_fallback)
      match = std::any_of(kb.inplace_methods.begin(), kb.inplace_methods.end(),
                          [&](const TypedMethod &m) { return m.second == method; });
    if (!match)
      continue;
    std::string receiver = c.receiver_name.value_or("df");
    out.at("M2", c.location, "The result of " + c.callee_display + "() is discarded, so the data is not modified.",
           "Assign the result (" + receiver + " = " + receiver + "." + method + "(...)) or pass inplace=True.");
  }
}

void m3_implicit_hyperparameters(const AnalysisContext &ctx, RuleSink &out) {
  const ApiKnowledgeBase &kb = ctx.kb;
  for (const auto &c : ctx.code.calls) {
    if (!c.resolved_qname || c.has_kwargs_unpack || c.has_star_args)
      continue;
    auto it = kb.key_hyperparams.find(*c.resolved_qname);
    if (it == kb.key_hyperparams.end())
      continue;
    auto supplied = supplied_params(c, kb, *c.resolved_qname);
    std::vector<std::string> missing;
    for (const auto &p : it->second)
      if (!supplied.count(p))
        missing.push_back(p);
    if (missing.empty())
      continue;
    out.at("M3", c.location,
           short_name(*c.resolved_qname) + " is created without explicit " + join(missing) + ".",
           "Set " + join(missing) + " explicitly instead of relying on library defaults.");
  }
}

void m4_columns_dtypes(const AnalysisContext &ctx, RuleSink &out) {
  const ApiKnowledgeBase &kb = ctx.kb;
  for (const auto &c : ctx.code.calls) {
    if (!c.resolved_qname || c.has_kwargs_unpack || !kb.loader_qnames.count(*c.resolved_qname))
      continue;
    auto supplied = supplied_params(c, kb, *c.resolved_qname);
    std::string name = short_name(*c.resolved_qname);
    if (!supplied.count("usecols"))
      out.at("M4.1", c.location, name + " loads data without selecting columns (usecols).",
             "Pass usecols with the columns the analysis needs.");
    if (!supplied.count("dtype"))
      out.at("M4.2", c.location, name + " loads data without declaring column types (dtype).",
             "Pass dtype so column types do not depend on inference.");
  }
}

void m5_merge_parameters(const AnalysisContext &ctx, RuleSink &out) {
  const ApiKnowledgeBase &kb = ctx.kb;
  for (const auto &c : ctx.code.calls) {
    if (c.has_kwargs_unpack || c.has_star_args)
      continue;
    std::string key;
    if (c.resolved_qname && kb.merge_functions.count(*c.resolved_qname))
      key = *c.resolved_qname;
    else if (c.receiver_kb_type && c.method_name && kb.merge_methods.count({*c.receiver_kb_type, *c.method_name}))
      key = *c.receiver_kb_type + "." + *c.method_name;
    else
      continue;

    auto supplied = supplied_params(c, kb, key);
    auto has = [&](const char *p) { return set_not_false(c, supplied, p); };
    bool how = has("how");
    bool keys = has("on") || ((has("left_on") || has("left_index")) && (has("right_on") || has("right_index")));
    if (!how || !keys) {
      std::vector<std::string> missing;
      if (!how)
        missing.push_back("how");
      if (!keys)
        missing.push_back("join keys (on, left_on/right_on or left_index/right_index)");
      std::string joined = missing.size() == 2 ? missing[0] + " and " + missing[1] : missing[0];
      out.at("M5.1", c.location, "merge does not specify " + joined + ".",
             "State the join type and the key columns explicitly.");
    }
    if (!supplied.count("validate"))
      out.at("M5.2", c.location, "merge does not specify validate.",
             "Pass validate (e.g. \"1:1\" or \"m:1\") to check the expected key relationship.");
  }
}

} // namespace

void register_ml_rules(RuleRegistry &r) {
  auto add = [&](const char *id, const char *description, RuleEvaluator eval, std::vector<std::string> subs = {}) {
    RuleInfo info;
    info.id = id;
    info.level = RuleLevel::ML;
    info.description = description;
    info.sub_ids = std::move(subs);
    r.register_rule(std::move(info), std::move(eval));
  };
  add("M1", "Randomness without a seed", m1_uncontrolled_randomness);
  add("M2", "Result of an in-place capable API discarded", m2_inplace_api_misuse);
  add("M3", "Key hyperparameters not set explicitly", m3_implicit_hyperparameters);
  add("M4", "Columns or dtypes not specified when loading data", m4_columns_dtypes, {"M4.1", "M4.2"});
  add("M5", "Merge without how/keys or validate", m5_merge_parameters, {"M5.1", "M5.2"});
}

} // namespace vespucci
