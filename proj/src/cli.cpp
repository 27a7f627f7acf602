#include "vespucci/cli.hpp"

#include "vespucci/analyzer.hpp"
#include "vespucci/errors.hpp"
#include "vespucci/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

namespace vespucci {

namespace fs = std::filesystem;

namespace {

struct LintOptions {
  std::vector<std::string> paths;
  std::string config;
  std::string format = "text";
  bool format_given = false;
  std::string out_dir;
  bool recursive = false;
  int jobs = 0;
  std::vector<std::string> disable;
  bool name_match_fallback = false;
};

struct SettingsOptions {
  std::string config;
  std::vector<std::string> disable;
};

std::optional<std::string> read_file(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    return std::nullopt;
  std::stringstream buffer;
  buffer << in.rdbuf();
  if (in.bad())
    return std::nullopt;
  return buffer.str();
}

// Config from --config, else $VESPUCCI_CONFIG, else defaults; then --disable.
Settings resolve_settings(const std::string &config_path, const std::vector<std::string> &disable,
                          const RuleRegistry &registry) {
  std::string path = config_path;
  if (path.empty())
    if (const char *env = std::getenv("VESPUCCI_CONFIG"))
      path = env;
  Settings s = path.empty() ? load_overrides(nullptr, registry.known_ids()) : load_config_file(path, registry);
  auto known = registry.known_ids();
  for (const auto &id : disable) {
    if (!known.count(id))
      throw ConfigError(ConfigError::Kind::UnknownRuleId, "unknown rule id '" + id + "'");
    s.config.disabled_rules.insert(id);
  }
  return s;
}

std::vector<fs::path> discover(const std::vector<std::string> &inputs, bool recursive, std::ostream &err,
                               bool &failed) {
  std::vector<fs::path> files;
  for (const auto &input : inputs) {
    fs::path p(input);
    std::error_code ec;
    if (fs::is_directory(p, ec)) {
      auto consider = [&](const fs::directory_entry &entry) {
        std::error_code fec;
        if (entry.is_regular_file(fec) && entry.path().extension() == ".ipynb")
          files.push_back(entry.path());
      };
      if (recursive) {
        fs::recursive_directory_iterator it(p, fs::directory_options::skip_permission_denied, ec), end;
        for (; !ec && it != end; it.increment(ec)) {
          if (it->is_directory() && it->path().filename() == ".ipynb_checkpoints") {
            it.disable_recursion_pending();
            continue;
          }
          consider(*it);
        }
      } else {
        fs::directory_iterator it(p, ec), end;
        for (; !ec && it != end; it.increment(ec))
          consider(*it);
      }
      if (ec) {
        err << input << ": error: " << ec.message() << "\n";
        failed = true;
      }
    } else if (fs::exists(p, ec)) {
      files.push_back(p);
    } else {
      err << input << ": error: no such file or directory\n";
      failed = true;
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path &a, const fs::path &b) { return a.generic_string() < b.generic_string(); });
  files.erase(std::unique(files.begin(), files.end(),
                          [](const fs::path &a, const fs::path &b) { return a.generic_string() == b.generic_string(); }),
              files.end());
  return files;
}

struct Outcome {
  std::optional<NotebookReport> report;
  std::string error;
};

Outcome lint_one(const fs::path &path, const Settings &settings, const RuleRegistry &registry) {
  Outcome o;
  auto bytes = read_file(path);
  if (!bytes) {
    o.error = "cannot read file";
    return o;
  }
  try {
    o.report = analyze_bytes(*bytes, path, settings, registry);
  } catch (const IngestError &e) {
    o.error = e.what();
  } catch (const std::exception &e) {
    o.error = std::string("internal error: ") + e.what();
  }
  return o;
}

std::vector<Outcome> lint_all(const std::vector<fs::path> &files, const Settings &settings,
                              const RuleRegistry &registry, int jobs) {
  std::vector<Outcome> outcomes(files.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++)
      outcomes[i] = lint_one(files[i], settings, registry);
  };
  std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), files.size());
  std::vector<std::thread> pool;
  for (std::size_t k = 1; k < workers; ++k)
    pool.emplace_back(work);
  work();
  for (auto &t : pool)
    t.join();
  return outcomes;
}

std::string report_file_name(const std::string &stem, std::set<std::string> &used) {
  std::string name = stem + ".report.json";
  for (int n = 2; used.count(name); ++n)
    name = stem + "." + std::to_string(n) + ".report.json";
  used.insert(name);
  return name;
}

int cmd_lint(const LintOptions &opt, const RuleRegistry &registry, std::ostream &out, std::ostream &err) {
  Settings settings;
  try {
    settings = resolve_settings(opt.config, opt.disable, registry);
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  if (opt.name_match_fallback)
    settings.config.name_match_fallback = true;

  bool failed = false;
  auto files = discover(opt.paths, opt.recursive, err, failed);
  int jobs = opt.jobs > 0 ? opt.jobs : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  auto outcomes = lint_all(files, settings, registry, jobs);

  bool any_violation = false;
  nlohmann::json json_out = nlohmann::json::array();
  std::set<std::string> used_names;
  if (!opt.out_dir.empty()) {
    std::error_code ec;
    fs::create_directories(opt.out_dir, ec);
    if (ec) {
      err << opt.out_dir << ": error: " << ec.message() << "\n";
      return kExitError;
    }
  }
  bool to_stdout = opt.out_dir.empty() || opt.format_given;

  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string shown = files[i].generic_string();
    const Outcome &o = outcomes[i];
    if (!o.report) {
      err << shown << ": error: " << o.error << "\n";
      failed = true;
      continue;
    }
    const NotebookReport &report = *o.report;
    any_violation = any_violation || !report.violations.empty();
    for (const auto &d : report.diagnostics)
      err << shown << ": note: " << d << "\n";

    if (!opt.out_dir.empty()) {
      fs::path target = fs::path(opt.out_dir) / report_file_name(files[i].stem().string(), used_names);
      std::ofstream file(target, std::ios::binary);
      file << render_report(report, ReportFormat::Json);
      if (!file) {
        err << target.generic_string() << ": error: cannot write report\n";
        failed = true;
      }
    }
    if (to_stdout) {
      if (opt.format == "json")
        json_out.push_back(report_to_json(report));
      else
        out << render_report(report, ReportFormat::Text);
    }
  }
  if (to_stdout && opt.format == "json")
    out << json_out.dump(2) << "\n";
  if (failed)
    return kExitError;
  return any_violation ? kExitViolations : kExitClean;
}

int cmd_aggregate(const std::string &dir, std::optional<long long> corpus_size, const std::string &format,
                  std::ostream &out, std::ostream &err) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    err << dir << ": error: not a directory\n";
    return kExitError;
  }
  std::vector<fs::path> files;
  for (fs::directory_iterator it(dir, ec), end; !ec && it != end; it.increment(ec))
    if (it->is_regular_file() && it->path().extension() == ".json")
      files.push_back(it->path());
  std::sort(files.begin(), files.end());

  std::vector<NotebookReport> reports;
  bool failed = false;
  for (const auto &file : files) {
    auto bytes = read_file(file);
    if (!bytes) {
      err << file.generic_string() << ": error: cannot read file\n";
      failed = true;
      continue;
    }
    try {
      auto doc = nlohmann::json::parse(*bytes);
      if (doc.is_array())
        for (const auto &item : doc)
          reports.push_back(report_from_json(item));
      else
        reports.push_back(report_from_json(doc));
    } catch (const std::exception &e) {
      err << file.generic_string() << ": error: " << e.what() << "\n";
      failed = true;
    }
  }
  if (failed)
    return kExitError;

  try {
    auto rows = aggregate(reports, corpus_size.value_or(static_cast<long long>(reports.size())));
    if (format == "json")
      out << aggregate_to_json(rows).dump(2) << "\n";
    else
      out << aggregate_to_csv(rows);
  } catch (const std::exception &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitClean;
}

std::string pad(std::string text, std::size_t width) {
  if (text.size() < width)
    text.append(width - text.size(), ' ');
  return text;
}

int cmd_rules(const SettingsOptions &opt, const RuleRegistry &registry, std::ostream &out, std::ostream &err) {
  Settings settings;
  try {
    settings = resolve_settings(opt.config, opt.disable, registry);
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  const RuleConfig &cfg = settings.config;
  auto row = [&](const std::string &id, RuleLevel level, const std::string &description, const std::string &extra) {
    std::string status = registry.is_enabled(id, cfg) ? "enabled" : "disabled";
    out << pad(id, 7) << pad(std::string(to_string(level)), 10)
        << pad(std::string(to_string(registry.severity_for(id, cfg))), 9) << pad(status, 10) << description;
    if (!extra.empty())
      out << " [" << extra << "]";
    out << "\n";
  };
  auto catalog = registry.catalog();
  out << pad("ID", 7) << pad("LEVEL", 10) << pad("SEVERITY", 9) << pad("STATUS", 10) << "DESCRIPTION\n";
  for (const auto &info : catalog) {
    row(info.id, info.level, info.description, info.thresholds ? info.thresholds(cfg) : "");
    for (const auto &sub : info.sub_ids)
      row(sub, info.level, "  (part of " + info.id + ")", "");
  }
  out << catalog.size() << " rules\n";
  return kExitClean;
}

int cmd_kb(const SettingsOptions &opt, const RuleRegistry &registry, std::ostream &out, std::ostream &err) {
  try {
    Settings s = resolve_settings(opt.config, opt.disable, registry);
    nlohmann::json doc;
    doc["config"] = config_to_json(s.config);
    doc["kb"] = kb_to_json(s.kb);
    out << doc.dump(2) << "\n";
  } catch (const ConfigError &e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitClean;
}

std::vector<std::string> split_ids(const std::vector<std::string> &raw) {
  std::vector<std::string> ids;
  for (const auto &item : raw) {
    std::stringstream ss(item);
    std::string id;
    while (std::getline(ss, id, ','))
      if (!id.empty())
        ids.push_back(id);
  }
  return ids;
}

} // namespace

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err, const RuleRegistry &registry) {
  CLI::App app{"Static linter for machine-learning Jupyter notebooks", "vespucci"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  LintOptions lint;
  auto *lint_cmd = app.add_subcommand("lint", "Lint notebooks and report violations");
  lint_cmd->add_option("paths", lint.paths, "Notebook files or directories")->required();
  lint_cmd->add_option("--config", lint.config, "JSON config file (default: $VESPUCCI_CONFIG)");
  auto *format_opt = lint_cmd->add_option("--format", lint.format, "Output format")
                         ->check(CLI::IsMember({"json", "text"}));
  lint_cmd->add_option("--out-dir", lint.out_dir, "Write one <stem>.report.json per notebook here");
  lint_cmd->add_flag("--recursive,-r", lint.recursive, "Recurse into directories");
  lint_cmd->add_option("--jobs,-j", lint.jobs, "Worker threads (default: number of cores)")
      ->check(CLI::PositiveNumber);
  lint_cmd->add_option("--disable", lint.disable, "Rule ids to disable (comma separated)");
  lint_cmd->add_flag("--name-match-fallback", lint.name_match_fallback,
                     "Match in-place methods by name when the receiver type is unknown");

  std::string report_dir;
  std::optional<long long> corpus_size;
  std::string agg_format = "csv";
  auto *agg_cmd = app.add_subcommand("aggregate", "Aggregate report files into per-rule statistics");
  agg_cmd->add_option("report_dir", report_dir, "Directory of report JSON files")->required();
  agg_cmd->add_option("--corpus-size", corpus_size, "Number of notebooks in the corpus (default: report count)");
  agg_cmd->add_option("--format", agg_format, "Output format")->check(CLI::IsMember({"csv", "json"}));

  SettingsOptions rules_opt;
  auto *rules_cmd = app.add_subcommand("rules", "List the rule catalog");
  rules_cmd->add_option("--config", rules_opt.config, "JSON config file");
  rules_cmd->add_option("--disable", rules_opt.disable, "Rule ids to show as disabled");

  SettingsOptions kb_opt;
  auto *kb_cmd = app.add_subcommand("kb", "Print the effective configuration and knowledge base as JSON");
  kb_cmd->add_option("--config", kb_opt.config, "JSON config file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kExitClean : kExitError;
  }

  if (lint_cmd->parsed()) {
    lint.format_given = format_opt->count() > 0;
    lint.disable = split_ids(lint.disable);
    return cmd_lint(lint, registry, out, err);
  }
  if (agg_cmd->parsed())
    return cmd_aggregate(report_dir, corpus_size, agg_format, out, err);
  if (rules_cmd->parsed()) {
    rules_opt.disable = split_ids(rules_opt.disable);
    return cmd_rules(rules_opt, registry, out, err);
  }
  return cmd_kb(kb_opt, registry, out, err);
}

int run_cli(int argc, const char *const *argv, std::ostream &out, std::ostream &err) {
  return run_cli(argc, argv, out, err, builtin_registry());
}

} // namespace vespucci
