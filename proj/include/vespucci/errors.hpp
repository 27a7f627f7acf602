#pragma once

#include <stdexcept>
#include <string>

namespace vespucci {

/// Failure to turn a file into a Notebook. Aborts analysis of that file only.
class IngestError : public std::runtime_error {
public:
  enum class Kind { MalformedJson, UnsupportedFormat };

  IngestError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

class ConfigError : public std::runtime_error {
public:
  enum class Kind { UnknownKey, TypeMismatch, UnknownRuleId, InvalidValue };

  ConfigError(Kind kind, const std::string &what) : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

private:
  Kind kind_;
};

class DuplicateRuleId : public std::runtime_error {
public:
  explicit DuplicateRuleId(const std::string &id)
      : std::runtime_error("rule id already registered: " + id) {}
};

class EmptyCorpus : public std::runtime_error {
public:
  EmptyCorpus() : std::runtime_error("corpus size must be positive") {}
};

} // namespace vespucci
