#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ea {

/// Root of every error the engine raises on bad input or configuration.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed JSON; carries the byte offset reported by the parser.
class ParseError : public Error {
 public:
  ParseError(std::size_t offset, const std::string& message)
      : Error("parse error at byte " + std::to_string(offset) + ": " + message), offset_(offset) {}

  std::size_t byte_offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

/// Well-formed JSON that violates the log or schema contract.
class SchemaError : public Error {
 public:
  SchemaError(std::string field, const std::string& message)
      : Error("schema error in '" + field + "': " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Provenance violations: duplicate ids, dangling parents, cycles.
class GraphError : public Error {
 public:
  explicit GraphError(const std::string& message, std::vector<std::string> cycle = {})
      : Error(message), cycle_(std::move(cycle)) {}

  const std::vector<std::string>& cycle() const noexcept { return cycle_; }

 private:
  std::vector<std::string> cycle_;
};

class NotFound : public Error {
 public:
  using Error::Error;
};

class PlanError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

class EnumError : public Error {
 public:
  using Error::Error;
};

class ReportError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ArgError : public Error {
 public:
  using Error::Error;
};

}  // namespace ea
