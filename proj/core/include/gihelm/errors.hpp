#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gihelm {

/// Precondition violated by a caller-supplied value.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Green's function was evaluated at zero distance without a grid cell to
/// average over.
class SingularEvaluation : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A dense O(N^2) path was asked to exceed its configured size cap.
class ResourceLimit : public std::length_error {
 public:
  using std::length_error::length_error;
};

class SingularSystem : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or truncated binary file.
class FormatError : public std::runtime_error {
 public:
  FormatError(const std::string& what, std::uint64_t byte_offset)
      : std::runtime_error(what + " (at byte offset " + std::to_string(byte_offset) + ")"),
        offset_(byte_offset) {}
  std::uint64_t byte_offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// Bad run configuration; `field` is a JSON-pointer-like path to the offending key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::runtime_error(field.empty() ? what : field + ": " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace gihelm
