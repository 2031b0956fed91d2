#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>

namespace cmcflow {

/// Evaluation outside the model interval or another out-of-domain request.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Malformed caller input (empty sample lists, nonpositive parameters, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Non-finite values or an iterative method that failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A surface that is not spacelike at some grid point.
class GeometryError : public std::runtime_error {
 public:
  GeometryError(std::size_t point, const std::string& what)
      : std::runtime_error(what), point_(point) {}

  std::size_t point() const noexcept { return point_; }

 private:
  std::size_t point_;
};

/// Model JSON that does not match the expected schema. `key()` names the
/// offending entry, e.g. "fibers[1].law.p".
class ModelParseError : public std::runtime_error {
 public:
  ModelParseError(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace cmcflow
