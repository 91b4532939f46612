#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace exclusim {

/// Base of every error raised by the library. Carries the name of the module
/// that refused the request so the experiment runner can report it.
class Error : public std::runtime_error {
 public:
  Error(std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what), module_(std::move(module)) {}

  const std::string& module() const noexcept { return module_; }

 private:
  std::string module_;
};

/// A precondition on an argument failed.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// An exact computation would exceed its configured size budget.
class CapacityExceeded : public Error {
 public:
  CapacityExceeded(std::string module, std::uint64_t requested, std::uint64_t limit)
      : Error(std::move(module), "capacity exceeded: " + std::to_string(requested) +
                                     " requested, limit " + std::to_string(limit)),
        requested_(requested),
        limit_(limit) {}

  std::uint64_t requested() const noexcept { return requested_; }
  std::uint64_t limit() const noexcept { return limit_; }

 private:
  std::uint64_t requested_;
  std::uint64_t limit_;
};

/// The admissible-flip graph of a state space has more than one component.
class Disconnected : public Error {
 public:
  Disconnected(std::string module, std::uint64_t components)
      : Error(std::move(module),
              "state space is disconnected (" + std::to_string(components) + " components)"),
        components_(components) {}

  std::uint64_t components() const noexcept { return components_; }

 private:
  std::uint64_t components_;
};

/// The question has no answer on this input (e.g. the gap of a 1-state space).
class Degenerate : public Error {
 public:
  using Error::Error;
};

class NoHoles : public Error {
 public:
  using Error::Error;
};

class GeometryError : public Error {
 public:
  using Error::Error;
};

class UnattainableCounts : public Error {
 public:
  using Error::Error;
};

class ZeroProbabilityEvent : public Error {
 public:
  using Error::Error;
};

/// Malformed experiment file. `line` is 1-based, 0 when unknown.
class ParseError : public Error {
 public:
  ParseError(std::string field, std::size_t line, const std::string& what)
      : Error("cli", (line ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : "field '" + field + "': ") + what),
        field_(std::move(field)),
        line_(line) {}

  const std::string& field() const noexcept { return field_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace exclusim
