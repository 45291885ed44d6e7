#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace causabs {

// Base class for every error raised by the library. The CLI maps it to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text or unreadable file. The CLI maps it to exit code 2.
class InputError : public Error {
 public:
  using Error::Error;
};

// A single failed invariant, e.g. {"mechanism C", "column 1 sums to 1.1"}.
struct Violation {
  std::string entity;
  std::string message;

  std::string to_string() const { return entity + ": " + message; }
  bool operator==(const Violation&) const = default;
};

// Thrown when an operation requires a valid object and validation failed.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}

  const std::vector<Violation>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<Violation>& vs) {
    std::string out;
    for (const auto& v : vs) {
      if (!out.empty()) out += "; ";
      out += v.to_string();
    }
    return out;
  }

  std::vector<Violation> violations_;
};

}  // namespace causabs
