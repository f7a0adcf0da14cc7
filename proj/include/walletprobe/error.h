#ifndef WALLETPROBE_ERROR_H_
#define WALLETPROBE_ERROR_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace walletprobe {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, bad line structure, bad URL).
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  // 1-based line number, 0 when not applicable.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Well-formed input that violates a data-model invariant.
class ValidationError : public Error {
 public:
  ValidationError(const std::string& field, const std::string& message,
                  std::size_t line = 0)
      : Error((line ? "line " + std::to_string(line) + ": " : std::string()) +
              field + ": " + message),
        field_(field),
        line_(line) {}

  const std::string& field() const { return field_; }
  std::size_t line() const { return line_; }

 private:
  std::string field_;
  std::size_t line_;
};

}  // namespace walletprobe

#endif  // WALLETPROBE_ERROR_H_
