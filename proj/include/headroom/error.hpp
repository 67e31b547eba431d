#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace headroom {

/**
 * Base of every error raised by the library. `kind()` is a short stable token ("config", "data", "syntax",
 * "query", "codec", "execution", "engine", "checkpoint", "io", "argument") that the CLI reports in its machine-readable
 * error line.
 */
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& message) : std::runtime_error(message), kind_(std::move(kind)) {}

  const std::string& kind() const { return kind_; }

 private:
  std::string kind_;
};

class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t position, const std::string& message)
      : Error("syntax", "syntax error at offset " + std::to_string(position) + ": " + message), position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

}  // namespace headroom
