#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chitf {

// Inconsistent ranks, unknown modalities, invalid kind pairings.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a dense tensor would exceed the oracle size cap.
class OracleScaleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or invalid input files. Carries the file and 1-based line.
class IngestionError : public std::runtime_error {
 public:
  IngestionError(std::string file, std::size_t line, const std::string& what)
      : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        file_(std::move(file)),
        line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

// Non-finite objective values.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chitf
