#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ssvep {

// Base for every error raised by the library. The category drives the CLI
// exit code: configuration/usage problems, bad input data, numeric failure.
class Error : public std::runtime_error {
 public:
  enum class Category { config, data, numeric };

  Error(Category category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  Category category() const noexcept { return category_; }

 private:
  Category category_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(Category::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(Category::data, what) {}
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(Category::numeric, what) {}
};

// Raised while decoding one of the binary containers (.ssvb trial stores,
// named-tensor parameter files, labeled image sets).
class FormatError : public DataError {
 public:
  enum class Kind { bad_magic, version_mismatch, truncated, malformed, io };

  FormatError(Kind kind, std::uint64_t offset, const std::string& detail);

  Kind kind() const noexcept { return kind_; }
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::uint64_t offset_;
};

const char* to_string(FormatError::Kind kind) noexcept;

}  // namespace ssvep
