#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace deid {

// Numeric values double as CLI exit codes and C API status codes.
enum class ErrorKind : int {
  config = 1,
  data = 2,
  internal = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

// Malformed file content; carries the offending path and, when known, a byte offset.
class ParseError : public DataError {
 public:
  ParseError(const std::string& path, const std::string& what,
             std::size_t offset = npos)
      : DataError(format(path, what, offset)), path_(path), offset_(offset) {}

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
  const std::string& path() const noexcept { return path_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  static std::string format(const std::string& path, const std::string& what,
                            std::size_t offset) {
    std::string msg = path + ": " + what;
    if (offset != npos) msg += " (at byte " + std::to_string(offset) + ")";
    return msg;
  }
  std::string path_;
  std::size_t offset_;
};

// A ground-truth instance that cannot be scored (too few visible keypoints,
// zero-area extent). Evaluation counts these rather than failing.
class UnevaluableInstance : public DataError {
 public:
  using DataError::DataError;
};

// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error(ErrorKind::internal,
              "training diverged at step " + std::to_string(step) + ": " + what),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace deid
