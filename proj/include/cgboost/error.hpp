#pragma once

#include <stdexcept>
#include <string>

namespace cgb {

// Error categories; the CLI maps each to a distinct exit code.
enum class ErrorKind {
  shape,
  domain,
  usage,
  config,
  data,
  training,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ShapeError : Error {
  explicit ShapeError(const std::string& what) : Error(ErrorKind::shape, what) {}
};
struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};
struct UsageError : Error {
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};
struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorKind::config, what) {}
};
struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};
struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error(ErrorKind::training, what) {}
};
struct IoError : Error {
  explicit IoError(const std::string& what) : Error(ErrorKind::io, what) {}
};

// Rethrows `e` as the same error category with `context` prefixed.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::shape: throw ShapeError(what);
    case ErrorKind::domain: throw DomainError(what);
    case ErrorKind::usage: throw UsageError(what);
    case ErrorKind::config: throw ConfigError(what);
    case ErrorKind::data: throw DataError(what);
    case ErrorKind::training: throw TrainingError(what);
    case ErrorKind::io: throw IoError(what);
  }
  throw Error(e.kind(), what);
}

}  // namespace cgb
