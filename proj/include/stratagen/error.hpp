#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stratagen {

/// Base for every error the library raises. `code()` is the stable,
/// machine-readable name written to error records by the CLI.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

#define STRATAGEN_DEFINE_ERROR(Name)                                  \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& message) : Error(#Name, message) {} \
  }

// spec-core
class SyntaxError : public Error {
 public:
  SyntaxError(std::size_t line, std::size_t col, std::string expected,
              const std::string& found)
      : Error("SyntaxError", std::to_string(line) + ":" + std::to_string(col) +
                                 ": expected " + expected + ", found " + found),
        line_(line),
        col_(col),
        expected_(std::move(expected)) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t col() const noexcept { return col_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t line_;
  std::size_t col_;
  std::string expected_;
};

class UnresolvedTypeError : public Error {
 public:
  explicit UnresolvedTypeError(std::string name)
      : Error("UnresolvedTypeError", "unresolved type '" + name + "'"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class DuplicateDeclError : public Error {
 public:
  explicit DuplicateDeclError(std::string name)
      : Error("DuplicateDeclError", "duplicate declaration '" + name + "'"),
        name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

STRATAGEN_DEFINE_ERROR(UnsupportedInvariant);
STRATAGEN_DEFINE_ERROR(KindMismatch);

// decomposer
STRATAGEN_DEFINE_ERROR(UnsupportedType);
STRATAGEN_DEFINE_ERROR(UnassignedGuardSubject);

// value-providers
STRATAGEN_DEFINE_ERROR(RefinementUnsatisfiable);
STRATAGEN_DEFINE_ERROR(LlmTransportError);
STRATAGEN_DEFINE_ERROR(MalformedResponse);
STRATAGEN_DEFINE_ERROR(EmptyAfterValidation);
STRATAGEN_DEFINE_ERROR(FixtureMiss);
STRATAGEN_DEFINE_ERROR(UnreadableFile);
STRATAGEN_DEFINE_ERROR(NonRecordEntry);

// combinator
STRATAGEN_DEFINE_ERROR(InfeasibleSelection);

// emitter-runner
class MissingAssignment : public Error {
 public:
  explicit MissingAssignment(std::string path)
      : Error("MissingAssignment", "no assignment for '" + path + "'"),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class RefinementViolation : public Error {
 public:
  explicit RefinementViolation(std::string path)
      : Error("RefinementViolation", "refinement fails at '" + path + "'"),
        path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// cli
STRATAGEN_DEFINE_ERROR(ConfigError);

#undef STRATAGEN_DEFINE_ERROR

}  // namespace stratagen
