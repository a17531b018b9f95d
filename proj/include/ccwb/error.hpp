#ifndef CCWB_ERROR_HPP
#define CCWB_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ccwb {

// Failure categories. The CLI maps each one onto a fixed exit code.
enum class ErrorKind {
  Parse,          // malformed input text or schema
  Invariant,      // a value violates its type invariant (names the tolerance)
  Precondition,   // an operation was called outside its contract
  Infeasible,     // honest negative: the finite-dimensional construction cannot exist
  NotFound,       // honest negative: heuristic search came back empty
  Internal        // a postcondition that should be a theorem failed numerically
};

const char* to_string(ErrorKind kind);

// Exit code contract: 0 ok, 1 honest negative, 2 parse, 3 invariant, 4 internal.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what) : Error(ErrorKind::Parse, what) {}
};

class InvariantError : public Error {
 public:
  InvariantError(std::string invariant, const std::string& what)
      : Error(ErrorKind::Invariant, invariant + ": " + what),
        invariant_(std::move(invariant)) {}
  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what)
      : Error(ErrorKind::Precondition, what) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& what)
      : Error(ErrorKind::Infeasible, what) {}
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::Internal, what) {}
};

}  // namespace ccwb

#endif  // CCWB_ERROR_HPP
