#pragma once

#include <stdexcept>
#include <string>

namespace casimir {

/// Base class of every error raised by the library.
///
/// Errors fall in two families: invalid input (the caller asked for
/// something outside an operation's domain) and numerical failure (the
/// input was fine but a computed quantity violated its invariant).  The
/// command-line front end maps these to distinct exit codes.
class Error : public std::runtime_error {
  public:
    enum class Kind { validation, numerical };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

class DomainError : public Error {
  public:
    explicit DomainError(const std::string& msg) : Error(Kind::validation, msg) {}
};

// Zero drive speed with a nonzero expansion; the evolution is the identity.
class DegenerateDriveError : public Error {
  public:
    explicit DegenerateDriveError(const std::string& msg) : Error(Kind::validation, msg) {}
};

class SizeError : public Error {
  public:
    explicit SizeError(const std::string& msg) : Error(Kind::validation, msg) {}
};

class ConvergenceError : public Error {
  public:
    explicit ConvergenceError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class NumericalFailure : public Error {
  public:
    explicit NumericalFailure(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class IllConditionedError : public Error {
  public:
    explicit IllConditionedError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class BranchError : public Error {
  public:
    explicit BranchError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class ConsistencyError : public Error {
  public:
    explicit ConsistencyError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class PairingError : public Error {
  public:
    explicit PairingError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class DegenerateOverlapError : public Error {
  public:
    explicit DegenerateOverlapError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

class FitError : public Error {
  public:
    explicit FitError(const std::string& msg) : Error(Kind::numerical, msg) {}
};

}  // namespace casimir
