#pragma once

#include <stdexcept>
#include <string>

namespace redlab {

// Broad failure classes; the CLI maps each to a distinct exit code.
enum class ErrorKind {
    Config,       // invalid user input or precondition
    Intractable,  // computational budget exceeded
    Invariant,    // internal consistency check failed
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
    explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Parameter on (or too close to) the simplex boundary where the Fisher
/// matrix is singular.
class SingularityError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class IntractableError : public Error {
public:
    explicit IntractableError(const std::string& what)
        : Error(ErrorKind::Intractable, what) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what)
        : Error(ErrorKind::Invariant, what) {}
};

/// Malformed or truncated encoded data.
class DecodeError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

}  // namespace redlab
