#pragma once

#include <stdexcept>
#include <string>

namespace adgame {

/// Base class for every error raised by the library. `kind()` is a stable
/// machine-readable tag used by the command-line tool.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

struct ParseError : Error {
    explicit ParseError(const std::string& what) : Error("parse_error", what) {}
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& what) : Error("validation_error", what) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& what) : Error("config_error", what) {}
};

/// Nothing can reach the Domain Admin node; there is no game to play.
struct EmptyGameError : Error {
    explicit EmptyGameError(const std::string& what) : Error("empty_game", what) {}
};

/// The kernelization hit a structure that pruning should have removed.
struct KernelError : Error {
    explicit KernelError(const std::string& what) : Error("kernel_error", what) {}
};

/// A solver exceeded its configured state or enumeration budget.
struct ResourceError : Error {
    explicit ResourceError(const std::string& what) : Error("resource_error", what) {}
};

/// A caller broke an operation's precondition (e.g. an inadmissible action).
struct ContractViolation : Error {
    explicit ContractViolation(const std::string& what) : Error("contract_violation", what) {}
};

struct IoError : Error {
    explicit IoError(const std::string& what) : Error("io_error", what) {}
};

}  // namespace adgame
