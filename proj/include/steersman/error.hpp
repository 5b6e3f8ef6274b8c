#pragma once

#include <stdexcept>
#include <string>

namespace steersman {

/// Base class for every error raised by the library. `kind()` is a short
/// machine-readable tag used by the CLI's structured error line.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& message)
        : std::runtime_error(message), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& message) : Error("invalid_argument", message) {}
};

class GeometryError : public Error {
public:
    explicit GeometryError(const std::string& message) : Error("geometry", message) {}
};

class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& message) : Error("convergence", message) {}
};

class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& message) : Error("singular", message) {}
};

class FormatError : public Error {
public:
    explicit FormatError(const std::string& message) : Error("format", message) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& message) : Error("config", message) {}
};

class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& message) : Error("numerical", message) {}
};

}  // namespace steersman
