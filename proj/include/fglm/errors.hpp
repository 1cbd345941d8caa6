#pragma once

#include <stdexcept>
#include <string>

namespace fglm {

/// Raised when an input violates a documented precondition (bad parameter,
/// malformed config, sample too small). The CLI maps it to exit code 1.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised when a computation fails at run time (non-finite objective,
/// unreadable file). The CLI maps it to exit code 2.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fglm
