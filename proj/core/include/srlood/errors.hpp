#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace srlood {

// Base exception. `code` is a short stable identifier ("empty-index-set",
// "zero-vector", ...) that tests and the CLI match on; `what()` carries the
// full message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(code + ": " + message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Bad inputs: shape mismatches, malformed files, invalid configs. Exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Non-finite values where finite ones are required. Exit code 2.
class NumericError : public Error {
public:
    using Error::Error;
};

}  // namespace srlood
