#pragma once

#include <stdexcept>
#include <string>

namespace sharing_queue {

// Argument outside the mathematical domain of an operation.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// No characteristic root beyond 1; the offered load λa/v is not below 1.
class NoRootError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Truncated infinite-queue solve did not settle before the hard cap.
class TruncationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Every candidate of an optimization was invalid or failed to solve.
class NoValidPointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed run configuration (bad value, unknown key, violated constraint).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace sharing_queue
