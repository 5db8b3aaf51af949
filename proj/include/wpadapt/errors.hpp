#pragma once

#include <stdexcept>
#include <string>

namespace wpadapt {

/// Precondition violation on an argument (bad time, empty grid, n < k, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical routine failed to reach its target accuracy.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed problem configuration or unknown identifier.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) {
        throw DomainError(message);
    }
}

}  // namespace detail
}  // namespace wpadapt
