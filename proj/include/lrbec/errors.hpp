#pragma once

#include <stdexcept>
#include <string>

namespace lrbec {

/// Invalid input to a computation: violated type invariant or malformed config.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// The requested physical object does not exist at these parameters
/// (e.g. a stationary branch below the fold).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lrbec
