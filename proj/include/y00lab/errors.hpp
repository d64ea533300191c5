#pragma once

#include <stdexcept>
#include <string>

namespace y00lab {

/// Invalid configuration or operation input (bad seed, width mismatch, ...).
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Problem size exceeds an exactness cap. The caller asked for something we
/// refuse to approximate silently.
class infeasible_error : public std::runtime_error {
public:
    explicit infeasible_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical routine failed to reach its accuracy target.
class numeric_error : public std::runtime_error {
public:
    explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

} // namespace y00lab
