#pragma once

#include <cstdlib>
#include <string>

#include "errors.hpp"

namespace polybounds {

inline constexpr double kDefaultTolerance = 1e-9;

/// Global absolute tolerance. POLYBOUNDS_TOL in the environment overrides
/// the built-in default; a malformed or non-positive value is a ConfigError.
inline double default_tolerance()
{
    const char* env = std::getenv("POLYBOUNDS_TOL");
    if (env == nullptr || *env == '\0') return kDefaultTolerance;
    char* end = nullptr;
    double v = std::strtod(env, &end);
    if (end == env || *end != '\0' || !(v > 0.0))
        throw ConfigError(std::string("POLYBOUNDS_TOL must be a positive number, got '") + env + "'");
    return v;
}

} // namespace polybounds
