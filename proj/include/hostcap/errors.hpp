#pragma once

#include <stdexcept>
#include <string>

namespace hostcap {

struct NotRadialError : std::runtime_error {
    explicit NotRadialError(const std::string& what) : std::runtime_error(what) {}
};

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyPool : std::runtime_error {
    explicit EmptyPool(const std::string& what) : std::runtime_error(what) {}
};

struct NoFeasibleScenario : std::runtime_error {
    explicit NoFeasibleScenario(const std::string& what) : std::runtime_error(what) {}
};

struct DegenerateData : std::runtime_error {
    explicit DegenerateData(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace hostcap
