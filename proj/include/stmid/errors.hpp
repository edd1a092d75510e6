#pragma once

#include <stdexcept>
#include <string>

namespace stmid {

// Base for all toolkit errors so callers can catch one type at the CLI edge.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Slip-angle / acceleration math divides by vx; raised when vx <= v_eps.
struct DegenerateSpeed : Error {
    explicit DegenerateSpeed(double vx)
        : Error("longitudinal speed " + std::to_string(vx) +
                " m/s is at or below the slip-angle guard"),
          vx(vx) {}
    double vx;
};

struct SimDiverged : Error {
    explicit SimDiverged(std::size_t step)
        : Error("simulation produced a non-finite state at step " + std::to_string(step)) {}
};

struct SchemaError : Error {
    using Error::Error;
};

struct MonotonicityError : Error {
    using Error::Error;
};

struct InsufficientData : Error {
    using Error::Error;
};

struct FreezeTooDeep : Error {
    using Error::Error;
};

struct NonFiniteLoss : Error {
    using Error::Error;
};

struct InvalidBudget : Error {
    using Error::Error;
};

struct SingularInnovation : Error {
    using Error::Error;
};

struct EmptyInput : Error {
    using Error::Error;
};

struct SchemaMismatch : Error {
    using Error::Error;
};

struct MissingArtifact : Error {
    explicit MissingArtifact(const std::string& path)
        : Error("required artifact not found: " + path) {}
};

struct ConfigError : Error {
    using Error::Error;
};

}  // namespace stmid
