#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace dsm {

/// Malformed input data (bad record syntax, wrong field types).
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structurally valid input that violates the declared schema
/// (wrong keypoint count, unknown enum token).
struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Frame ordering violations (duplicate or decreasing frame indices).
struct SequenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Violated precondition or shape contract of a numeric operation.
struct ContractError : std::logic_error {
    using std::logic_error::logic_error;
};

/// Bad run configuration (overlapping subject splits, empty training set).
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Checkpoint container problems (magic/version mismatch, truncation).
struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define DSM_CHECK(cond, msg)                                 \
    do {                                                     \
        if (!(cond)) throw ::dsm::ContractError(msg);        \
    } while (0)

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dsm
