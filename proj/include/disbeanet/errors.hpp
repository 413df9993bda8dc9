#pragma once

#include <stdexcept>
#include <string>

namespace disbeanet {

// Input violates a documented precondition or type invariant.
struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Mathematically undefined request (antipodal bearing, wrap-around distance).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Malformed file content. Message carries "path:line:" where applicable.
struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failure (open/write/rename).
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Model file could not be restored (bad version, shape, truncation).
struct LoadError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
struct TrainingDiverged : std::runtime_error {
    long epoch;
    TrainingDiverged(long epoch_, const std::string& msg)
        : std::runtime_error(msg), epoch(epoch_) {}
};

}  // namespace disbeanet
