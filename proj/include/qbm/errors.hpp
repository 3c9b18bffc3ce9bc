// errors.hpp — Error types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace qbm {

struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

struct PoleAtNonpositiveInteger : DomainError {
    using DomainError::DomainError;
};

struct NoConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResonantCutoff : DomainError {
    using DomainError::DomainError;
};

struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfGrid : DomainError {
    using DomainError::DomainError;
};

struct DegenerateState : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CutoffTooSmall : DomainError {
    using DomainError::DomainError;
};

struct TruncationBreach : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NullJump : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BracketFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace qbm
