#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace koopq {

// Precondition violations: bad shapes, out-of-range indices, non-real input.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// An index outside the truncated lattice / mode set was supplied.
class OutOfLatticeError : public DomainError {
public:
    using DomainError::DomainError;
};

// Walsh spectrum carries weight >= 2 (or constant) content.
class NotAffineError : public DomainError {
public:
    using DomainError::DomainError;
};

// Numerical degeneracy: the computation is well-posed in exact arithmetic
// only if some scalar stays away from zero, and it did not.
class DegeneracyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ZeroEvidenceError : public DegeneracyError {
public:
    explicit ZeroEvidenceError(const std::string& what, long step = -1)
        : DegeneracyError(what), step_(step) {}
    long step() const noexcept { return step_; }

private:
    long step_;
};

class RankDeficiencyError : public DegeneracyError {
public:
    RankDeficiencyError(const std::string& what, std::size_t deficient)
        : DegeneracyError(what), deficient_(deficient) {}
    std::size_t deficient_count() const noexcept { return deficient_; }

private:
    std::size_t deficient_;
};

}  // namespace koopq
