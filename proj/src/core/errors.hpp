#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pmc {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    using Error::Error;
};

// Raised when a factorization meets a pivot below the singularity threshold.
struct SingularError : Error {
    std::size_t pivot_index;
    SingularError(const std::string& msg, std::size_t pivot)
        : Error(msg), pivot_index(pivot) {}
};

// Raised when a full-row-rank precondition fails; carries the offending eigenvalue.
struct RankError : Error {
    double min_eigenvalue;
    RankError(const std::string& msg, double min_eig)
        : Error(msg), min_eigenvalue(min_eig) {}
};

struct DomainError : Error {
    using Error::Error;
};

// Bad pattern construction or pattern/operation mismatch.
struct PatternError : Error {
    using Error::Error;
};

}  // namespace pmc
