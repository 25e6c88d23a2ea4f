#pragma once

#include <stdexcept>
#include <string>

namespace curlspec {

/// Base class for all toolkit errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A deformation step produced a tetrahedron with non-positive volume.
struct TetInversionError : Error {
    explicit TetInversionError(const std::string& msg) : Error(msg) {}
};

/// A mesh contains a tetrahedron with non-positive volume at assembly time.
struct DegenerateTetError : Error {
    explicit DegenerateTetError(const std::string& msg) : Error(msg) {}
};

/// Computed homology rank disagrees with the genus read off the boundary
/// Euler characteristic.
struct HomologyRankMismatchError : Error {
    explicit HomologyRankMismatchError(const std::string& msg) : Error(msg) {}
};

/// Lagrangian constraint matrix fails its rank or isotropy invariants.
struct InconsistentLagrangianError : Error {
    explicit InconsistentLagrangianError(const std::string& msg) : Error(msg) {}
};

/// Sparse factorization of the shifted operator failed (shift hit the
/// spectrum); callers retry with a perturbed shift.
struct FactorizationFailureError : Error {
    explicit FactorizationFailureError(const std::string& msg) : Error(msg) {}
};

/// Eigeniteration did not converge within the iteration cap.
struct NoConvergenceError : Error {
    NoConvergenceError(const std::string& msg, int iters)
        : Error(msg), iterations(iters) {}
    int iterations = 0;
};

/// Computed kernel dimension disagrees with the boundary genus.
struct DimensionMismatchError : Error {
    explicit DimensionMismatchError(const std::string& msg) : Error(msg) {}
};

/// Subspace overlap between consecutive tracking steps fell below the
/// tracking threshold.
struct BranchLossError : Error {
    explicit BranchLossError(const std::string& msg) : Error(msg) {}
};

/// Matrix handed to the cone decomposition has a negative eigenvalue beyond
/// the clip tolerance.
struct NotPsdError : Error {
    explicit NotPsdError(const std::string& msg) : Error(msg) {}
};

/// Configuration file is malformed or inconsistent.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

}  // namespace curlspec
