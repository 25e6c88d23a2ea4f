#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "curlspec/errors.hpp"

namespace curlspec {

/// Result of a constrained shift-invert Lanczos run.
template <class Scalar>
struct ConstrainedEigs {
    Eigen::VectorXd values;  // real eigenvalues, ascending
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> vectors;  // M-orthonormal
    Eigen::VectorXd residuals;  // per-pair solver residuals (relative)
    int iterations = 0;
    double shift_used = 0;
};

/// Eigenpairs of A v = lambda M v restricted to ker(B), computed by
/// shift-invert Lanczos on the augmented saddle system
///   [A - sigma M, B^H; B, 0]
/// with the M-inner product.  A real symmetric, M SPD, B full row rank.
/// Returns the k converged pairs nearest the shift.  Retries a +1% perturbed
/// shift on factorization failure (at most `retries` times), then throws
/// FactorizationFailureError; throws NoConvergenceError with iteration
/// diagnostics if the Krylov budget is exhausted.
template <class Scalar>
ConstrainedEigs<Scalar> constrained_eigs(const Eigen::SparseMatrix<double>& A,
                                         const Eigen::SparseMatrix<double>& M,
                                         const Eigen::SparseMatrix<Scalar>& B, double shift,
                                         int k, double tol, int max_dim,
                                         unsigned long long seed, int retries);

/// Dual-norm residual of a candidate pair on ker(B):
/// solves [M, B^H; B, 0][y; nu] = [Av - lambda Mv; 0] and returns
/// sqrt(y^H M y) (callers normalize).  The factorization is reusable.
template <class Scalar>
class ConstraintProjector {
public:
    ConstraintProjector(const Eigen::SparseMatrix<double>& M,
                        const Eigen::SparseMatrix<Scalar>& B);
    /// M-orthogonal projection of r onto ker(B).
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> project(
        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) const;
    /// Dual norm sqrt(y^H M y) of a residual covector r over ker(B).
    double dual_norm(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) const;

private:
    Eigen::SparseMatrix<double> M_;
    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu_;
    int n_ = 0, m_ = 0;
};

}  // namespace curlspec
