#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>

#include "curlspec/complex.hpp"
#include "curlspec/homology.hpp"
#include "curlspec/lagrangian.hpp"

namespace curlspec {

/// Options shared by the eigenvalue solves.
struct SolverOptions {
    double tol = 1e-9;        // Krylov residual tolerance (relative)
    int max_dim = 0;          // Krylov dimension cap, 0 = automatic
    unsigned long long seed = 20240601ULL;
    double gap_tol = 1e-3;    // relative gap for multiplicity clustering
    int shift_retries = 5;    // +1% shift perturbations on factorization failure
    bool include_harmonic_basis = true;  // attach the exact kernel basis
    int n_threads = 1;
};

/// Constraint groups defining the discrete realization of the curl operator
/// for a chosen Lagrangian, as functionals on edge cochains:
///   local group:  d0^T M1 v = 0 on all vertices (weak div-free + tangential
///                 trace of the 2-form proxy) and (d1 v) = 0 on boundary
///                 faces (the trace of curl v is tangential, which closes the
///                 boundary 1-form trace of v so periods are cohomological);
///   flux group:   quadrature fluxes through the cut surfaces (zero-flux
///                 preset); reported as violations, the kernel itself is
///                 detected and set aside rather than constrained away;
///   period group: F * period_vector(v) = 0.
/// Redundant rows (one vertex per component, one boundary face per boundary
/// component) are dropped so the multiplier block has full row rank.
struct ConstraintHandle {
    std::shared_ptr<const CochainComplex> cc;
    HomologyBasis basis;
    LagrangianSpec lagrangian;

    SpMat div_rows;           // (V - n_comp) x E
    SpMat closure_rows;       // (F_bnd - n_bnd_comp) x E
    SpMat flux_rows;          // ell x E, reporting only
    Eigen::MatrixXcd period_rows;  // ell' x E (dense rows, sparse support)

    int n_flux_constraints = 0;    // reported group sizes
    int n_period_constraints = 0;
    bool is_real = true;

    /// All imposed constraints stacked (real path; requires is_real).
    SpMat stacked_real() const;
    /// All imposed constraints stacked (complex path).
    Eigen::SparseMatrix<std::complex<double>> stacked_complex() const;
};

ConstraintHandle constraint_space(std::shared_ptr<const CochainComplex> cc,
                                  const HomologyBasis& basis, const LagrangianSpec& lag);

/// Eigenpairs of the constrained curl with bookkeeping.  Eigenvalues are
/// sorted ascending and exclude the harmonic kernel, which is reported
/// separately (both index conventions are thereby available).
///
/// residual_norms holds the solver residuals of the variational squared-curl
/// pencil the eigenpairs are computed from (at the solver tolerance);
/// csym_residuals holds the dual-norm defect of the first-order equation
/// C_sym v = lambda M1 v on the constraint space, which converges at the
/// discretization rate and is reported as a diagnostic.
struct EigenResult {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXcd eigenvectors;  // E x k, M1-orthonormal
    bool vectors_real = true;
    Eigen::VectorXd residual_norms;
    Eigen::VectorXd csym_residuals;
    Eigen::MatrixXd constraint_violations;   // rows: div, closure, period, flux
    std::vector<std::pair<int, int>> clusters;  // half-open index ranges
    Eigen::MatrixXcd harmonic_basis;         // E x ell when requested
    Eigen::VectorXd harmonic_eigenvalues;    // near-zero values set aside
    double kernel_threshold = 0;
    double gap_tol_used = 0;
    double shift = 0;
    int iterations = 0;
};

/// k eigenvalues nearest the shift of the constrained curl.
///
/// The symmetrized first-order pencil (C_sym, M1) is spectrally polluted at
/// lowest order, so the solve runs shift-invert block Krylov iteration on
/// the positive-semidefinite squared-curl pencil d1^T M2 d1 v = nu M1 v over
/// the same constraint space (whose natural boundary conditions are the
/// squared Lagrangian realization), then recovers signed eigenvalues and
/// eigenfields by Rayleigh-Ritz of C_sym inside each nu-cluster.  Near-zero
/// eigenvalues (below the kernel threshold derived from a coarse pre-pass)
/// are separated into harmonic data.
EigenResult solve_spectrum(const ConstraintHandle& handle, int k, double shift,
                           const SolverOptions& opts = {});

/// M1-orthonormal basis of the discrete harmonic space: curl-free (d1 v = 0)
/// and weakly divergence-free/tangential.  Dimension equals the total
/// boundary genus; DimensionMismatchError otherwise.
Eigen::MatrixXd harmonic_fields(const CochainComplex& cc, const HomologyBasis& basis,
                                const SolverOptions& opts = {});

/// Fluxes of the harmonic basis through the cut surfaces (ell x ell); the
/// flux map restricted to harmonic fields is a bijection.
Eigen::MatrixXd harmonic_flux_matrix(const CochainComplex& cc, const HomologyBasis& basis,
                                     const Eigen::MatrixXd& hbasis);

/// Maximal runs of sorted eigenvalues with consecutive relative gaps below
/// gap_tol.
std::vector<std::pair<int, int>> cluster_multiplicity(const Eigen::VectorXd& eigenvalues,
                                                      double gap_tol);

/// Maximal boundary-pairing defect max_ij |v_i^H (C - C^T) v_j| over the
/// returned eigenvectors; vanishes on a Lagrangian constraint space.
double check_selfadjointness(const CochainComplex& cc, const EigenResult& result);

}  // namespace curlspec
