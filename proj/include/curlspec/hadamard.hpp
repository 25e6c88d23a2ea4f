#pragma once

#include <Eigen/Dense>

#include "curlspec/deformation.hpp"
#include "curlspec/spectrum.hpp"

namespace curlspec {

/// Pointwise |u|^2 of an interpolated eigenfield on the boundary, sampled at
/// a quadrature rule per boundary face (exact for the quartic integrand and
/// accurate for products with a P1 speed).  The interpolant is evaluated
/// one-sided from the unique adjacent tet; the full |u|^2 is used, without
/// projecting out the (discretely nonzero) normal component.
struct BoundaryDensity {
    Eigen::VectorXd face_areas;   // per boundary face record
    Eigen::VectorXd face_means;   // mean of |u|^2 per face
    Eigen::MatrixXd quad_values;  // nq x nfaces samples of |u|^2
    double total = 0;             // integral of |u|^2 over the boundary
};

/// Same samples for the sesquilinear pointwise product u . conj(w).
struct BoundaryCrossDensity {
    Eigen::VectorXd face_areas;
    Eigen::MatrixXcd quad_values;
    std::complex<double> total{0, 0};
};

BoundaryDensity boundary_density(const CochainComplex& cc, const Eigen::VectorXcd& v);
BoundaryCrossDensity boundary_cross_density(const CochainComplex& cc, const Eigen::VectorXcd& u,
                                            const Eigen::VectorXcd& w);

/// Boundary speeds are P1 data on boundary vertices (boundary_vertices()
/// order), interpolated at the quadrature points.
Eigen::MatrixXd speed_at_quadrature(const TetMesh& mesh, const Eigen::VectorXd& boundary_speed);

/// Integral of f * g over the boundary from quadrature samples.
double boundary_integral(const TetMesh& mesh, const Eigen::MatrixXd& fq,
                         const Eigen::VectorXd& face_areas, const Eigen::MatrixXd& gq);

/// First variation of a curl eigenvalue under normal speed f:
///   -lambda * integral_{boundary} f |u|^2 dsigma
/// for an L2-normalized eigenfield of eigenvalue lambda.
double shape_derivative(double lambda, const BoundaryDensity& density, const TetMesh& mesh,
                        const Eigen::VectorXd& boundary_speed);

/// Off-diagonal pairing integral_{boundary} f (u . conj w) dsigma for
/// M1-orthonormal u, w of the same nonzero cluster.  Throws Error (zero
/// eigenvalue) when |lambda| is below the kernel threshold.
std::complex<double> cross_term(const CochainComplex& cc, const Eigen::VectorXcd& u,
                                const Eigen::VectorXcd& w, const Eigen::VectorXd& boundary_speed,
                                double lambda, double kernel_threshold);

/// Rotate an M1-orthonormal cluster basis so that the first-order interaction
/// matrix G_ij = integral f (u_i . conj u_j) dsigma is diagonal; this is the
/// branch basis of the analytic perturbation in direction f.  Returns the
/// rotated vectors and the diagonal of G (branch values of integral f|u|^2).
struct RellichBasis {
    Eigen::MatrixXcd vectors;    // E x m, M1-orthonormal
    Eigen::VectorXd g_diagonal;  // branch values of the interaction matrix
};
RellichBasis rellich_align(const CochainComplex& cc, const Eigen::MatrixXcd& cluster,
                           const TetMesh& mesh, const Eigen::VectorXd& boundary_speed);

/// Eigenvalue branches along a deformation family, tracked by spectral
/// overlap.  Branch labels are consistent along the run but otherwise
/// arbitrary at exact crossings.
struct TrackedBranch {
    std::vector<double> t_samples;
    Eigen::MatrixXd lambdas;                 // m x nt branch curves
    std::vector<Eigen::MatrixXcd> vectors;   // aligned cluster per sample
    std::vector<double> min_overlaps;        // smallest principal-angle cosine per step
};

struct TrackOptions {
    double overlap_threshold = 0.8;  // BranchLoss below this
    int extra_solve = 3;             // eigenpairs beyond the cluster size
    SolverOptions solver;
};

/// Track the cluster of eigenvalues with indices [cluster_begin,
/// cluster_end) of a base solve near `shift` along mesh_t = deform(mesh,
/// field, t) for each t in the grid.  The incidence is fixed, so cochains
/// at different t are comparable coefficient vectors.  Throws BranchLossError
/// if consecutive overlaps fall below the threshold.
TrackedBranch track_family(const TetMesh& mesh, const DeformationField& field,
                           const LagrangianSpec& lag, const HomologyBasis& basis, double shift,
                           int cluster_begin, int cluster_end, const std::vector<double>& t_grid,
                           const TrackOptions& opts = {});

/// Central-difference validation of the first-variation formula, branch-wise
/// over the cluster containing eigenvalue index k of the base solve.
struct FdReport {
    Eigen::VectorXd lambda0;         // branch eigenvalues at t = 0
    std::vector<double> deltas;      // sweep, descending
    Eigen::MatrixXd fd_values;       // m x ndeltas central differences
    Eigen::VectorXd formula_values;  // m, from shape_derivative at t = 0
    Eigen::VectorXd relative_errors; // m, at the smallest delta
    Eigen::VectorXd sweep_orders;    // m, observed order of the fd sweep
    QualityReport quality;
};

struct FdOptions {
    double delta0 = 0;     // 0: 1e-3 x domain diameter
    int sweep_points = 4;  // halving sweep
    double gap_tol = 1e-3;
    double shift = 0;      // 0: use lambda at index k from a probe solve
    TrackOptions track;
};

FdReport fd_check(const TetMesh& mesh, const DeformationField& field, const LagrangianSpec& lag,
                  const HomologyBasis& basis, int k_index, const FdOptions& opts = {});

}  // namespace curlspec
