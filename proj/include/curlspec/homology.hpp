#pragma once

#include <Eigen/Dense>

#include "curlspec/complex.hpp"
#include "curlspec/tetmesh.hpp"

namespace curlspec {

/// Homological data of the domain boundary: a basis of H_1 of the boundary
/// surface split into bounding cycles (alpha, the boundaries of cut
/// surfaces) and their symplectic partners (beta), the cut surfaces spanning
/// relative H_2, and the integer intersection matrix of the cycle basis in
/// the order (alpha_1..alpha_l, beta_1..beta_l).
struct HomologyBasis {
    int total_genus = 0;  // ell
    std::vector<int> genus_per_component;
    std::vector<EdgeChain> alpha_cycles;
    std::vector<EdgeChain> beta_cycles;
    std::vector<FaceChain> cut_surfaces;
    Eigen::MatrixXi intersection_matrix;  // 2l x 2l, skew, nondegenerate
};

/// Fast path when the mesh carries tags alphaJ/betaJ/sigmaJ; otherwise the
/// generic computation.  Throws HomologyRankMismatchError if the basis rank
/// disagrees with the genus from the boundary Euler characteristic.
HomologyBasis homology_basis(const TetMesh& mesh);

/// Generic computation (ignores tags): fundamental cycles of the boundary
/// surface, integer lattice refinement by Smith normal form, symplectic
/// completion, and cut surfaces from an integer solve of the boundary map.
HomologyBasis homology_basis_generic(const TetMesh& mesh);

/// Period functionals: row j is the signed indicator of the j-th cycle's
/// edges, cycles ordered (alpha..., beta...).  Shape 2l x E.
SpMat period_matrix(const TetMesh& mesh, const HomologyBasis& basis);

/// Flux functionals: row j is the signed indicator of Sigma_j's faces.
/// Shape l x F.
SpMat flux_matrix(const TetMesh& mesh, const HomologyBasis& basis);

/// Signed sum of an edge cochain over each basis cycle (2l entries).
Eigen::VectorXcd period_vector(const CochainComplex& cc, const HomologyBasis& basis,
                               const Eigen::VectorXcd& v);

/// Signed sum of a face cochain over each cut surface (l entries).
Eigen::VectorXcd flux_vector(const CochainComplex& cc, const HomologyBasis& basis,
                             const Eigen::VectorXcd& u);

/// Face cochain of the 2-form proxy of an edge cochain: per face, the area
/// integral of the interpolated field's normal component, averaged over the
/// (one or two) adjacent tets.
Eigen::VectorXd proxy_face_cochain(const CochainComplex& cc, const Eigen::VectorXd& v);

/// Intersection numbers of boundary 1-cycles, computed through the wedge
/// pairing of closed Whitney cocycles with prescribed periods (the pairing
/// of closed forms is exactly cohomological, so the result is an integer
/// matrix up to roundoff, which is verified).  The cycles must form a basis
/// of H_1 of the boundary.
Eigen::MatrixXi intersection_matrix_oracle(const TetMesh& mesh,
                                           const std::vector<EdgeChain>& cycles);

}  // namespace curlspec
