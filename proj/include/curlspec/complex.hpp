#pragma once

#include <Eigen/SparseCore>
#include <memory>

#include "curlspec/tetmesh.hpp"

namespace curlspec {

using SpMat = Eigen::SparseMatrix<double>;

/// Discrete cochain complex on a tet mesh: signed incidence operators
/// (exterior derivative on cochains) and Whitney-form Galerkin mass matrices
/// (the discrete Hodge pairing).
///
/// Conventions: edges are sorted pairs (a<b), faces sorted triples (a<b<c).
///   d0[(a,b), v]    : p -> p_b - p_a
///   d1[(a,b,c), e]  : +1 on (b,c), -1 on (a,c), +1 on (a,b)
///   d2[t, f]        : orientation of f in the boundary of the positive tet
/// Whitney bases use the same sorted order, so d(W^k x) = W^{k+1}(d_k x)
/// holds exactly.
///
/// Built complexes are immutable and safe to share across threads.
struct CochainComplex {
    std::shared_ptr<const TetMesh> mesh;

    SpMat d0;  // E x V
    SpMat d1;  // F x E
    SpMat d2;  // T x F

    SpMat M0;  // V x V, scales as s^3 under mesh scaling by s
    SpMat M1;  // E x E, scales as s
    SpMat M2;  // F x F, scales as 1/s

    /// Curl pairing C[i,j] = integral of curl(phi_i) . phi_j over Whitney
    /// 1-forms; scale invariant.  C - C^T encodes the boundary symplectic
    /// pairing of tangential traces.
    SpMat C;

    SpMat curl_sym() const;   // (C + C^T)/2
    SpMat curl_skew() const;  // C - C^T

    const std::vector<int>& boundary_vertices() const { return mesh->boundary_vertices(); }
    const std::vector<int>& boundary_edges() const { return mesh->boundary_edges(); }
    const std::vector<int>& boundary_faces() const { return mesh->boundary_face_ids(); }
};

/// Assemble the complex.  Element contributions are computed in parallel
/// chunks and reduced in fixed chunk order (deterministic up to FP
/// reassociation); n_threads = 1 gives the bit-reproducible sequential mode.
/// Throws DegenerateTetError on non-positive tet volumes.
CochainComplex build_complex(std::shared_ptr<const TetMesh> mesh, int n_threads = 1);
CochainComplex build_complex(const TetMesh& mesh, int n_threads = 1);

/// Evaluate the Whitney 1-form interpolant of an edge cochain at a point
/// inside tet t (barycentric evaluation; no containment check).
Vec3 whitney1_eval(const TetMesh& mesh, int tet, const Eigen::VectorXd& cochain,
                   const std::array<double, 4>& bary);
Vec3 whitney1_eval(const TetMesh& mesh, int tet, const Eigen::VectorXd& cochain,
                   const Vec3& point);

/// Matrix Market coordinate export (general real).
void write_matrix_market(std::ostream& os, const SpMat& A, const std::string& comment = "");

}  // namespace curlspec
