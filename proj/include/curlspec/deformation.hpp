#pragma once

#include <Eigen/Dense>
#include <functional>

#include "curlspec/tetmesh.hpp"

namespace curlspec {

/// Domain deformation data: a scalar normal speed f on boundary vertices and
/// a volumetric displacement X (one vector per vertex) extending f*nu.
/// Invariant: at each boundary vertex, X . nu == boundary_speed to 1e-10
/// relative (pure linear algebra, no discretization error involved).
struct DeformationField {
    Eigen::VectorXd boundary_speed;        // per boundary vertex, in boundary_vertices() order
    Eigen::Matrix<double, Eigen::Dynamic, 3> displacement;  // per vertex
    std::string description;
};

/// Move vertices by t * displacement; connectivity and tags are copied
/// verbatim.  Throws TetInversionError if any tet volume becomes <= 0.
TetMesh deform(const TetMesh& mesh, const DeformationField& field, double t);

/// Componentwise harmonic extension of the boundary data f*nu: solves the
/// discrete Laplace equation with Dirichlet values f(v)*nu(v) at boundary
/// vertices.  boundary_speed is given in boundary_vertices() order.
DeformationField harmonic_extension(const TetMesh& mesh, const Eigen::VectorXd& boundary_speed);

/// Speed f = X.nu for the dilation field X = x; the volumetric displacement
/// is the exact position field, so deform(mesh, ., t) scales coordinates by
/// (1+t) exactly.
DeformationField dilation_field(const TetMesh& mesh);

/// Speed f = e.nu for a rigid translation along the unit vector e; the
/// volumetric displacement is constant, so deformation preserves volume.
DeformationField translation_field(const TetMesh& mesh, const Vec3& direction);

/// Harmonic extension of a scalar function evaluated at boundary vertices.
DeformationField normal_speed_field(const TetMesh& mesh,
                                    const std::function<double(const Vec3&)>& speed);

/// Real spherical harmonic Y_{l,m} (orthonormalized, Condon-Shortley-free)
/// evaluated at a point on the unit sphere through x/|x|.
double real_spherical_harmonic(int l, int m, const Vec3& x);

}  // namespace curlspec
