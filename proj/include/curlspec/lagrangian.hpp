#pragma once

#include <Eigen/Dense>
#include <string>

#include "curlspec/homology.hpp"

namespace curlspec {

/// An ell-dimensional isotropic subspace of boundary 1-cohomology encoded as
/// period constraints: a field's trace class is admissible iff
/// F * period_vector = 0.  Rows of F must be linearly independent and the
/// row span isotropic for the intersection matrix (F Omega F^T = 0), which
/// together with rank = ell makes the constrained class space Lagrangian.
struct LagrangianSpec {
    Eigen::MatrixXcd F;       // ell' x 2*ell
    std::string preset_name;  // "zero_flux" or "custom"
    bool reality_flag = true;
    /// Test fixture escape hatch: skip the rank/isotropy validation so that
    /// deliberately non-Lagrangian constraint sets can be fed to the same
    /// solver code path as a negative control.
    bool allow_non_lagrangian = false;

    bool is_real() const;
    Eigen::MatrixXd real_F() const;  // valid when is_real()
};

/// The Giga-Yoshida preset: circulation along the cut-surface boundaries
/// vanishes.  For tagged generator meshes (alpha_j = boundary of sigma_j)
/// this is F = [I | 0] in (alpha, beta) period coordinates; in general the
/// classes of the cut boundaries are expressed in the basis cycles.
LagrangianSpec zero_flux_lagrangian(const TetMesh& mesh, const HomologyBasis& basis);

/// Custom Lagrangian from an explicit constraint matrix.
LagrangianSpec custom_lagrangian(const Eigen::MatrixXcd& F);

/// Validates rank and isotropy against the basis intersection matrix.
/// Throws InconsistentLagrangianError (unless allow_non_lagrangian is set).
void validate_lagrangian(const LagrangianSpec& lag, const HomologyBasis& basis);

}  // namespace curlspec
