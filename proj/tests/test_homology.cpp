#include <doctest.h>

#include "curlspec/generators.hpp"
#include "curlspec/homology.hpp"
#include "curlspec/lagrangian.hpp"

using namespace curlspec;

namespace {

Eigen::MatrixXi standard_symplectic(int l) {
    Eigen::MatrixXi O = Eigen::MatrixXi::Zero(2 * l, 2 * l);
    for (int j = 0; j < l; ++j) {
        O(j, l + j) = 1;
        O(l + j, j) = -1;
    }
    return O;
}

}  // namespace

TEST_CASE("ball has empty homology basis") {
    auto basis = homology_basis(generate_ball(1.0, 0));
    CHECK(basis.total_genus == 0);
    CHECK(basis.alpha_cycles.empty());
    CHECK(basis.intersection_matrix.rows() == 0);
}

TEST_CASE("tagged torus basis") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    auto basis = homology_basis(mesh);
    CHECK(basis.total_genus == 1);
    CHECK(basis.genus_per_component == std::vector<int>{1});
    REQUIRE(basis.intersection_matrix.rows() == 2);
    CHECK(basis.intersection_matrix == standard_symplectic(1));
}

TEST_CASE("tagged genus-2 basis has the standard symplectic pairing") {
    auto mesh = generate_handlebody(2, 0);
    auto basis = homology_basis(mesh);
    CHECK(basis.total_genus == 2);
    REQUIRE(basis.intersection_matrix.rows() == 4);
    CHECK(basis.intersection_matrix == standard_symplectic(2));
}

TEST_CASE("generic path on the untagged torus") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    mesh.surface_tags.clear();
    mesh.curve_tags.clear();
    auto basis = homology_basis(mesh);
    CHECK(basis.total_genus == 1);
    REQUIRE(basis.alpha_cycles.size() == 1);
    REQUIRE(basis.beta_cycles.size() == 1);
    REQUIRE(basis.cut_surfaces.size() == 1);
    // symplectic by construction
    CHECK(basis.intersection_matrix == standard_symplectic(1));
    // cut surface rim stays on the boundary
    for (const auto& ec : chain_boundary(mesh, basis.cut_surfaces[0]))
        CHECK(mesh.edge_on_boundary(ec.edge));
    // alpha bounds the cut surface exactly
    auto rim = chain_boundary(mesh, basis.cut_surfaces[0]);
    std::map<int, int> diff;
    for (const auto& ec : rim) diff[ec.edge] += ec.sign;
    for (const auto& ec : basis.alpha_cycles[0]) diff[ec.edge] -= ec.sign;
    for (const auto& [e, c] : diff) CHECK(c == 0);
}

TEST_CASE("generic path on the untagged genus-2 handlebody") {
    auto mesh = generate_handlebody(2, 0);
    mesh.surface_tags.clear();
    mesh.curve_tags.clear();
    auto basis = homology_basis(mesh);
    CHECK(basis.total_genus == 2);
    CHECK(basis.intersection_matrix == standard_symplectic(2));
    for (int j = 0; j < 2; ++j) {
        auto rim = chain_boundary(mesh, basis.cut_surfaces[j]);
        std::map<int, int> diff;
        for (const auto& ec : rim) diff[ec.edge] += ec.sign;
        for (const auto& ec : basis.alpha_cycles[j]) diff[ec.edge] -= ec.sign;
        for (const auto& [e, c] : diff) CHECK(c == 0);
    }
}

TEST_CASE("intersection oracle rejects non-bases") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    auto alpha = mesh.curve_chain("alpha1");
    CHECK_THROWS_AS(intersection_matrix_oracle(mesh, {alpha, alpha}), Error);
}

TEST_CASE("zero-flux Lagrangian of the torus") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    auto basis = homology_basis(mesh);
    auto lag = zero_flux_lagrangian(mesh, basis);
    REQUIRE(lag.F.rows() == 1);
    CHECK(lag.F(0, 0) == std::complex<double>(1, 0));
    CHECK(lag.F(0, 1) == std::complex<double>(0, 0));
    CHECK(lag.reality_flag);
    validate_lagrangian(lag, basis);  // must not throw
}

TEST_CASE("lagrangian validation") {
    auto mesh = generate_handlebody(2, 0);
    auto basis = homology_basis(mesh);

    SUBCASE("zero-flux preset is isotropic") {
        auto lag = zero_flux_lagrangian(mesh, basis);
        validate_lagrangian(lag, basis);
    }

    SUBCASE("non-isotropic rows are rejected") {
        // alpha1 and beta1 periods together are not isotropic
        Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(2, 4);
        F(0, 0) = 1;  // alpha1 period
        F(1, 2) = 1;  // beta1 period
        auto lag = custom_lagrangian(F);
        CHECK_THROWS_AS(validate_lagrangian(lag, basis), InconsistentLagrangianError);
        lag.allow_non_lagrangian = true;
        validate_lagrangian(lag, basis);  // fixture escape hatch
    }

    SUBCASE("dependent rows are rejected") {
        Eigen::MatrixXcd F = Eigen::MatrixXcd::Zero(2, 4);
        F(0, 0) = 1;
        F(1, 0) = 2;
        CHECK_THROWS_AS(validate_lagrangian(custom_lagrangian(F), basis),
                        InconsistentLagrangianError);
    }
}
