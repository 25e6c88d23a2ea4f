#include <doctest.h>

#include <cmath>
#include <sstream>

#include "curlspec/deformation.hpp"
#include "curlspec/generators.hpp"
#include "curlspec/mesh_io.hpp"

using namespace curlspec;

TEST_CASE("ball generator topology and geometry") {
    for (int r = 0; r <= 2; ++r) {
        auto mesh = generate_ball(1.0, r);
        CHECK(mesh.euler_characteristic() == 1);  // contractible
        CHECK(mesh.n_boundary_components() == 1);
        CHECK(mesh.boundary_component_euler()[0] == 2);  // sphere
        CHECK(mesh.total_genus() == 0);
        CHECK(mesh.volume() > 0);
    }
    // volume converges to 4pi/3 (inscribed polyhedron, error O(h^2))
    double v2 = generate_ball(1.0, 2).volume();
    double v3 = generate_ball(1.0, 3).volume();
    double exact = 4.0 * M_PI / 3.0;
    CHECK(std::abs(v2 - exact) / exact < 0.02);
    CHECK(std::abs(v3 - exact) < std::abs(v2 - exact));
    // boundary area within 2% of 4pi at refinement 2
    double a2 = generate_ball(1.0, 2).boundary_area();
    CHECK(std::abs(a2 - 4.0 * M_PI) / (4.0 * M_PI) < 0.02);
}

TEST_CASE("ball volume scales as s^3 exactly") {
    auto mesh = generate_ball(1.0, 1);
    double v = mesh.volume();
    TetMesh scaled = mesh;
    for (auto& p : scaled.vertices) p *= 2.0;
    scaled.finalize();
    CHECK(scaled.volume() == doctest::Approx(8.0 * v).epsilon(1e-14));
}

TEST_CASE("solid torus generator") {
    auto mesh = generate_solid_torus(2.0, 0.5, 1);
    CHECK(mesh.euler_characteristic() == 0);
    CHECK(mesh.n_boundary_components() == 1);
    CHECK(mesh.boundary_component_euler()[0] == 0);  // torus
    CHECK(mesh.total_genus() == 1);
    CHECK(mesh.surface_tags.count("sigma1") == 1);
    CHECK(mesh.curve_tags.count("alpha1") == 1);
    CHECK(mesh.curve_tags.count("beta1") == 1);

    // cut disk boundary supported on boundary edges only
    auto rim = chain_boundary(mesh, mesh.surface_chain("sigma1"));
    CHECK(!rim.empty());
    for (const auto& ec : rim) CHECK(mesh.edge_on_boundary(ec.edge));

    // volume oracle 2 pi^2 R r^2
    double exact = 2.0 * M_PI * M_PI * 2.0 * 0.25;
    double v2 = generate_solid_torus(2.0, 0.5, 2).volume();
    CHECK(std::abs(v2 - exact) / exact < 0.02);

    CHECK_THROWS_AS(generate_solid_torus(0.5, 2.0, 1), Error);  // degenerate params
}

TEST_CASE("genus-2 handlebody generator") {
    auto mesh = generate_handlebody(2, 0);
    CHECK(mesh.n_boundary_components() == 1);
    CHECK(mesh.boundary_component_euler()[0] == -2);  // chi = 2 - 2g
    CHECK(mesh.total_genus() == 2);
    CHECK(mesh.euler_characteristic() == -1);  // 1 - g
    CHECK(mesh.surface_tags.size() == 2);
    CHECK(mesh.curve_tags.size() == 4);
    for (const auto& name : {"sigma1", "sigma2"}) {
        auto rim = chain_boundary(mesh, mesh.surface_chain(name));
        for (const auto& ec : rim) CHECK(mesh.edge_on_boundary(ec.edge));
    }
    CHECK_THROWS_AS(generate_handlebody(3, 0), Error);
}

TEST_CASE("deform basics") {
    auto mesh = generate_ball(1.0, 1);

    SUBCASE("t = 0 leaves coordinates unchanged") {
        auto f = dilation_field(mesh);
        auto out = deform(mesh, f, 0.0);
        for (int v = 0; v < mesh.n_vertices(); ++v)
            CHECK((out.vertices[v] - mesh.vertices[v]).norm() == 0.0);
        CHECK(out.tets == mesh.tets);
        CHECK(out.edges() == mesh.edges());  // incidence identical
    }

    SUBCASE("dilation scales coordinates by 1+t exactly") {
        auto f = dilation_field(mesh);
        auto out = deform(mesh, f, 0.25);
        for (int v = 0; v < mesh.n_vertices(); ++v)
            CHECK((out.vertices[v] - 1.25 * mesh.vertices[v]).norm() == 0.0);
    }

    SUBCASE("translation preserves volume to machine precision") {
        auto f = translation_field(mesh, Vec3(1, 0, 0));
        auto out = deform(mesh, f, 0.3);
        CHECK(out.volume() == doctest::Approx(mesh.volume()).epsilon(1e-14));
    }

    SUBCASE("inversion raises TetInversion") {
        auto f = dilation_field(mesh);
        CHECK_THROWS_AS(deform(mesh, f, -1.5), TetInversionError);
    }
}

TEST_CASE("harmonic extension") {
    auto mesh = generate_ball(1.0, 1);
    const auto& bv = mesh.boundary_vertices();

    SUBCASE("zero data gives zero field") {
        auto f = harmonic_extension(mesh, Eigen::VectorXd::Zero(bv.size()));
        CHECK(f.displacement.norm() == doctest::Approx(0.0).epsilon(1e-12));
    }

    SUBCASE("constant speed attains its maximum on the boundary") {
        auto f = harmonic_extension(mesh, Eigen::VectorXd::Ones(bv.size()));
        double bmax = 0, imax = 0;
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            double n = f.displacement.row(v).norm();
            if (mesh.vertex_on_boundary(v)) bmax = std::max(bmax, n);
            else imax = std::max(imax, n);
        }
        CHECK(imax <= bmax + 1e-12);
    }

    SUBCASE("f = x.nu reproduces the position field") {
        // x is componentwise harmonic, so the extension of its boundary trace
        // is x itself up to the interpolation of nu at vertices.
        Eigen::VectorXd speed(bv.size());
        for (size_t k = 0; k < bv.size(); ++k)
            speed[k] = mesh.vertices[bv[k]].dot(mesh.vertex_normal(bv[k]));
        auto f = harmonic_extension(mesh, speed);
        double err = 0, scale = 0;
        for (int v = 0; v < mesh.n_vertices(); ++v) {
            if (mesh.vertex_on_boundary(v)) continue;
            err = std::max(err, (f.displacement.row(v).transpose() - mesh.vertices[v]).norm());
            scale = std::max(scale, mesh.vertices[v].norm());
        }
        // boundary data x*nu differs from x by the vertex-normal interpolation;
        // allow a generous discretization tolerance at refinement 1
        CHECK(err / scale < 0.15);
    }

    SUBCASE("extension is linear in the boundary data") {
        Eigen::VectorXd fa = Eigen::VectorXd::Random(bv.size());
        Eigen::VectorXd fb = Eigen::VectorXd::Random(bv.size());
        auto ea = harmonic_extension(mesh, fa);
        auto eb = harmonic_extension(mesh, fb);
        auto eab = harmonic_extension(mesh, 2.0 * fa + 3.0 * fb);
        double diff =
            (eab.displacement - 2.0 * ea.displacement - 3.0 * eb.displacement).norm();
        CHECK(diff / std::max(1.0, eab.displacement.norm()) < 1e-9);
    }

}

TEST_CASE("deformation field normal-component invariant") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    const auto& bv = mesh.boundary_vertices();
    Eigen::VectorXd speed = Eigen::VectorXd::Random(bv.size());
    auto f = harmonic_extension(mesh, speed);
    for (size_t k = 0; k < bv.size(); ++k) {
        double ncomp = f.displacement.row(bv[k]).dot(mesh.vertex_normal(bv[k]));
        CHECK(std::abs(ncomp - speed[k]) < 1e-10 * std::max(1.0, std::abs(speed[k])));
    }
}

TEST_CASE("tmesh round trip") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    std::ostringstream os;
    write_tmesh(os, mesh);
    std::istringstream is(os.str());
    auto back = read_tmesh(is);
    CHECK(back.n_vertices() == mesh.n_vertices());
    CHECK(back.tets == mesh.tets);
    CHECK(back.domain_name == mesh.domain_name);
    CHECK(back.surface_tags == mesh.surface_tags);
    CHECK(back.curve_tags == mesh.curve_tags);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        CHECK((back.vertices[v] - mesh.vertices[v]).norm() == 0.0);
}

TEST_CASE("msh 2.2 reader") {
    // one tet + one tagged boundary triangle
    const char* msh =
        "$MeshFormat\n2.2 0 8\n$EndMeshFormat\n"
        "$Nodes\n4\n1 0 0 0\n2 1 0 0\n3 0 1 0\n4 0 0 1\n$EndNodes\n"
        "$Elements\n2\n1 4 2 0 1 1 2 3 4\n2 2 2 7 1 1 2 3\n$EndElements\n";
    std::istringstream is(msh);
    auto mesh = read_msh22(is);
    CHECK(mesh.n_tets() == 1);
    CHECK(mesh.n_vertices() == 4);
    CHECK(mesh.surface_tags.count("physical_7") == 1);
    CHECK(mesh.volume() == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("quality report") {
    auto q = generate_ball(1.0, 1).quality();
    // radially mapped cube corners are the worst cells
    CHECK(q.min_dihedral_deg > 2.0);
    CHECK(q.max_aspect < 40.0);
    CHECK(q.h_max > 0.0);
}
