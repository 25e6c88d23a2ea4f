#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <random>
#include <sstream>

#include "curlspec/complex.hpp"
#include "curlspec/generators.hpp"
#include "curlspec/homology.hpp"

using namespace curlspec;

namespace {

TetMesh single_tet() {
    TetMesh mesh;
    mesh.vertices = {Vec3(0, 0, 0), Vec3(1, 0, 0), Vec3(0, 1, 0), Vec3(0, 0, 1)};
    mesh.tets = {{0, 1, 2, 3}};
    mesh.finalize();
    return mesh;
}

double sparse_abs_max(const SpMat& A) {
    double m = 0;
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it) m = std::max(m, std::abs(it.value()));
    return m;
}

}  // namespace

TEST_CASE("incidence identities d1 d0 = 0 and d2 d1 = 0") {
    for (auto mesh : {single_tet(), generate_ball(1.0, 1), generate_solid_torus(2.0, 0.5, 0)}) {
        auto cc = build_complex(mesh);
        CHECK(sparse_abs_max(SpMat(cc.d1 * cc.d0)) == 0.0);
        CHECK(sparse_abs_max(SpMat(cc.d2 * cc.d1)) == 0.0);
    }
}

TEST_CASE("rank of d0 is V-1 on a connected mesh") {
    auto mesh = generate_ball(1.0, 0);
    auto cc = build_complex(mesh);
    Eigen::MatrixXd d0 = Eigen::MatrixXd(cc.d0);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d0);
    CHECK(qr.rank() == mesh.n_vertices() - 1);
}

TEST_CASE("mass matrices are symmetric positive definite") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    auto cc = build_complex(mesh);
    for (const SpMat* M : {&cc.M0, &cc.M1, &cc.M2}) {
        SpMat diff = *M - SpMat(M->transpose());
        CHECK(sparse_abs_max(diff) < 1e-14 * sparse_abs_max(*M));
        Eigen::SimplicialLDLT<SpMat> ldlt(*M);
        REQUIRE(ldlt.info() == Eigen::Success);
        CHECK(ldlt.vectorD().minCoeff() > 0);
    }
}

TEST_CASE("matrix scaling exponents under mesh scaling") {
    auto mesh = generate_ball(1.0, 0);
    auto cc = build_complex(mesh);
    TetMesh scaled = mesh;
    const double s = 2.0;
    for (auto& p : scaled.vertices) p *= s;
    scaled.finalize();
    auto cs = build_complex(scaled);
    // M0 ~ s^3, M1 ~ s, M2 ~ 1/s, C invariant
    CHECK(sparse_abs_max(SpMat(cs.M0 - s * s * s * cc.M0)) < 1e-12 * sparse_abs_max(cc.M0));
    CHECK(sparse_abs_max(SpMat(cs.M1 - s * cc.M1)) < 1e-12 * sparse_abs_max(cc.M1));
    CHECK(sparse_abs_max(SpMat(cs.M2 - (1.0 / s) * cc.M2)) < 1e-12 * sparse_abs_max(cc.M2));
    CHECK(sparse_abs_max(SpMat(cs.C - cc.C)) < 1e-12 * std::max(1.0, sparse_abs_max(cc.C)));
}

TEST_CASE("curl of the edge interpolant matches the face interpolant of d1 v") {
    auto mesh = generate_ball(1.0, 0);
    auto cc = build_complex(mesh);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(mesh.n_edges());
    for (int e = 0; e < mesh.n_edges(); ++e) v[e] = gauss(rng);
    Eigen::VectorXd dv = cc.d1 * v;

    for (int t = 0; t < std::min(20, mesh.n_tets()); ++t) {
        const auto& T = mesh.tets[t];
        auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                       mesh.vertices[T[2]], mesh.vertices[T[3]]);
        Vec3 curl_v = Vec3::Zero();
        static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
        for (const auto& pr : ep) {
            int a = pr[0], b = pr[1];
            if (T[a] > T[b]) std::swap(a, b);
            curl_v += v[mesh.edge_index(T[a], T[b])] * 2.0 * g[a].cross(g[b]);
        }
        // Whitney face basis at the centroid (all barycentrics 1/4):
        // psi = 2(la gb x gc + lb gc x ga + lc ga x gb) = (1/2)(gb x gc + ...)
        Vec3 psi_sum = Vec3::Zero();
        static const int fp[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        for (const auto& tri : fp) {
            std::array<int, 3> s{tri[0], tri[1], tri[2]};
            std::sort(s.begin(), s.end(), [&](int x, int y) { return T[x] < T[y]; });
            int f = mesh.face_index(T[s[0]], T[s[1]], T[s[2]]);
            Vec3 val = 0.5 * (g[s[1]].cross(g[s[2]]) + g[s[2]].cross(g[s[0]]) +
                              g[s[0]].cross(g[s[1]]));
            psi_sum += dv[f] * val;
        }
        CHECK((curl_v - psi_sum).norm() < 1e-10 * std::max(1.0, curl_v.norm()));
    }
}

TEST_CASE("face Whitney form has unit flux through its face") {
    auto mesh = single_tet();
    const auto& T = mesh.tets[0];
    auto g = barycentric_gradients(mesh.vertices[0], mesh.vertices[1], mesh.vertices[2],
                                   mesh.vertices[3]);
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& tri = mesh.faces()[f];
        Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        Vec3 nu = triangle_normal(a, b, c);
        double area = triangle_area(a, b, c);
        Vec3 centroid = (a + b + c) / 3.0;
        auto slot = [&](int gv) {
            for (int i = 0; i < 4; ++i)
                if (T[i] == gv) return i;
            return -1;
        };
        int sa = slot(tri[0]), sb = slot(tri[1]), sc = slot(tri[2]);
        std::array<double, 4> bary{};
        for (int i = 0; i < 4; ++i)
            bary[i] = (i == 0 ? 1.0 : 0.0) + g[i].dot(centroid - mesh.vertices[T[0]]);
        Vec3 psi = 2.0 * (bary[sa] * g[sb].cross(g[sc]) + bary[sb] * g[sc].cross(g[sa]) +
                          bary[sc] * g[sa].cross(g[sb]));
        CHECK(std::abs(psi.dot(nu)) * area == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("curl pairing matches per-tet quadrature") {
    auto mesh = generate_ball(1.0, 0);
    auto cc = build_complex(mesh);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v(mesh.n_edges()), w(mesh.n_edges());
    for (int e = 0; e < mesh.n_edges(); ++e) {
        v[e] = gauss(rng);
        w[e] = gauss(rng);
    }
    // w^T C v = integral curl(W1 w) . (W1 v)
    double direct = 0;
    static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int t = 0; t < mesh.n_tets(); ++t) {
        const auto& T = mesh.tets[t];
        auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                       mesh.vertices[T[2]], mesh.vertices[T[3]]);
        double vol = tet_volume(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                mesh.vertices[T[3]]);
        Vec3 curl_w = Vec3::Zero(), int_v = Vec3::Zero();
        for (const auto& pr : ep) {
            int a = pr[0], b = pr[1];
            if (T[a] > T[b]) std::swap(a, b);
            int e = mesh.edge_index(T[a], T[b]);
            curl_w += w[e] * 2.0 * g[a].cross(g[b]);
            int_v += v[e] * 0.25 * vol * (g[b] - g[a]);
        }
        direct += curl_w.dot(int_v);
    }
    double via_matrix = w.transpose() * (cc.C * v);
    CHECK(via_matrix == doctest::Approx(direct).epsilon(1e-10));
}

TEST_CASE("skew part pairs interior-supported cochains to zero") {
    auto mesh = generate_ball(1.0, 1);
    auto cc = build_complex(mesh);
    SpMat skew = cc.curl_skew();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd v = Eigen::VectorXd::Zero(mesh.n_edges());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(mesh.n_edges());
    for (int e = 0; e < mesh.n_edges(); ++e) {
        if (mesh.edge_on_boundary(e)) continue;
        v[e] = gauss(rng);
        w[e] = gauss(rng);
    }
    CHECK(std::abs(v.dot(skew * w)) < 1e-12 * v.norm() * w.norm());
}

TEST_CASE("periods and fluxes") {
    auto mesh = generate_solid_torus(2.0, 0.5, 0);
    auto cc = build_complex(mesh);
    auto basis = homology_basis(mesh);
    REQUIRE(basis.total_genus == 1);

    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss;

    SUBCASE("gradients have zero periods") {
        Eigen::VectorXd p(mesh.n_vertices());
        for (int i = 0; i < mesh.n_vertices(); ++i) p[i] = gauss(rng);
        auto periods = period_vector(cc, basis, (cc.d0 * p).cast<std::complex<double>>());
        CHECK(periods.cwiseAbs().maxCoeff() < 1e-12 * p.cwiseAbs().maxCoeff());
    }

    SUBCASE("discrete Stokes: flux of d1 v equals the rim period") {
        Eigen::VectorXd v(mesh.n_edges());
        for (int e = 0; e < mesh.n_edges(); ++e) v[e] = gauss(rng);
        auto flux = flux_vector(cc, basis, (cc.d1 * v).cast<std::complex<double>>());
        auto periods = period_vector(cc, basis, v.cast<std::complex<double>>());
        CHECK(std::abs(flux[0] - periods[0]) < 1e-10 * std::max(1.0, std::abs(flux[0])));
    }

    SUBCASE("flux of a cochain supported away from the cut is zero") {
        Eigen::VectorXcd u = Eigen::VectorXcd::Zero(mesh.n_faces());
        auto sigma = mesh.surface_chain("sigma1");
        std::vector<char> on_cut(mesh.n_faces(), 0);
        for (const auto& fc : sigma) on_cut[fc.face] = 1;
        int painted = 0;
        for (int f = 0; f < mesh.n_faces() && painted < 40; ++f) {
            if (on_cut[f]) continue;
            u[f] = gauss(rng);
            ++painted;
        }
        CHECK(flux_vector(cc, basis, u).cwiseAbs().maxCoeff() == 0.0);
    }

    SUBCASE("azimuthal 1-form dtheta/2pi has beta period 1, alpha period 0") {
        Eigen::VectorXcd v(mesh.n_edges());
        for (int e = 0; e < mesh.n_edges(); ++e) {
            const auto& ev = mesh.edges()[e];
            double t0 = std::atan2(mesh.vertices[ev[0]].y(), mesh.vertices[ev[0]].x());
            double t1 = std::atan2(mesh.vertices[ev[1]].y(), mesh.vertices[ev[1]].x());
            double dt = t1 - t0;
            while (dt > M_PI) dt -= 2 * M_PI;
            while (dt < -M_PI) dt += 2 * M_PI;
            v[e] = dt / (2 * M_PI);
        }
        auto periods = period_vector(cc, basis, v);
        CHECK(std::abs(periods[0]) < 1e-10);        // alpha (meridian)
        CHECK(std::abs(periods[1] - 1.0) < 1e-10);  // beta (longitude)
    }
}

TEST_CASE("matrix market export") {
    auto mesh = single_tet();
    auto cc = build_complex(mesh);
    std::ostringstream os;
    write_matrix_market(os, cc.M1, "edge mass");
    std::string s = os.str();
    CHECK(s.find("%%MatrixMarket matrix coordinate real general") == 0);
    CHECK(s.find("6 6") != std::string::npos);
}

TEST_CASE("parallel assembly matches sequential") {
    auto mesh = generate_ball(1.0, 1);
    auto seq = build_complex(mesh, 1);
    auto par = build_complex(mesh, 4);
    CHECK(sparse_abs_max(SpMat(seq.M1 - par.M1)) < 1e-13 * sparse_abs_max(seq.M1));
    CHECK(sparse_abs_max(SpMat(seq.C - par.C)) < 1e-13 * std::max(1.0, sparse_abs_max(seq.C)));
}
