#include "curlspec/deformation.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <cmath>
#include <sstream>

namespace curlspec {

TetMesh deform(const TetMesh& mesh, const DeformationField& field, double t) {
    if (field.displacement.rows() != mesh.n_vertices())
        throw Error("deform: displacement size mismatch");
    TetMesh out;
    out.domain_name = mesh.domain_name;
    out.surface_tags = mesh.surface_tags;
    out.curve_tags = mesh.curve_tags;
    out.tets = mesh.tets;
    out.vertices.resize(mesh.vertices.size());
    for (int v = 0; v < mesh.n_vertices(); ++v)
        out.vertices[v] = mesh.vertices[v] + t * field.displacement.row(v).transpose();
    for (size_t i = 0; i < out.tets.size(); ++i) {
        const auto& T = out.tets[i];
        double vol = tet_volume(out.vertices[T[0]], out.vertices[T[1]], out.vertices[T[2]],
                                out.vertices[T[3]]);
        if (!(vol > 0)) {
            std::ostringstream os;
            os << "deform: tet " << i << " inverted at t = " << t << " (volume " << vol << ")";
            throw TetInversionError(os.str());
        }
    }
    out.finalize();
    return out;
}

DeformationField harmonic_extension(const TetMesh& mesh, const Eigen::VectorXd& boundary_speed) {
    const auto& bverts = mesh.boundary_vertices();
    if (boundary_speed.size() != static_cast<Eigen::Index>(bverts.size()))
        throw Error("harmonic_extension: boundary_speed size mismatch");
    const int nv = mesh.n_vertices();

    // P1 stiffness matrix, assembled per tet from barycentric gradients.
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(mesh.tets.size() * 16);
    for (const auto& T : mesh.tets) {
        auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                       mesh.vertices[T[2]], mesh.vertices[T[3]]);
        double vol = tet_volume(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                mesh.vertices[T[3]]);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                trips.emplace_back(T[a], T[b], vol * g[a].dot(g[b]));
    }
    Eigen::SparseMatrix<double> K(nv, nv);
    K.setFromTriplets(trips.begin(), trips.end());

    // Dirichlet values f*nu at boundary vertices.
    Eigen::Matrix<double, Eigen::Dynamic, 3> dirichlet =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(nv, 3);
    std::vector<char> fixed(nv, 0);
    for (size_t k = 0; k < bverts.size(); ++k) {
        int v = bverts[k];
        fixed[v] = 1;
        dirichlet.row(v) = (boundary_speed[k] * mesh.vertex_normal(v)).transpose();
    }

    // Reduce to interior unknowns.
    std::vector<int> idx(nv, -1);
    int ni = 0;
    for (int v = 0; v < nv; ++v)
        if (!fixed[v]) idx[v] = ni++;

    DeformationField field;
    field.boundary_speed = boundary_speed;
    field.displacement = dirichlet;
    field.description = "harmonic extension";
    if (ni == 0) return field;

    std::vector<Eigen::Triplet<double>> itrips;
    Eigen::Matrix<double, Eigen::Dynamic, 3> rhs =
        Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(ni, 3);
    for (int col = 0; col < K.outerSize(); ++col) {
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
            int r = static_cast<int>(it.row()), c = col;
            if (fixed[r]) continue;
            if (fixed[c]) rhs.row(idx[r]) -= it.value() * dirichlet.row(c);
            else itrips.emplace_back(idx[r], idx[c], it.value());
        }
    }
    Eigen::SparseMatrix<double> Kii(ni, ni);
    Kii.setFromTriplets(itrips.begin(), itrips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kii);
    if (solver.info() != Eigen::Success)
        throw Error("harmonic_extension: factorization of the interior stiffness failed");
    Eigen::Matrix<double, Eigen::Dynamic, 3> sol = solver.solve(rhs);
    double residual = (Kii * sol - rhs).norm();
    double scale = std::max(1.0, rhs.norm());
    if (!(residual / scale < 1e-8)) {
        std::ostringstream os;
        os << "harmonic_extension: solver residual " << residual / scale;
        throw Error(os.str());
    }
    for (int v = 0; v < nv; ++v)
        if (!fixed[v]) field.displacement.row(v) = sol.row(idx[v]);
    return field;
}

DeformationField dilation_field(const TetMesh& mesh) {
    DeformationField field;
    field.description = "dilation X = x";
    field.displacement.resize(mesh.n_vertices(), 3);
    for (int v = 0; v < mesh.n_vertices(); ++v)
        field.displacement.row(v) = mesh.vertices[v].transpose();
    const auto& bverts = mesh.boundary_vertices();
    field.boundary_speed.resize(bverts.size());
    for (size_t k = 0; k < bverts.size(); ++k)
        field.boundary_speed[k] = mesh.vertices[bverts[k]].dot(mesh.vertex_normal(bverts[k]));
    return field;
}

DeformationField translation_field(const TetMesh& mesh, const Vec3& direction) {
    DeformationField field;
    field.description = "translation";
    field.displacement.resize(mesh.n_vertices(), 3);
    field.displacement.rowwise() = direction.transpose();
    const auto& bverts = mesh.boundary_vertices();
    field.boundary_speed.resize(bverts.size());
    for (size_t k = 0; k < bverts.size(); ++k)
        field.boundary_speed[k] = direction.dot(mesh.vertex_normal(bverts[k]));
    return field;
}

DeformationField normal_speed_field(const TetMesh& mesh,
                                    const std::function<double(const Vec3&)>& speed) {
    const auto& bverts = mesh.boundary_vertices();
    Eigen::VectorXd f(bverts.size());
    for (size_t k = 0; k < bverts.size(); ++k) f[k] = speed(mesh.vertices[bverts[k]]);
    return harmonic_extension(mesh, f);
}

double real_spherical_harmonic(int l, int m, const Vec3& x) {
    Vec3 n = x.norm() > 0 ? Vec3(x / x.norm()) : Vec3(0, 0, 1);
    double ct = n.z();
    double phi = std::atan2(n.y(), n.x());
    int am = std::abs(m);
    // Associated Legendre P_l^m(ct) by the standard recurrence.
    double pmm = 1.0;
    double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    for (int k = 1; k <= am; ++k) pmm *= -(2 * k - 1) * st;
    double plm;
    if (l == am) {
        plm = pmm;
    } else {
        double pm1 = ct * (2 * am + 1) * pmm;
        if (l == am + 1) {
            plm = pm1;
        } else {
            double p = 0;
            for (int ll = am + 2; ll <= l; ++ll) {
                p = ((2 * ll - 1) * ct * pm1 - (ll + am - 1) * pmm) / (ll - am);
                pmm = pm1;
                pm1 = p;
            }
            plm = pm1;
        }
    }
    double norm = std::sqrt((2.0 * l + 1) / (4.0 * M_PI));
    for (int k = l - am + 1; k <= l + am; ++k) norm /= std::sqrt(static_cast<double>(k));
    if (m == 0) return norm * plm;
    double sqrt2 = std::sqrt(2.0);
    if (m > 0) return sqrt2 * norm * plm * std::cos(am * phi);
    return sqrt2 * norm * plm * std::sin(am * phi);
}

}  // namespace curlspec
