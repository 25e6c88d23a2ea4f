#include "curlspec/complex.hpp"

#include <future>
#include <iomanip>
#include <ostream>

namespace curlspec {

namespace {

using Triplet = Eigen::Triplet<double>;

// Local edge pairs and face triples of a tet in global-sorted order are
// produced on the fly; lv holds the tet's vertices sorted by global id so
// that Whitney sign conventions match the canonical tables.
struct TetLocal {
    std::array<int, 4> lv;        // local slots sorted by global id
    std::array<Vec3, 4> g;        // barycentric gradients, slot order
    double vol;
};

TetLocal tet_local(const TetMesh& mesh, int t) {
    TetLocal L;
    const auto& T = mesh.tets[t];
    L.g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                mesh.vertices[T[3]]);
    L.vol = tet_volume(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                       mesh.vertices[T[3]]);
    if (!(L.vol > 0)) throw DegenerateTetError("build_complex: non-positive tet volume");
    std::array<int, 4> slot{0, 1, 2, 3};
    std::sort(slot.begin(), slot.end(), [&](int a, int b) { return T[a] < T[b]; });
    L.lv = slot;
    return L;
}

void assemble_range(const TetMesh& mesh, int t0, int t1, std::vector<Triplet>& m0,
                    std::vector<Triplet>& m1, std::vector<Triplet>& m2,
                    std::vector<Triplet>& curl) {
    static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    static const int fp[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
    for (int t = t0; t < t1; ++t) {
        TetLocal L = tet_local(mesh, t);
        const auto& T = mesh.tets[t];
        const double V = L.vol;

        // vertex mass: V(1+delta)/20
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                m0.emplace_back(T[a], T[b], V * (a == b ? 2.0 : 1.0) / 20.0);

        // edges in global-sorted order: pair k is (lv[ep[k][0]], lv[ep[k][1]])
        std::array<int, 6> eid;
        std::array<std::array<int, 2>, 6> epair;  // local slots (tail, head), tail<head globally
        for (int k = 0; k < 6; ++k) {
            int sa = L.lv[ep[k][0]], sb = L.lv[ep[k][1]];
            epair[k] = {sa, sb};
            eid[k] = mesh.edge_index(T[sa], T[sb]);
        }
        std::array<std::array<int, 3>, 4> ftri;  // local slots sorted by global id
        std::array<int, 4> fid;
        for (int k = 0; k < 4; ++k) {
            int sa = L.lv[fp[k][0]], sb = L.lv[fp[k][1]], sc = L.lv[fp[k][2]];
            ftri[k] = {sa, sb, sc};
            fid[k] = mesh.face_index(T[sa], T[sb], T[sc]);
        }

        auto lam2 = [V](int x, int y) { return V * (x == y ? 2.0 : 1.0) / 20.0; };

        // edge Whitney mass and curl pairing
        for (int i = 0; i < 6; ++i) {
            int a = epair[i][0], b = epair[i][1];
            Vec3 curl_i = 2.0 * L.g[a].cross(L.g[b]);  // constant on the tet
            for (int j = 0; j < 6; ++j) {
                int c = epair[j][0], d = epair[j][1];
                double mij = lam2(a, c) * L.g[b].dot(L.g[d]) - lam2(a, d) * L.g[b].dot(L.g[c]) -
                             lam2(b, c) * L.g[a].dot(L.g[d]) + lam2(b, d) * L.g[a].dot(L.g[c]);
                m1.emplace_back(eid[i], eid[j], mij);
                // integral of phi_j over the tet is (V/4)(g_d - g_c)
                double cij = curl_i.dot(0.25 * V * (L.g[d] - L.g[c]));
                curl.emplace_back(eid[i], eid[j], cij);
            }
        }

        // face Whitney mass: psi_f = 2(la gb x gc + lb gc x ga + lc ga x gb)
        std::array<std::array<Vec3, 3>, 4> fvec;
        for (int k = 0; k < 4; ++k) {
            int a = ftri[k][0], b = ftri[k][1], c = ftri[k][2];
            fvec[k] = {L.g[b].cross(L.g[c]), L.g[c].cross(L.g[a]), L.g[a].cross(L.g[b])};
        }
        for (int i = 0; i < 4; ++i) {
            for (int j = 0; j < 4; ++j) {
                double mij = 0;
                for (int x = 0; x < 3; ++x)
                    for (int y = 0; y < 3; ++y)
                        mij += lam2(ftri[i][x], ftri[j][y]) * fvec[i][x].dot(fvec[j][y]);
                m2.emplace_back(fid[i], fid[j], 4.0 * mij);
            }
        }
    }
}

}  // namespace

SpMat CochainComplex::curl_sym() const {
    SpMat Ct = SpMat(C.transpose());
    return 0.5 * (C + Ct);
}

SpMat CochainComplex::curl_skew() const {
    SpMat Ct = SpMat(C.transpose());
    return C - Ct;
}

CochainComplex build_complex(std::shared_ptr<const TetMesh> mesh_ptr, int n_threads) {
    const TetMesh& mesh = *mesh_ptr;
    if (!mesh.finalized()) throw Error("build_complex: mesh not finalized");
    const int nv = mesh.n_vertices(), ne = mesh.n_edges(), nf = mesh.n_faces(),
              nt = mesh.n_tets();

    CochainComplex cc;
    cc.mesh = mesh_ptr;

    // incidence matrices (exact integer entries)
    {
        std::vector<Triplet> td0, td1, td2;
        td0.reserve(ne * 2);
        for (int e = 0; e < ne; ++e) {
            td0.emplace_back(e, mesh.edges()[e][0], -1.0);
            td0.emplace_back(e, mesh.edges()[e][1], 1.0);
        }
        td1.reserve(nf * 3);
        for (int f = 0; f < nf; ++f) {
            const auto& tri = mesh.faces()[f];
            td1.emplace_back(f, mesh.edge_index(tri[1], tri[2]), 1.0);
            td1.emplace_back(f, mesh.edge_index(tri[0], tri[2]), -1.0);
            td1.emplace_back(f, mesh.edge_index(tri[0], tri[1]), 1.0);
        }
        td2.reserve(nt * 4);
        static const int fp[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        static const int fsign[4] = {1, -1, 1, -1};
        for (int t = 0; t < nt; ++t) {
            const auto& T = mesh.tets[t];
            for (int k = 0; k < 4; ++k) {
                int a = T[fp[k][0]], b = T[fp[k][1]], c = T[fp[k][2]];
                td2.emplace_back(t, mesh.face_index(a, b, c),
                                 fsign[k] * TetMesh::triple_parity(a, b, c));
            }
        }
        cc.d0.resize(ne, nv);
        cc.d0.setFromTriplets(td0.begin(), td0.end());
        cc.d1.resize(nf, ne);
        cc.d1.setFromTriplets(td1.begin(), td1.end());
        cc.d2.resize(nt, nf);
        cc.d2.setFromTriplets(td2.begin(), td2.end());
    }

    // Galerkin matrices, chunked over tets.
    int chunks = std::max(1, n_threads);
    std::vector<std::vector<Triplet>> m0(chunks), m1(chunks), m2(chunks), curl(chunks);
    if (chunks == 1) {
        assemble_range(mesh, 0, nt, m0[0], m1[0], m2[0], curl[0]);
    } else {
        std::vector<std::future<void>> jobs;
        int per = (nt + chunks - 1) / chunks;
        for (int c = 0; c < chunks; ++c) {
            int t0 = c * per, t1 = std::min(nt, (c + 1) * per);
            if (t0 >= t1) break;
            jobs.push_back(std::async(std::launch::async, [&, c, t0, t1] {
                assemble_range(mesh, t0, t1, m0[c], m1[c], m2[c], curl[c]);
            }));
        }
        for (auto& j : jobs) j.get();
    }
    auto gather = [&](std::vector<std::vector<Triplet>>& parts, int rows, int cols) {
        std::vector<Triplet> all;
        size_t total = 0;
        for (auto& p : parts) total += p.size();
        all.reserve(total);
        for (auto& p : parts) all.insert(all.end(), p.begin(), p.end());
        SpMat A(rows, cols);
        A.setFromTriplets(all.begin(), all.end());
        return A;
    };
    cc.M0 = gather(m0, nv, nv);
    cc.M1 = gather(m1, ne, ne);
    cc.M2 = gather(m2, nf, nf);
    cc.C = gather(curl, ne, ne);
    return cc;
}

CochainComplex build_complex(const TetMesh& mesh, int n_threads) {
    return build_complex(std::make_shared<TetMesh>(mesh), n_threads);
}

Vec3 whitney1_eval(const TetMesh& mesh, int tet, const Eigen::VectorXd& cochain,
                   const std::array<double, 4>& bary) {
    const auto& T = mesh.tets[tet];
    auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                   mesh.vertices[T[3]]);
    static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    Vec3 val = Vec3::Zero();
    for (const auto& pr : ep) {
        int a = pr[0], b = pr[1];
        if (T[a] > T[b]) std::swap(a, b);  // canonical edge orientation
        int e = mesh.edge_index(T[a], T[b]);
        val += cochain[e] * (bary[a] * g[b] - bary[b] * g[a]);
    }
    return val;
}

Vec3 whitney1_eval(const TetMesh& mesh, int tet, const Eigen::VectorXd& cochain,
                   const Vec3& point) {
    const auto& T = mesh.tets[tet];
    auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]], mesh.vertices[T[2]],
                                   mesh.vertices[T[3]]);
    std::array<double, 4> bary;
    for (int i = 0; i < 4; ++i)
        bary[i] = (i == 0 ? 1.0 : 0.0) + g[i].dot(point - mesh.vertices[T[0]]);
    return whitney1_eval(mesh, tet, cochain, bary);
}

void write_matrix_market(std::ostream& os, const SpMat& A, const std::string& comment) {
    os << "%%MatrixMarket matrix coordinate real general\n";
    if (!comment.empty()) os << "% " << comment << "\n";
    os << A.rows() << " " << A.cols() << " " << A.nonZeros() << "\n";
    os << std::setprecision(17);
    for (int k = 0; k < A.outerSize(); ++k)
        for (SpMat::InnerIterator it(A, k); it; ++it)
            os << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
}

}  // namespace curlspec
