#include "curlspec/homology.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace curlspec {

namespace {

using LL = long long;
using MatLL = Eigen::Matrix<LL, Eigen::Dynamic, Eigen::Dynamic>;

// ---------------------------------------------------------------------------
// surface complex
// ---------------------------------------------------------------------------

struct SurfaceComplex {
    std::vector<int> bedges;    // volume edge ids, ascending
    std::vector<int> bverts;    // volume vertex ids, ascending
    std::vector<int> edge_map;  // volume edge -> surface edge or -1
    std::vector<int> vert_map;  // volume vertex -> surface vertex or -1
    SpMat d1s;                  // BF x BE, outward-oriented surface derivative
    SpMat d0s;                  // BE x BV surface gradient
    SpMat wedge;                // BE x BE, skew; integral of w_e ^ w_e'
};

SurfaceComplex build_surface_complex(const TetMesh& mesh) {
    SurfaceComplex sc;
    sc.bedges = mesh.boundary_edges();
    sc.bverts = mesh.boundary_vertices();
    sc.edge_map.assign(mesh.n_edges(), -1);
    for (size_t i = 0; i < sc.bedges.size(); ++i) sc.edge_map[sc.bedges[i]] = static_cast<int>(i);
    sc.vert_map.assign(mesh.n_vertices(), -1);
    for (size_t i = 0; i < sc.bverts.size(); ++i) sc.vert_map[sc.bverts[i]] = static_cast<int>(i);

    const int BE = static_cast<int>(sc.bedges.size());
    const int BV = static_cast<int>(sc.bverts.size());
    const int BF = static_cast<int>(mesh.boundary_face_ids().size());

    std::vector<Eigen::Triplet<double>> t1, t0, tw;
    // s(i,j) = +1 for the cyclic pairs (0,1),(1,2),(2,0) of the sorted triple
    auto cyc = [](int i, int j) -> double {
        if (i == j) return 0.0;
        if ((i == 0 && j == 1) || (i == 1 && j == 2) || (i == 2 && j == 0)) return 1.0;
        return -1.0;
    };
    static const int pairs[3][2] = {{0, 1}, {0, 2}, {1, 2}};
    for (int k = 0; k < BF; ++k) {
        int f = mesh.boundary_face_ids()[k];
        int s = mesh.boundary_face_sign(k);
        const auto& tri = mesh.faces()[f];  // sorted a<b<c
        int le[3] = {sc.edge_map[mesh.edge_index(tri[0], tri[1])],
                     sc.edge_map[mesh.edge_index(tri[0], tri[2])],
                     sc.edge_map[mesh.edge_index(tri[1], tri[2])]};
        // d of the sorted face: +(b,c) -(a,c) +(a,b), times the outward sign
        t1.emplace_back(k, le[2], s * 1.0);
        t1.emplace_back(k, le[1], s * -1.0);
        t1.emplace_back(k, le[0], s * 1.0);

        // wedge pairing of the Whitney edge forms on this face; metric-free
        for (int i = 0; i < 3; ++i) {
            int a = pairs[i][0], b = pairs[i][1];
            for (int j = 0; j < 3; ++j) {
                int c = pairs[j][0], d = pairs[j][1];
                double w = cyc(b, d) * (1 + (a == c)) - cyc(b, c) * (1 + (a == d)) -
                           cyc(a, d) * (1 + (b == c)) + cyc(a, c) * (1 + (b == d));
                if (w != 0.0) tw.emplace_back(le[i], le[j], s * w / 24.0);
            }
        }
    }
    for (int i = 0; i < BE; ++i) {
        const auto& e = mesh.edges()[sc.bedges[i]];
        t0.emplace_back(i, sc.vert_map[e[0]], -1.0);
        t0.emplace_back(i, sc.vert_map[e[1]], 1.0);
    }
    sc.d1s.resize(BF, BE);
    sc.d1s.setFromTriplets(t1.begin(), t1.end());
    sc.d0s.resize(BE, BV);
    sc.d0s.setFromTriplets(t0.begin(), t0.end());
    sc.wedge.resize(BE, BE);
    sc.wedge.setFromTriplets(tw.begin(), tw.end());
    return sc;
}

// ---------------------------------------------------------------------------
// kernel of a PSD combinatorial Laplacian (the kernel is exact, so inverse
// iteration with a tiny shift separates it immediately)
// ---------------------------------------------------------------------------

Eigen::MatrixXd psd_kernel(const SpMat& L, int expected_dim, const char* what) {
    const int n = static_cast<int>(L.rows());
    if (expected_dim == 0) return Eigen::MatrixXd(n, 0);
    double scale = 0;
    for (int i = 0; i < n; ++i) scale += L.coeff(i, i);
    scale = std::max(scale / n, 1e-300);
    SpMat A = L;
    const double c = 1e-8 * scale;
    for (int i = 0; i < n; ++i) A.coeffRef(i, i) += c;
    Eigen::SimplicialLDLT<SpMat> solver(A);
    if (solver.info() != Eigen::Success)
        throw Error(std::string(what) + ": factorization failed in kernel computation");

    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> gauss;
    const int m = expected_dim + 4;
    Eigen::MatrixXd X(n, m);
    for (int j = 0; j < m; ++j)
        for (int i = 0; i < n; ++i) X(i, j) = gauss(rng);

    for (int iter = 0; iter < 100; ++iter) {
        X = solver.solve(X);
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(X);
        X = qr.householderQ() * Eigen::MatrixXd::Identity(n, m);
        Eigen::MatrixXd R = X.transpose() * (L * X).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(R);
        int zeros = 0;
        for (int j = 0; j < m; ++j)
            if (es.eigenvalues()[j] < 1e-9 * scale) ++zeros;
        if (zeros == 0) continue;
        Eigen::MatrixXd K = X * es.eigenvectors().leftCols(zeros);
        double res = (L * K).norm() / (scale * std::sqrt(static_cast<double>(zeros)));
        if (res < 1e-9) {
            if (zeros != expected_dim) {
                std::ostringstream os;
                os << what << ": kernel dimension " << zeros << ", expected " << expected_dim;
                throw HomologyRankMismatchError(os.str());
            }
            return K;
        }
    }
    throw Error(std::string(what) + ": kernel iteration did not converge");
}

// ---------------------------------------------------------------------------
// integer linear algebra
// ---------------------------------------------------------------------------

void check_overflow(LL v, const char* what) {
    if (std::llabs(v) > (1LL << 52)) throw Error(std::string(what) + ": integer overflow");
}

struct SnfResult {
    MatLL D;     // U * A * V, diagonal with divisibility chain
    MatLL U, V;  // unimodular transforms
    MatLL Uinv;  // inverse of U
    int rank = 0;
};

SnfResult smith_normal_form(MatLL A) {
    const int r = static_cast<int>(A.rows()), cdim = static_cast<int>(A.cols());
    SnfResult out;
    out.U = MatLL::Identity(r, r);
    out.Uinv = MatLL::Identity(r, r);
    out.V = MatLL::Identity(cdim, cdim);
    int t = 0;
    int guard = 0;
    while (t < std::min(r, cdim)) {
        if (++guard > 10000) throw Error("smith_normal_form: no convergence");
        int pi = -1, pj = -1;
        LL best = 0;
        for (int i = t; i < r; ++i)
            for (int j = t; j < cdim; ++j)
                if (A(i, j) != 0 && (pi < 0 || std::llabs(A(i, j)) < best)) {
                    best = std::llabs(A(i, j));
                    pi = i;
                    pj = j;
                }
        if (pi < 0) break;
        if (pi != t) {
            A.row(t).swap(A.row(pi));
            out.U.row(t).swap(out.U.row(pi));
            out.Uinv.col(t).swap(out.Uinv.col(pi));
        }
        if (pj != t) {
            A.col(t).swap(A.col(pj));
            out.V.col(t).swap(out.V.col(pj));
        }
        bool clean = true;
        for (int i = t + 1; i < r; ++i) {
            if (A(i, t) == 0) continue;
            LL q = A(i, t) / A(t, t);
            if (q != 0) {
                A.row(i) -= q * A.row(t);
                out.U.row(i) -= q * out.U.row(t);
                out.Uinv.col(t) += q * out.Uinv.col(i);
            }
            if (A(i, t) != 0) clean = false;
        }
        for (int j = t + 1; j < cdim; ++j) {
            if (A(t, j) == 0) continue;
            LL q = A(t, j) / A(t, t);
            if (q != 0) {
                A.col(j) -= q * A.col(t);
                out.V.col(j) -= q * out.V.col(t);
            }
            if (A(t, j) != 0) clean = false;
        }
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < cdim; ++j) check_overflow(A(i, j), "smith_normal_form");
        if (!clean) continue;
        bool fixed = false;
        for (int i = t + 1; i < r && !fixed; ++i)
            for (int j = t + 1; j < cdim && !fixed; ++j)
                if (A(i, j) % A(t, t) != 0) {
                    A.col(t) += A.col(j);
                    out.V.col(t) += out.V.col(j);
                    fixed = true;
                }
        if (fixed) continue;
        if (A(t, t) < 0) {
            A.row(t) = -A.row(t);
            out.U.row(t) = -out.U.row(t);
            out.Uinv.col(t) = -out.Uinv.col(t);
        }
        ++t;
    }
    out.rank = t;
    out.D = A;
    return out;
}

// Sparse integer Gauss-Jordan solve of A c = z restricted to +-1 pivots;
// free unknowns are set to zero.  Returns false if stuck or inconsistent.
bool integer_solve(std::vector<std::map<int, LL>> A, std::vector<LL> z, int n_cols,
                   std::vector<LL>& c) {
    const int n_rows = static_cast<int>(A.size());
    std::vector<std::vector<int>> col_rows(n_cols);
    for (int i = 0; i < n_rows; ++i)
        for (const auto& [j, v] : A[i])
            if (v != 0) col_rows[j].push_back(i);
    std::vector<char> row_done(n_rows, 0), col_done(n_cols, 0);
    std::vector<std::pair<int, int>> pivots;

    while (true) {
        long best_score = -1;
        int pr = -1, pc = -1;
        for (int i = 0; i < n_rows; ++i) {
            if (row_done[i] || A[i].empty()) continue;
            long rn = static_cast<long>(A[i].size());
            for (const auto& [j, v] : A[i]) {
                if (col_done[j] || (v != 1 && v != -1)) continue;
                long score = (rn - 1) * (static_cast<long>(col_rows[j].size()) - 1);
                if (best_score < 0 || score < best_score) {
                    best_score = score;
                    pr = i;
                    pc = j;
                }
                if (best_score == 0) break;
            }
            if (best_score == 0) break;
        }
        if (pr < 0) break;
        LL piv = A[pr][pc];
        std::vector<int> rows;
        rows.swap(col_rows[pc]);
        std::sort(rows.begin(), rows.end());
        rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
        for (int i : rows) {
            if (i == pr || row_done[i]) continue;
            auto it = A[i].find(pc);
            if (it == A[i].end() || it->second == 0) continue;
            LL q = it->second / piv;  // piv is +-1
            for (const auto& [j, v] : A[pr]) {
                LL& slot = A[i][j];
                slot -= q * v;
                check_overflow(slot, "integer_solve");
                if (slot == 0) A[i].erase(j);
                else if (j != pc) col_rows[j].push_back(i);
            }
            z[i] -= q * z[pr];
            check_overflow(z[i], "integer_solve");
        }
        row_done[pr] = 1;
        col_done[pc] = 1;
        pivots.emplace_back(pr, pc);
    }
    for (int i = 0; i < n_rows; ++i) {
        if (row_done[i]) continue;
        if (!A[i].empty()) return false;  // stuck without a unit pivot
        if (z[i] != 0) return false;      // inconsistent
    }
    c.assign(n_cols, 0);
    for (auto it = pivots.rbegin(); it != pivots.rend(); ++it) {
        auto [pr, pc] = *it;
        LL rest = 0;
        for (const auto& [j, v] : A[pr])
            if (j != pc) rest += v * c[j];
        LL num = z[pr] - rest;
        if (num % A[pr][pc] != 0) return false;
        c[pc] = num / A[pr][pc];
    }
    return true;
}

// ---------------------------------------------------------------------------
// chains
// ---------------------------------------------------------------------------

Eigen::VectorXd cycle_indicator(const SurfaceComplex& sc, const EdgeChain& z) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(sc.bedges.size());
    for (const auto& ec : z) {
        int se = sc.edge_map[ec.edge];
        if (se < 0) throw Error("cycle uses a non-boundary edge");
        v[se] += ec.sign;
    }
    return v;
}

void verify_closed(const TetMesh& mesh, const EdgeChain& z, const char* what) {
    std::map<int, int> div;
    for (const auto& ec : z) {
        const auto& e = mesh.edges()[ec.edge];
        div[e[0]] -= ec.sign;
        div[e[1]] += ec.sign;
    }
    for (const auto& [v, d] : div)
        if (d != 0) throw Error(std::string(what) + ": chain is not a cycle");
}

EdgeChain combine_cycles(const std::vector<EdgeChain>& cycles, const std::vector<LL>& coeff) {
    std::map<int, LL> acc;
    for (size_t k = 0; k < cycles.size(); ++k) {
        if (coeff[k] == 0) continue;
        for (const auto& ec : cycles[k]) acc[ec.edge] += coeff[k] * ec.sign;
    }
    EdgeChain out;
    for (const auto& [e, c] : acc)
        if (c != 0) out.push_back({e, static_cast<int>(c)});
    return out;
}

MatLL round_to_integer(const Eigen::MatrixXd& X, const char* what, double tol = 1e-6,
                       bool* ok = nullptr) {
    MatLL R(X.rows(), X.cols());
    for (int i = 0; i < X.rows(); ++i)
        for (int j = 0; j < X.cols(); ++j) {
            double r = std::round(X(i, j));
            if (std::abs(X(i, j) - r) > tol) {
                if (ok) {
                    *ok = false;
                    return R;
                }
                throw Error(std::string(what) + ": value not close to an integer");
            }
            R(i, j) = static_cast<LL>(r);
        }
    if (ok) *ok = true;
    return R;
}

}  // namespace

Eigen::MatrixXi intersection_matrix_oracle(const TetMesh& mesh,
                                           const std::vector<EdgeChain>& cycles) {
    const int n = static_cast<int>(cycles.size());
    if (n == 0) return Eigen::MatrixXi(0, 0);
    for (const auto& z : cycles) verify_closed(mesh, z, "intersection_matrix_oracle");
    SurfaceComplex sc = build_surface_complex(mesh);

    // Harmonic cocycle representatives span H^1 of the boundary.
    SpMat L = SpMat(sc.d1s.transpose()) * sc.d1s + sc.d0s * SpMat(sc.d0s.transpose());
    Eigen::MatrixXd H = psd_kernel(L, n, "intersection_matrix_oracle");

    Eigen::MatrixXd P(n, n);  // periods of the harmonic basis over the cycles
    for (int j = 0; j < n; ++j) P.col(j) = H.transpose() * cycle_indicator(sc, cycles[j]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(P);
    if (!lu.isInvertible())
        throw Error("intersection_matrix_oracle: cycles are not an H1 basis");

    // Period of H*x over cycle j is P.col(j)^T x, so the period-dual basis
    // is Eta = H P^{-T}.  The wedge pairing of closed cochains is exactly
    // cohomological, so N = Eta^T W Eta is the cup-product matrix of the
    // basis dual to the cycles, and the intersection matrix is -N^{-1}.
    Eigen::MatrixXd Eta = H * lu.inverse().transpose();
    Eigen::MatrixXd N = Eta.transpose() * (sc.wedge * Eta).eval();
    Eigen::MatrixXd Omega = -N.inverse();
    MatLL O = round_to_integer(Omega, "intersection_matrix_oracle", 1e-5);
    Eigen::MatrixXi out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = static_cast<int>(O(i, j));
    if ((out + out.transpose()).cwiseAbs().maxCoeff() != 0)
        throw Error("intersection_matrix_oracle: matrix not skew-symmetric");
    return out;
}

SpMat period_matrix(const TetMesh& mesh, const HomologyBasis& basis) {
    const int l = basis.total_genus;
    std::vector<Eigen::Triplet<double>> trips;
    auto add = [&](int row, const EdgeChain& z) {
        for (const auto& ec : z) trips.emplace_back(row, ec.edge, static_cast<double>(ec.sign));
    };
    for (int j = 0; j < l; ++j) add(j, basis.alpha_cycles[j]);
    for (int j = 0; j < l; ++j) add(l + j, basis.beta_cycles[j]);
    SpMat P(2 * l, mesh.n_edges());
    P.setFromTriplets(trips.begin(), trips.end());
    return P;
}

SpMat flux_matrix(const TetMesh& mesh, const HomologyBasis& basis) {
    const int l = basis.total_genus;
    std::vector<Eigen::Triplet<double>> trips;
    for (int j = 0; j < l; ++j)
        for (const auto& fc : basis.cut_surfaces[j])
            trips.emplace_back(j, fc.face, static_cast<double>(fc.sign));
    SpMat F(l, mesh.n_faces());
    F.setFromTriplets(trips.begin(), trips.end());
    return F;
}

Eigen::VectorXcd period_vector(const CochainComplex& cc, const HomologyBasis& basis,
                               const Eigen::VectorXcd& v) {
    if (v.size() != cc.mesh->n_edges()) throw Error("period_vector: cochain size mismatch");
    SpMat P = period_matrix(*cc.mesh, basis);
    return P.cast<std::complex<double>>() * v;
}

Eigen::VectorXcd flux_vector(const CochainComplex& cc, const HomologyBasis& basis,
                             const Eigen::VectorXcd& u) {
    if (u.size() != cc.mesh->n_faces()) throw Error("flux_vector: cochain size mismatch");
    SpMat F = flux_matrix(*cc.mesh, basis);
    return F.cast<std::complex<double>>() * u;
}

Eigen::VectorXd proxy_face_cochain(const CochainComplex& cc, const Eigen::VectorXd& v) {
    const TetMesh& mesh = *cc.mesh;
    Eigen::VectorXd u(mesh.n_faces());
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& tri = mesh.faces()[f];
        Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
        Vec3 nu = triangle_normal(a, b, c);  // orientation of the sorted triple
        double area = triangle_area(a, b, c);
        Vec3 centroid = (a + b + c) / 3.0;
        // The interpolant is linear per tet, so the centroid value integrates
        // the normal component exactly; the normal component may jump across
        // the face, so average the (up to two) sides.
        double total = 0;
        int sides = 0;
        for (int s = 0; s < 2; ++s) {
            int t = mesh.face_tets(f)[s];
            if (t < 0) continue;
            total += whitney1_eval(mesh, t, v, centroid).dot(nu);
            ++sides;
        }
        u[f] = area * total / sides;
    }
    return u;
}

namespace {

HomologyBasis tagged_basis(const TetMesh& mesh) {
    HomologyBasis basis;
    basis.genus_per_component = mesh.boundary_component_genus();
    basis.total_genus = mesh.total_genus();
    const int l = basis.total_genus;
    for (int j = 1; j <= l; ++j) {
        basis.cut_surfaces.push_back(mesh.surface_chain("sigma" + std::to_string(j)));
        basis.alpha_cycles.push_back(mesh.curve_chain("alpha" + std::to_string(j)));
        basis.beta_cycles.push_back(mesh.curve_chain("beta" + std::to_string(j)));
        verify_closed(mesh, basis.alpha_cycles.back(), "homology_basis");
        verify_closed(mesh, basis.beta_cycles.back(), "homology_basis");
        for (const auto& ec : chain_boundary(mesh, basis.cut_surfaces.back()))
            if (!mesh.edge_on_boundary(ec.edge))
                throw Error("homology_basis: cut surface boundary leaves the domain boundary");
    }
    std::vector<EdgeChain> cycles;
    cycles.insert(cycles.end(), basis.alpha_cycles.begin(), basis.alpha_cycles.end());
    cycles.insert(cycles.end(), basis.beta_cycles.begin(), basis.beta_cycles.end());
    basis.intersection_matrix = intersection_matrix_oracle(mesh, cycles);
    return basis;
}

bool has_tagged_basis(const TetMesh& mesh) {
    int l = mesh.total_genus();
    for (int j = 1; j <= l; ++j) {
        if (!mesh.surface_tags.count("sigma" + std::to_string(j))) return false;
        if (!mesh.curve_tags.count("alpha" + std::to_string(j))) return false;
        if (!mesh.curve_tags.count("beta" + std::to_string(j))) return false;
    }
    return true;
}

// rows of the volume boundary operator on 2-chains (one row per edge)
std::vector<std::map<int, LL>> boundary2_rows(const TetMesh& mesh) {
    std::vector<std::map<int, LL>> rows(mesh.n_edges());
    for (int f = 0; f < mesh.n_faces(); ++f) {
        const auto& tri = mesh.faces()[f];
        rows[mesh.edge_index(tri[1], tri[2])][f] += 1;
        rows[mesh.edge_index(tri[0], tri[2])][f] -= 1;
        rows[mesh.edge_index(tri[0], tri[1])][f] += 1;
    }
    return rows;
}

FaceChain solve_cut_surface(const TetMesh& mesh, const EdgeChain& alpha) {
    std::vector<LL> z(mesh.n_edges(), 0);
    for (const auto& ec : alpha) z[ec.edge] += ec.sign;
    std::vector<LL> c;
    if (!integer_solve(boundary2_rows(mesh), z, mesh.n_faces(), c))
        throw Error(
            "generic homology: integer cut-surface solve failed; provide tagged cut surfaces");
    FaceChain chain;
    for (int f = 0; f < mesh.n_faces(); ++f)
        if (c[f] != 0) chain.push_back({f, static_cast<int>(c[f])});
    // exact verification of the boundary condition
    std::map<int, LL> bd;
    for (const auto& fc : chain) {
        const auto& tri = mesh.faces()[fc.face];
        bd[mesh.edge_index(tri[1], tri[2])] += fc.sign;
        bd[mesh.edge_index(tri[0], tri[2])] -= fc.sign;
        bd[mesh.edge_index(tri[0], tri[1])] += fc.sign;
    }
    for (const auto& ec : alpha) bd[ec.edge] -= ec.sign;
    for (const auto& [e, v] : bd)
        if (v != 0) throw Error("generic homology: cut surface verification failed");
    return chain;
}

}  // namespace

HomologyBasis homology_basis(const TetMesh& mesh) {
    if (mesh.total_genus() == 0) {
        HomologyBasis basis;
        basis.total_genus = 0;
        basis.genus_per_component = mesh.boundary_component_genus();
        basis.intersection_matrix = Eigen::MatrixXi(0, 0);
        return basis;
    }
    if (has_tagged_basis(mesh)) return tagged_basis(mesh);
    return homology_basis_generic(mesh);
}

HomologyBasis homology_basis_generic(const TetMesh& mesh) {
    HomologyBasis basis;
    basis.genus_per_component = mesh.boundary_component_genus();
    basis.total_genus = mesh.total_genus();
    const int l = basis.total_genus;
    basis.intersection_matrix = Eigen::MatrixXi(0, 0);
    if (l == 0) return basis;

    SurfaceComplex sc = build_surface_complex(mesh);
    const int BE = static_cast<int>(sc.bedges.size());
    const int BV = static_cast<int>(sc.bverts.size());

    // --- fundamental cycles of a spanning forest of the boundary graph ---
    std::vector<int> parent_vert(BV, -1), parent_edge(BV, -1), depth(BV, 0);
    std::vector<char> in_tree(BE, 0), visited(BV, 0);
    std::vector<std::vector<std::pair<int, int>>> adj(BV);
    for (int e = 0; e < BE; ++e) {
        const auto& ev = mesh.edges()[sc.bedges[e]];
        int a = sc.vert_map[ev[0]], b = sc.vert_map[ev[1]];
        adj[a].push_back({b, e});
        adj[b].push_back({a, e});
    }
    for (int root = 0; root < BV; ++root) {
        if (visited[root]) continue;
        std::vector<int> stack{root};
        visited[root] = 1;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            for (auto [w, e] : adj[u]) {
                if (visited[w]) continue;
                visited[w] = 1;
                parent_vert[w] = u;
                parent_edge[w] = e;
                depth[w] = depth[u] + 1;
                in_tree[e] = 1;
                stack.push_back(w);
            }
        }
    }
    auto step_up = [&](int u, EdgeChain& chain, int sign) {
        int e = parent_edge[u];
        const auto& ev = mesh.edges()[sc.bedges[e]];
        int par = parent_vert[u];
        int s = (sc.vert_map[ev[0]] == u && sc.vert_map[ev[1]] == par) ? 1 : -1;
        chain.push_back({sc.bedges[e], sign * s});
        return par;
    };
    std::vector<EdgeChain> fundamental;
    for (int e = 0; e < BE; ++e) {
        if (in_tree[e]) continue;
        const auto& ev = mesh.edges()[sc.bedges[e]];
        int a = sc.vert_map[ev[0]], b = sc.vert_map[ev[1]];
        EdgeChain raw;
        raw.push_back({sc.bedges[e], 1});  // a -> b along the cotree edge
        int ub = b, ua = a;
        while (depth[ub] > depth[ua]) ub = step_up(ub, raw, 1);    // b -> up
        while (depth[ua] > depth[ub]) ua = step_up(ua, raw, -1);   // up -> a reversed
        while (ub != ua) {
            ub = step_up(ub, raw, 1);
            ua = step_up(ua, raw, -1);
        }
        std::map<int, int> acc;
        for (const auto& ec : raw) acc[ec.edge] += ec.sign;
        EdgeChain z;
        for (const auto& [edge, cf] : acc)
            if (cf != 0) z.push_back({edge, cf});
        verify_closed(mesh, z, "homology_basis_generic");
        fundamental.push_back(std::move(z));
    }
    const int m = static_cast<int>(fundamental.size());
    if (m < 2 * l) throw HomologyRankMismatchError("generic homology: too few fundamental cycles");

    // --- period footprint against surface harmonic representatives ---
    SpMat Ls = SpMat(sc.d1s.transpose()) * sc.d1s + sc.d0s * SpMat(sc.d0s.transpose());
    Eigen::MatrixXd H = psd_kernel(Ls, 2 * l, "generic homology (surface)");
    Eigen::MatrixXd Pm(2 * l, m);
    for (int j = 0; j < m; ++j) Pm.col(j) = H.transpose() * cycle_indicator(sc, fundamental[j]);

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Pm);
    if (qr.rank() < 2 * l)
        throw HomologyRankMismatchError("generic homology: cycle rank below 2*genus");
    Eigen::MatrixXd S(2 * l, 2 * l);
    for (int k = 0; k < 2 * l; ++k) S.col(k) = Pm.col(qr.colsPermutation().indices()[k]);

    // coordinates of all fundamental classes in the selected basis are
    // rationals with a small common denominator
    Eigen::MatrixXd X = S.partialPivLu().solve(Pm);
    MatLL Xint;
    LL denom = 0;
    for (LL D = 1; D <= (1 << 12); D *= 2) {
        bool ok = false;
        Xint = round_to_integer(static_cast<double>(D) * X, "generic homology", 2e-5, &ok);
        if (ok) {
            denom = D;
            break;
        }
    }
    if (denom == 0) throw Error("generic homology: lattice coordinates not rational");

    // H1 lattice basis from the column lattice of Xint via SNF
    SnfResult snf = smith_normal_form(Xint);
    if (snf.rank != 2 * l) throw HomologyRankMismatchError("generic homology: SNF rank mismatch");
    std::vector<EdgeChain> cyc_basis;
    for (int k = 0; k < 2 * l; ++k) {
        std::vector<LL> coeff(m);
        for (int j = 0; j < m; ++j) coeff[j] = snf.V(j, k);
        cyc_basis.push_back(combine_cycles(fundamental, coeff));
    }
    Eigen::MatrixXi Omega = intersection_matrix_oracle(mesh, cyc_basis);
    MatLL Om(2 * l, 2 * l);
    for (int i = 0; i < 2 * l; ++i)
        for (int j = 0; j < 2 * l; ++j) Om(i, j) = Omega(i, j);

    // --- bounding sublattice: volume-cohomology periods vanish ---
    // volume combinatorial Hodge Laplacian on 1-cochains
    SpMat d0v, d1v;
    {
        std::vector<Eigen::Triplet<double>> t0, t1;
        for (int e = 0; e < mesh.n_edges(); ++e) {
            t0.emplace_back(e, mesh.edges()[e][0], -1.0);
            t0.emplace_back(e, mesh.edges()[e][1], 1.0);
        }
        for (int f = 0; f < mesh.n_faces(); ++f) {
            const auto& tri = mesh.faces()[f];
            t1.emplace_back(f, mesh.edge_index(tri[1], tri[2]), 1.0);
            t1.emplace_back(f, mesh.edge_index(tri[0], tri[2]), -1.0);
            t1.emplace_back(f, mesh.edge_index(tri[0], tri[1]), 1.0);
        }
        d0v.resize(mesh.n_edges(), mesh.n_vertices());
        d0v.setFromTriplets(t0.begin(), t0.end());
        d1v.resize(mesh.n_faces(), mesh.n_edges());
        d1v.setFromTriplets(t1.begin(), t1.end());
    }
    SpMat Lvol = SpMat(d1v.transpose()) * d1v + d0v * SpMat(d0v.transpose());
    Eigen::MatrixXd Hvol = psd_kernel(Lvol, l, "generic homology (volume)");
    Eigen::MatrixXd Y(l, 2 * l);
    for (int k = 0; k < 2 * l; ++k) {
        Eigen::VectorXd zk = Eigen::VectorXd::Zero(mesh.n_edges());
        for (const auto& ec : cyc_basis[k]) zk[ec.edge] += ec.sign;
        Y.col(k) = Hvol.transpose() * zk;
    }
    // rational kernel of Y: row-reduce and rationalize
    Eigen::FullPivLU<Eigen::MatrixXd> ylu(Y);
    Eigen::MatrixXd Kr = ylu.kernel();  // 2l x l
    if (Kr.cols() != l) throw HomologyRankMismatchError("generic homology: bounding rank mismatch");
    // scale columns so entries are integers
    MatLL Kint(2 * l, l);
    for (int j = 0; j < l; ++j) {
        Eigen::VectorXd col = Kr.col(j);
        col /= col.cwiseAbs().maxCoeff();
        bool done = false;
        for (LL D = 1; D <= (1 << 12) && !done; ++D) {
            bool ok = false;
            MatLL c = round_to_integer(static_cast<double>(D) * col, "generic homology", 2e-5, &ok);
            if (ok) {
                Kint.col(j) = c.col(0);
                done = true;
            }
        }
        if (!done) throw Error("generic homology: bounding kernel not rational");
    }
    // saturate the bounding lattice: basis = first l columns of Uinv from SNF
    SnfResult ks = smith_normal_form(Kint);
    if (ks.rank != l) throw HomologyRankMismatchError("generic homology: bounding SNF rank");
    MatLL A(2 * l, l);
    for (int j = 0; j < l; ++j) A.col(j) = ks.Uinv.col(j);
    // verify the bounding lattice is Omega-isotropic
    MatLL iso = A.transpose() * Om * A;
    if (iso.cwiseAbs().maxCoeff() != 0)
        throw Error("generic homology: bounding sublattice not isotropic");

    // --- symplectic completion over the integers ---
    MatLL Mmat = A.transpose() * Om;  // l x 2l
    SnfResult ms = smith_normal_form(Mmat);
    if (ms.rank != l) throw Error("generic homology: completion rank deficiency");
    for (int j = 0; j < l; ++j)
        if (ms.D(j, j) != 1)
            throw Error("generic homology: bounding sublattice not primitive");
    // B0 = V * [U ; 0] solves M * B0 = I
    MatLL B0 = ms.V.leftCols(l) * ms.U;
    MatLL G = B0.transpose() * Om * B0;  // skew integer
    MatLL W = MatLL::Zero(l, l);
    for (int i = 0; i < l; ++i)
        for (int j = i + 1; j < l; ++j) W(i, j) = G(i, j);
    MatLL B = B0 + A * W;
    // checks: A^T Om B = I, B^T Om B = 0
    if ((A.transpose() * Om * B - MatLL::Identity(l, l)).cwiseAbs().maxCoeff() != 0)
        throw Error("generic homology: symplectic completion failed (duality)");
    if ((B.transpose() * Om * B).cwiseAbs().maxCoeff() != 0)
        throw Error("generic homology: symplectic completion failed (isotropy)");

    for (int j = 0; j < l; ++j) {
        std::vector<LL> ca(2 * l), cb(2 * l);
        for (int k = 0; k < 2 * l; ++k) {
            ca[k] = A(k, j);
            cb[k] = B(k, j);
        }
        basis.alpha_cycles.push_back(combine_cycles(cyc_basis, ca));
        basis.beta_cycles.push_back(combine_cycles(cyc_basis, cb));
    }
    std::vector<EdgeChain> final_cycles;
    final_cycles.insert(final_cycles.end(), basis.alpha_cycles.begin(), basis.alpha_cycles.end());
    final_cycles.insert(final_cycles.end(), basis.beta_cycles.begin(), basis.beta_cycles.end());
    basis.intersection_matrix = intersection_matrix_oracle(mesh, final_cycles);

    for (int j = 0; j < l; ++j)
        basis.cut_surfaces.push_back(solve_cut_surface(mesh, basis.alpha_cycles[j]));
    return basis;
}

}  // namespace curlspec
