#include "curlspec/tetmesh.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <sstream>

namespace curlspec {

namespace {

std::array<int, 2> sorted2(int a, int b) { return a < b ? std::array<int, 2>{a, b} : std::array<int, 2>{b, a}; }

std::array<int, 3> sorted3(int a, int b, int c) {
    std::array<int, 3> t{a, b, c};
    std::sort(t.begin(), t.end());
    return t;
}

}  // namespace

int TetMesh::triple_parity(int a, int b, int c) {
    // Parity of the permutation sorting (a,b,c) ascending.
    int sign = 1;
    if (a > b) { std::swap(a, b); sign = -sign; }
    if (b > c) { std::swap(b, c); sign = -sign; }
    if (a > b) { std::swap(a, b); sign = -sign; }
    return sign;
}

void TetMesh::finalize() {
    const int nv = n_vertices();
    for (size_t t = 0; t < tets.size(); ++t) {
        const auto& T = tets[t];
        for (int v : T) {
            if (v < 0 || v >= nv) throw Error("tet references vertex out of range");
        }
        double vol = tet_volume(vertices[T[0]], vertices[T[1]], vertices[T[2]], vertices[T[3]]);
        if (!(vol > 0)) {
            std::ostringstream os;
            os << "tet " << t << " has non-positive volume " << vol;
            throw DegenerateTetError(os.str());
        }
    }

    // Canonical edge and face tables: sorted unique vertex tuples.
    std::vector<std::array<int, 2>> epool;
    std::vector<std::array<int, 3>> fpool;
    epool.reserve(tets.size() * 6);
    fpool.reserve(tets.size() * 4);
    for (const auto& T : tets) {
        epool.push_back(sorted2(T[0], T[1]));
        epool.push_back(sorted2(T[0], T[2]));
        epool.push_back(sorted2(T[0], T[3]));
        epool.push_back(sorted2(T[1], T[2]));
        epool.push_back(sorted2(T[1], T[3]));
        epool.push_back(sorted2(T[2], T[3]));
        fpool.push_back(sorted3(T[1], T[2], T[3]));
        fpool.push_back(sorted3(T[0], T[2], T[3]));
        fpool.push_back(sorted3(T[0], T[1], T[3]));
        fpool.push_back(sorted3(T[0], T[1], T[2]));
    }
    std::sort(epool.begin(), epool.end());
    epool.erase(std::unique(epool.begin(), epool.end()), epool.end());
    std::sort(fpool.begin(), fpool.end());
    fpool.erase(std::unique(fpool.begin(), fpool.end()), fpool.end());
    edges_ = std::move(epool);
    faces_ = std::move(fpool);

    tet_edges_.assign(tets.size(), {});
    tet_faces_.assign(tets.size(), {});
    face_tets_.assign(faces_.size(), {-1, -1});
    for (size_t t = 0; t < tets.size(); ++t) {
        const auto& T = tets[t];
        static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
        for (int k = 0; k < 6; ++k) tet_edges_[t][k] = edge_index(T[ep[k][0]], T[ep[k][1]]);
        static const int fp[4][3] = {{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}};
        for (int k = 0; k < 4; ++k) {
            int f = face_index(T[fp[k][0]], T[fp[k][1]], T[fp[k][2]]);
            tet_faces_[t][k] = f;
            if (face_tets_[f][0] < 0) face_tets_[f][0] = static_cast<int>(t);
            else if (face_tets_[f][1] < 0) face_tets_[f][1] = static_cast<int>(t);
            else throw Error("face shared by more than two tets (non-manifold mesh)");
        }
    }

    // Boundary faces, outward oriented.  For a positively oriented tet
    // (v0,v1,v2,v3) the outward triples are (1,2,3),(0,3,2),(0,1,3),(0,2,1).
    boundary_faces_.clear();
    boundary_triples_.clear();
    boundary_signs_.clear();
    vertex_boundary_.assign(nv, 0);
    edge_boundary_.assign(edges_.size(), 0);
    static const int out[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
    for (size_t t = 0; t < tets.size(); ++t) {
        const auto& T = tets[t];
        for (int k = 0; k < 4; ++k) {
            int f = tet_faces_[t][k];
            if (face_tets_[f][1] >= 0) continue;  // interior
            std::array<int, 3> tri{T[out[k][0]], T[out[k][1]], T[out[k][2]]};
            boundary_faces_.push_back(f);
            boundary_triples_.push_back(tri);
            boundary_signs_.push_back(triple_parity(tri[0], tri[1], tri[2]));
        }
    }
    // Deterministic order: sort boundary records by face index.
    {
        std::vector<int> perm(boundary_faces_.size());
        std::iota(perm.begin(), perm.end(), 0);
        std::sort(perm.begin(), perm.end(),
                  [&](int a, int b) { return boundary_faces_[a] < boundary_faces_[b]; });
        std::vector<int> bf(perm.size());
        std::vector<std::array<int, 3>> bt(perm.size());
        std::vector<int> bs(perm.size());
        for (size_t i = 0; i < perm.size(); ++i) {
            bf[i] = boundary_faces_[perm[i]];
            bt[i] = boundary_triples_[perm[i]];
            bs[i] = boundary_signs_[perm[i]];
        }
        boundary_faces_ = std::move(bf);
        boundary_triples_ = std::move(bt);
        boundary_signs_ = std::move(bs);
    }
    for (size_t k = 0; k < boundary_faces_.size(); ++k) {
        const auto& tri = boundary_triples_[k];
        for (int v : tri) vertex_boundary_[v] = 1;
        edge_boundary_[edge_index(tri[0], tri[1])] = 1;
        edge_boundary_[edge_index(tri[1], tri[2])] = 1;
        edge_boundary_[edge_index(tri[0], tri[2])] = 1;
    }
    boundary_vertex_list_.clear();
    for (int v = 0; v < nv; ++v)
        if (vertex_boundary_[v]) boundary_vertex_list_.push_back(v);
    boundary_edge_list_.clear();
    for (int e = 0; e < n_edges(); ++e)
        if (edge_boundary_[e]) boundary_edge_list_.push_back(e);

    // Volume connectivity: union vertices along edges.
    {
        std::vector<int> parent(nv);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (const auto& e : edges_) {
            int a = find(e[0]), b = find(e[1]);
            if (a != b) parent[std::max(a, b)] = std::min(a, b);
        }
        vertex_component_.assign(nv, -1);
        n_components_ = 0;
        std::map<int, int> label;
        for (int v = 0; v < nv; ++v) {
            int r = find(v);
            auto it = label.find(r);
            if (it == label.end()) it = label.emplace(r, n_components_++).first;
            vertex_component_[v] = it->second;
        }
    }

    // Boundary surface connectivity: union boundary faces along shared edges.
    {
        const int nbf = static_cast<int>(boundary_faces_.size());
        std::vector<int> parent(nbf);
        std::iota(parent.begin(), parent.end(), 0);
        std::function<int(int)> find = [&](int x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        // edge -> boundary faces containing it
        std::map<int, std::vector<int>> edge2bf;
        for (int k = 0; k < nbf; ++k) {
            const auto& tri = boundary_triples_[k];
            edge2bf[edge_index(tri[0], tri[1])].push_back(k);
            edge2bf[edge_index(tri[1], tri[2])].push_back(k);
            edge2bf[edge_index(tri[0], tri[2])].push_back(k);
        }
        for (const auto& [e, lst] : edge2bf) {
            for (size_t i = 1; i < lst.size(); ++i) {
                int a = find(lst[0]), b = find(lst[i]);
                if (a != b) parent[std::max(a, b)] = std::min(a, b);
            }
        }
        boundary_face_component_.assign(nbf, -1);
        n_boundary_components_ = 0;
        std::map<int, int> label;
        for (int k = 0; k < nbf; ++k) {
            int r = find(k);
            auto it = label.find(r);
            if (it == label.end()) it = label.emplace(r, n_boundary_components_++).first;
            boundary_face_component_[k] = it->second;
        }
    }

    finalized_ = true;
}

int TetMesh::edge_index(int a, int b) const {
    auto key = sorted2(a, b);
    auto it = std::lower_bound(edges_.begin(), edges_.end(), key);
    if (it == edges_.end() || *it != key) return -1;
    return static_cast<int>(it - edges_.begin());
}

int TetMesh::face_index(int a, int b, int c) const {
    auto key = sorted3(a, b, c);
    auto it = std::lower_bound(faces_.begin(), faces_.end(), key);
    if (it == faces_.end() || *it != key) return -1;
    return static_cast<int>(it - faces_.begin());
}

std::vector<int> TetMesh::boundary_component_euler() const {
    // chi = V - E + F per boundary component.
    std::vector<std::map<int, char>> cverts(n_boundary_components_);
    std::vector<std::map<int, char>> cedges(n_boundary_components_);
    std::vector<int> cfaces(n_boundary_components_, 0);
    for (size_t k = 0; k < boundary_faces_.size(); ++k) {
        int c = boundary_face_component_[k];
        const auto& tri = boundary_triples_[k];
        ++cfaces[c];
        for (int v : tri) cverts[c][v] = 1;
        cedges[c][edge_index(tri[0], tri[1])] = 1;
        cedges[c][edge_index(tri[1], tri[2])] = 1;
        cedges[c][edge_index(tri[0], tri[2])] = 1;
    }
    std::vector<int> chi(n_boundary_components_);
    for (int c = 0; c < n_boundary_components_; ++c)
        chi[c] = static_cast<int>(cverts[c].size()) - static_cast<int>(cedges[c].size()) + cfaces[c];
    return chi;
}

std::vector<int> TetMesh::boundary_component_genus() const {
    auto chi = boundary_component_euler();
    std::vector<int> g(chi.size());
    for (size_t c = 0; c < chi.size(); ++c) g[c] = (2 - chi[c]) / 2;
    return g;
}

int TetMesh::total_genus() const {
    auto g = boundary_component_genus();
    return std::accumulate(g.begin(), g.end(), 0);
}

int TetMesh::euler_characteristic() const {
    return n_vertices() - n_edges() + n_faces() - n_tets();
}

double TetMesh::volume() const {
    double v = 0;
    for (const auto& T : tets)
        v += tet_volume(vertices[T[0]], vertices[T[1]], vertices[T[2]], vertices[T[3]]);
    return v;
}

double TetMesh::boundary_area() const {
    double a = 0;
    for (const auto& tri : boundary_triples_)
        a += triangle_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
    return a;
}

QualityReport TetMesh::quality() const {
    QualityReport q;
    q.min_dihedral_deg = 180.0;
    for (const auto& T : tets) {
        const Vec3& a = vertices[T[0]];
        const Vec3& b = vertices[T[1]];
        const Vec3& c = vertices[T[2]];
        const Vec3& d = vertices[T[3]];
        double vol = tet_volume(a, b, c, d);
        std::array<Vec3, 4> p{a, b, c, d};
        double longest = 0;
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j)
                longest = std::max(longest, (p[i] - p[j]).norm());
        q.h_max = std::max(q.h_max, longest);
        // Inward face normals; dihedral along the edge shared by faces i,j.
        std::array<Vec3, 4> n;
        static const int fp[4][3] = {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}};
        double area_sum = 0;
        for (int k = 0; k < 4; ++k) {
            Vec3 nk = (p[fp[k][1]] - p[fp[k][0]]).cross(p[fp[k][2]] - p[fp[k][0]]);
            area_sum += 0.5 * nk.norm();
            n[k] = nk.normalized();
        }
        for (int i = 0; i < 4; ++i) {
            for (int j = i + 1; j < 4; ++j) {
                // outward triples: angle between faces = pi - angle(normals)
                double cosang = std::clamp(-n[i].dot(n[j]), -1.0, 1.0);
                double dihedral = 180.0 / M_PI * std::acos(cosang);
                q.min_dihedral_deg = std::min(q.min_dihedral_deg, dihedral);
            }
        }
        double inradius = 3.0 * vol / area_sum;
        q.max_aspect = std::max(q.max_aspect, longest / (3.0 * inradius));
    }
    return q;
}

double TetMesh::bbox_diameter() const {
    Vec3 lo = vertices.empty() ? Vec3::Zero() : vertices[0];
    Vec3 hi = lo;
    for (const auto& v : vertices) {
        lo = lo.cwiseMin(v);
        hi = hi.cwiseMax(v);
    }
    return (hi - lo).norm();
}

FaceChain TetMesh::surface_chain(const std::string& name) const {
    auto it = surface_tags.find(name);
    if (it == surface_tags.end()) throw Error("unknown surface tag: " + name);
    FaceChain chain;
    chain.reserve(it->second.size());
    for (const auto& tri : it->second) {
        int f = face_index(tri[0], tri[1], tri[2]);
        if (f < 0) throw Error("surface tag " + name + " references a non-face triple");
        chain.push_back({f, triple_parity(tri[0], tri[1], tri[2])});
    }
    return chain;
}

EdgeChain TetMesh::curve_chain(const std::string& name) const {
    auto it = curve_tags.find(name);
    if (it == curve_tags.end()) throw Error("unknown curve tag: " + name);
    EdgeChain chain;
    chain.reserve(it->second.size());
    for (const auto& pr : it->second) {
        int e = edge_index(pr[0], pr[1]);
        if (e < 0) throw Error("curve tag " + name + " references a non-edge pair");
        chain.push_back({e, pr[0] < pr[1] ? 1 : -1});
    }
    return chain;
}

EdgeChain chain_boundary(const TetMesh& mesh, const FaceChain& chain) {
    std::map<int, int> coeff;
    for (const auto& fc : chain) {
        const auto& tri = mesh.faces()[fc.face];  // sorted (a<b<c)
        // boundary of [a,b,c] = [b,c] - [a,c] + [a,b]
        coeff[mesh.edge_index(tri[1], tri[2])] += fc.sign;
        coeff[mesh.edge_index(tri[0], tri[2])] -= fc.sign;
        coeff[mesh.edge_index(tri[0], tri[1])] += fc.sign;
    }
    EdgeChain out;
    for (const auto& [e, c] : coeff) {
        if (c == 0) continue;
        if (c != 1 && c != -1) throw Error("2-chain boundary has coefficient beyond +-1");
        out.push_back({e, c});
    }
    return out;
}

std::vector<std::array<int, 2>> chain_to_pairs(const TetMesh& mesh, const EdgeChain& chain) {
    std::vector<std::array<int, 2>> pairs;
    pairs.reserve(chain.size());
    for (const auto& ec : chain) {
        const auto& e = mesh.edges()[ec.edge];
        if (ec.sign > 0) pairs.push_back({e[0], e[1]});
        else pairs.push_back({e[1], e[0]});
    }
    return pairs;
}

Vec3 TetMesh::vertex_normal(int v) const {
    Vec3 n = Vec3::Zero();
    for (size_t k = 0; k < boundary_faces_.size(); ++k) {
        const auto& tri = boundary_triples_[k];
        if (tri[0] != v && tri[1] != v && tri[2] != v) continue;
        Vec3 nk = (vertices[tri[1]] - vertices[tri[0]]).cross(vertices[tri[2]] - vertices[tri[0]]);
        n += 0.5 * nk;  // area-weighted outward normal
    }
    double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

}  // namespace curlspec
