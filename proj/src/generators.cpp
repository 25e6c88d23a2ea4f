#include "curlspec/generators.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace curlspec {

namespace {

// Kuhn (Freudenthal) subdivision of the unit cell: one tet per monotone
// vertex path, 6 per cell, face-compatible across translated cells.
const int kKuhnPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

// Emit the 6 Kuhn tets of the cell with corner ids given by corner(di,dj,dk).
void emit_kuhn_tets(const std::function<int(int, int, int)>& corner,
                    std::vector<std::array<int, 4>>& tets) {
    for (const auto& perm : kKuhnPerms) {
        std::array<int, 3> step{0, 0, 0};
        std::array<int, 4> tet;
        tet[0] = corner(0, 0, 0);
        for (int s = 0; s < 3; ++s) {
            step[perm[s]] = 1;
            tet[s + 1] = corner(step[0], step[1], step[2]);
        }
        tets.push_back(tet);
    }
}

// Reorder each tet to positive volume (swap one pair if needed).
void orient_positive(TetMesh& mesh) {
    for (auto& T : mesh.tets) {
        double vol = tet_volume(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                mesh.vertices[T[2]], mesh.vertices[T[3]]);
        if (vol < 0) std::swap(T[2], T[3]);
    }
}

// Map the square [-1,1]^2 onto the unit disk along rays, sup-norm shells to
// circles.
void square_to_disk(double x, double y, double& u, double& v) {
    double linf = std::max(std::abs(x), std::abs(y));
    double l2 = std::hypot(x, y);
    double s = l2 > 0 ? linf / l2 : 0.0;
    u = x * s;
    v = y * s;
}

}  // namespace

TetMesh generate_ball(double radius, int refinement) {
    if (!(radius > 0)) throw Error("generate_ball: radius must be positive");
    if (refinement < 0) throw Error("generate_ball: refinement must be >= 0");
    const int n = 2 << refinement;  // cells per side, h halves per level

    TetMesh mesh;
    mesh.domain_name = "ball";
    const int nv1 = n + 1;
    auto vid = [nv1](int i, int j, int k) { return (i * nv1 + j) * nv1 + k; };

    mesh.vertices.resize(static_cast<size_t>(nv1) * nv1 * nv1);
    for (int i = 0; i <= n; ++i) {
        for (int j = 0; j <= n; ++j) {
            for (int k = 0; k <= n; ++k) {
                Vec3 x(-1.0 + 2.0 * i / n, -1.0 + 2.0 * j / n, -1.0 + 2.0 * k / n);
                double linf = x.cwiseAbs().maxCoeff();
                double l2 = x.norm();
                double s = l2 > 0 ? linf / l2 : 0.0;
                mesh.vertices[vid(i, j, k)] = radius * s * x;
            }
        }
    }
    mesh.tets.reserve(static_cast<size_t>(n) * n * n * 6);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                emit_kuhn_tets([&](int di, int dj, int dk) { return vid(i + di, j + dj, k + dk); },
                               mesh.tets);
    orient_positive(mesh);
    mesh.finalize();
    return mesh;
}

TetMesh generate_solid_torus(double R, double r, int refinement) {
    if (!(R > r && r > 0)) throw Error("generate_solid_torus: need R > r > 0");
    if (refinement < 0) throw Error("generate_solid_torus: refinement must be >= 0");
    // Linear ladder: element counts grow like (r+2)^3, which keeps the
    // revolved meshes at desk scale while h decreases monotonically.
    const int nd = 2 * (refinement + 2);  // disk cells per side
    const int nphi = 4 * nd;              // rings around the axis

    TetMesh mesh;
    mesh.domain_name = "solid_torus";
    const int nd1 = nd + 1;
    const int disk_verts = nd1 * nd1;
    auto disk_id = [nd1](int i, int j) { return i * nd1 + j; };
    auto vid = [&](int i, int j, int k) { return ((k % nphi + nphi) % nphi) * disk_verts + disk_id(i, j); };

    mesh.vertices.resize(static_cast<size_t>(nphi) * disk_verts);
    for (int k = 0; k < nphi; ++k) {
        double phi = 2.0 * M_PI * k / nphi;
        double c = std::cos(phi), s = std::sin(phi);
        for (int i = 0; i <= nd; ++i) {
            for (int j = 0; j <= nd; ++j) {
                double u, w;
                square_to_disk(-1.0 + 2.0 * i / nd, -1.0 + 2.0 * j / nd, u, w);
                double rho = R + r * u;
                mesh.vertices[vid(i, j, k)] = Vec3(rho * c, rho * s, r * w);
            }
        }
    }
    mesh.tets.reserve(static_cast<size_t>(nphi) * nd * nd * 6);
    for (int k = 0; k < nphi; ++k)
        for (int i = 0; i < nd; ++i)
            for (int j = 0; j < nd; ++j)
                emit_kuhn_tets([&](int di, int dj, int dk) { return vid(i + di, j + dj, k + dk); },
                               mesh.tets);
    orient_positive(mesh);
    mesh.finalize();

    // Cut disk sigma1: both triangles of each disk cell at the phi = 0 plane,
    // oriented so the normal points in +phi (= +y at phi = 0).
    std::vector<std::array<int, 3>> sigma;
    for (int i = 0; i < nd; ++i) {
        for (int j = 0; j < nd; ++j) {
            int a = vid(i, j, 0), b = vid(i + 1, j, 0);
            int c = vid(i + 1, j + 1, 0), d = vid(i, j + 1, 0);
            // Kuhn pattern splits the in-plane cell face along the a-c diagonal.
            for (auto tri : {std::array<int, 3>{a, b, c}, std::array<int, 3>{a, c, d}}) {
                Vec3 n = triangle_normal(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                         mesh.vertices[tri[2]]);
                if (n.y() < 0) std::swap(tri[1], tri[2]);
                sigma.push_back(tri);
            }
        }
    }
    mesh.surface_tags["sigma1"] = sigma;

    // alpha1 = boundary of the cut disk (the meridian).
    mesh.curve_tags["alpha1"] =
        chain_to_pairs(mesh, chain_boundary(mesh, mesh.surface_chain("sigma1")));

    // beta1 = outer equator, oriented along +phi; the sign convention making
    // the intersection number alpha.beta come out +1 is fixed here.
    {
        std::vector<std::array<int, 2>> beta;
        int i = nd, j = nd / 2;  // disk point (u,w) = (1,0)
        for (int k = 0; k < nphi; ++k) beta.push_back({vid(i, j, k), vid(i, j, k + 1)});
        mesh.curve_tags["beta1"] = beta;
    }
    return mesh;
}

namespace {

TetMesh generate_genus2(int refinement) {
    // Slab [0,10]x[0,6]x[0,2] minus the square through-holes
    // [2,4]x[2,4]x[0,2] and [6,8]x[2,4]x[0,2]; lattice spacing 1/2^r keeps
    // the tag planes x=3, x=7 and z=1 on the grid at every refinement.
    const int scale = 1 << refinement;
    const int NX = 10 * scale, NY = 6 * scale, NZ = 2 * scale;

    auto in_hole = [&](int ci, int cj) {
        // cell (ci,cj,*) in lattice units
        double x0 = static_cast<double>(ci) / scale, y0 = static_cast<double>(cj) / scale;
        bool hole1 = (x0 >= 2.0 - 1e-9 && x0 <= 4.0 - 1.0 / scale + 1e-9 && y0 >= 2.0 - 1e-9 &&
                      y0 <= 4.0 - 1.0 / scale + 1e-9);
        bool hole2 = (x0 >= 6.0 - 1e-9 && x0 <= 8.0 - 1.0 / scale + 1e-9 && y0 >= 2.0 - 1e-9 &&
                      y0 <= 4.0 - 1.0 / scale + 1e-9);
        return hole1 || hole2;
    };

    TetMesh mesh;
    mesh.domain_name = "handlebody_genus2";

    // Compact vertex numbering over used lattice points.
    std::vector<int> lattice(static_cast<size_t>(NX + 1) * (NY + 1) * (NZ + 1), -1);
    auto lid = [&](int i, int j, int k) {
        return (static_cast<size_t>(i) * (NY + 1) + j) * (NZ + 1) + k;
    };
    auto touch = [&](int i, int j, int k) {
        int& slot = lattice[lid(i, j, k)];
        if (slot < 0) {
            slot = static_cast<int>(mesh.vertices.size());
            mesh.vertices.push_back(
                Vec3(static_cast<double>(i) / scale, static_cast<double>(j) / scale,
                     static_cast<double>(k) / scale));
        }
        return slot;
    };

    for (int i = 0; i < NX; ++i) {
        for (int j = 0; j < NY; ++j) {
            if (in_hole(i, j)) continue;
            for (int k = 0; k < NZ; ++k) {
                emit_kuhn_tets(
                    [&](int di, int dj, int dk) { return touch(i + di, j + dj, k + dk); },
                    mesh.tets);
            }
        }
    }
    orient_positive(mesh);
    mesh.finalize();

    auto vertex_at = [&](double x, double y, double z) {
        int i = static_cast<int>(std::lround(x * scale));
        int j = static_cast<int>(std::lround(y * scale));
        int k = static_cast<int>(std::lround(z * scale));
        int v = lattice[lid(i, j, k)];
        if (v < 0) throw Error("generate_handlebody: missing lattice vertex");
        return v;
    };

    // Cut walls sigma1/sigma2: grid plane x = xcut, y in [0,2], z in [0,2],
    // oriented with normal +x.
    auto make_sigma = [&](double xcut) {
        std::vector<std::array<int, 3>> tris;
        for (int j = 0; j < 2 * scale; ++j) {
            for (int k = 0; k < NZ; ++k) {
                double y0 = static_cast<double>(j) / scale, z0 = static_cast<double>(k) / scale;
                double h = 1.0 / scale;
                int a = vertex_at(xcut, y0, z0), b = vertex_at(xcut, y0 + h, z0);
                int c = vertex_at(xcut, y0 + h, z0 + h), d = vertex_at(xcut, y0, z0 + h);
                // Kuhn splits constant-x cell faces along the min->max diagonal a-c.
                for (auto tri : {std::array<int, 3>{a, b, c}, std::array<int, 3>{a, c, d}}) {
                    Vec3 n = triangle_normal(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                             mesh.vertices[tri[2]]);
                    if (n.x() < 0) std::swap(tri[1], tri[2]);
                    if (mesh.face_index(tri[0], tri[1], tri[2]) < 0)
                        throw Error("generate_handlebody: cut wall triple is not a mesh face");
                    tris.push_back(tri);
                }
            }
        }
        return tris;
    };
    mesh.surface_tags["sigma1"] = make_sigma(3.0);
    mesh.surface_tags["sigma2"] = make_sigma(7.0);
    mesh.curve_tags["alpha1"] =
        chain_to_pairs(mesh, chain_boundary(mesh, mesh.surface_chain("sigma1")));
    mesh.curve_tags["alpha2"] =
        chain_to_pairs(mesh, chain_boundary(mesh, mesh.surface_chain("sigma2")));

    // betaJ: loop around hole J on the tunnel wall at mid-height z = 1,
    // counterclockwise seen from +z.
    auto make_beta = [&](double hx0, double hy0) {
        std::vector<std::array<int, 2>> loop;
        double h = 1.0 / scale;
        auto add_run = [&](double x0, double y0, double dx, double dy, int steps) {
            for (int s = 0; s < steps; ++s)
                loop.push_back({vertex_at(x0 + s * dx, y0 + s * dy, 1.0),
                                vertex_at(x0 + (s + 1) * dx, y0 + (s + 1) * dy, 1.0)});
        };
        int steps = 2 * scale;
        add_run(hx0, hy0, h, 0, steps);                  // south edge, +x
        add_run(hx0 + 2.0, hy0, 0, h, steps);            // east edge, +y
        add_run(hx0 + 2.0, hy0 + 2.0, -h, 0, steps);     // north edge, -x
        add_run(hx0, hy0 + 2.0, 0, -h, steps);           // west edge, -y
        return loop;
    };
    mesh.curve_tags["beta1"] = make_beta(2.0, 2.0);
    mesh.curve_tags["beta2"] = make_beta(6.0, 2.0);
    return mesh;
}

}  // namespace

TetMesh generate_handlebody(int genus, int refinement) {
    switch (genus) {
        case 0:
            return generate_ball(1.0, refinement);
        case 1:
            return generate_solid_torus(2.0, 0.5, refinement);
        case 2:
            return generate_genus2(refinement);
        default: {
            std::ostringstream os;
            os << "generate_handlebody: unsupported genus " << genus;
            throw Error(os.str());
        }
    }
}

}  // namespace curlspec
