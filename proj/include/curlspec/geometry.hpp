#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

namespace curlspec {

using Vec3 = Eigen::Vector3d;

/// Signed volume of the tetrahedron (a,b,c,d); positive when (b-a, c-a, d-a)
/// is a right-handed frame.
inline double tet_volume(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
    return (b - a).cross(c - a).dot(d - a) / 6.0;
}

inline double triangle_area(const Vec3& a, const Vec3& b, const Vec3& c) {
    return 0.5 * (b - a).cross(c - a).norm();
}

/// Unit normal of the triangle (a,b,c), oriented by the vertex order.
inline Vec3 triangle_normal(const Vec3& a, const Vec3& b, const Vec3& c) {
    Vec3 n = (b - a).cross(c - a);
    double len = n.norm();
    return len > 0 ? Vec3(n / len) : Vec3::Zero();
}

/// Barycentric gradients of the four hat functions on a tet.  Row i is
/// grad(lambda_i); constant on the tet.
inline std::array<Vec3, 4> barycentric_gradients(const Vec3& a, const Vec3& b,
                                                 const Vec3& c, const Vec3& d) {
    // grad(lambda_i) = (opposite face normal) * area / (3 vol), with inward sign;
    // computed via the inverse Jacobian for robustness.
    Eigen::Matrix3d J;
    J.col(0) = b - a;
    J.col(1) = c - a;
    J.col(2) = d - a;
    Eigen::Matrix3d Jinv = J.inverse();
    std::array<Vec3, 4> g;
    g[1] = Jinv.row(0);
    g[2] = Jinv.row(1);
    g[3] = Jinv.row(2);
    g[0] = -(g[1] + g[2] + g[3]);
    return g;
}

/// Quadrature rule on the reference triangle given by barycentric points and
/// weights summing to 1; integrals are weight-sum times physical area.
struct TriQuadrature {
    std::vector<std::array<double, 3>> points;  // barycentric coordinates
    std::vector<double> weights;                // sum to 1
};

/// Midpoint (three-point) rule, exact for quadratics.
inline const TriQuadrature& tri_quadrature_deg2() {
    static const TriQuadrature q{
        {{0.5, 0.5, 0.0}, {0.0, 0.5, 0.5}, {0.5, 0.0, 0.5}},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    return q;
}

/// Six-point Dunavant rule, exact for quartics; used whenever interpolated
/// fields multiply a P1 speed on boundary faces.
inline const TriQuadrature& tri_quadrature_deg4() {
    static const TriQuadrature q = [] {
        TriQuadrature r;
        const double a1 = 0.816847572980459, b1 = 0.091576213509771;
        const double a2 = 0.108103018168070, b2 = 0.445948490915965;
        const double w1 = 0.109951743655322, w2 = 0.223381589678011;
        r.points = {{a1, b1, b1}, {b1, a1, b1}, {b1, b1, a1},
                    {a2, b2, b2}, {b2, a2, b2}, {b2, b2, a2}};
        r.weights = {w1, w1, w1, w2, w2, w2};
        return r;
    }();
    return q;
}

}  // namespace curlspec
