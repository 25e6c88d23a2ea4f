#include "curlspec/hadamard.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace curlspec {

namespace {

// Evaluate the Whitney interpolant of a complex edge cochain at the
// quadrature points of every boundary face (one-sided).
std::vector<Eigen::Matrix<std::complex<double>, 3, Eigen::Dynamic>> boundary_samples(
    const CochainComplex& cc, const Eigen::VectorXcd& v) {
    const TetMesh& mesh = *cc.mesh;
    const auto& quad = tri_quadrature_deg4();
    const int nq = static_cast<int>(quad.points.size());
    const auto& bfids = mesh.boundary_face_ids();
    Eigen::VectorXd vr = v.real(), vi = v.imag();
    std::vector<Eigen::Matrix<std::complex<double>, 3, Eigen::Dynamic>> out(bfids.size());
    for (size_t kf = 0; kf < bfids.size(); ++kf) {
        const auto& tri = mesh.boundary_face_triple(kf);
        int tet = mesh.face_tets(bfids[kf])[0];
        out[kf].resize(3, nq);
        for (int q = 0; q < nq; ++q) {
            Vec3 x = quad.points[q][0] * mesh.vertices[tri[0]] +
                     quad.points[q][1] * mesh.vertices[tri[1]] +
                     quad.points[q][2] * mesh.vertices[tri[2]];
            Vec3 re = whitney1_eval(mesh, tet, vr, x);
            Vec3 im = whitney1_eval(mesh, tet, vi, x);
            for (int c = 0; c < 3; ++c) out[kf](c, q) = std::complex<double>(re[c], im[c]);
        }
    }
    return out;
}

Eigen::VectorXd boundary_face_areas(const TetMesh& mesh) {
    const auto& bfids = mesh.boundary_face_ids();
    Eigen::VectorXd areas(bfids.size());
    for (size_t kf = 0; kf < bfids.size(); ++kf) {
        const auto& tri = mesh.boundary_face_triple(kf);
        areas[kf] = triangle_area(mesh.vertices[tri[0]], mesh.vertices[tri[1]],
                                  mesh.vertices[tri[2]]);
    }
    return areas;
}

}  // namespace

BoundaryDensity boundary_density(const CochainComplex& cc, const Eigen::VectorXcd& v) {
    const TetMesh& mesh = *cc.mesh;
    const auto& quad = tri_quadrature_deg4();
    const int nq = static_cast<int>(quad.points.size());
    auto samples = boundary_samples(cc, v);
    BoundaryDensity d;
    d.face_areas = boundary_face_areas(mesh);
    const int nf = static_cast<int>(samples.size());
    d.quad_values.resize(nq, nf);
    d.face_means.resize(nf);
    d.total = 0;
    for (int kf = 0; kf < nf; ++kf) {
        double mean = 0;
        for (int q = 0; q < nq; ++q) {
            double val = samples[kf].col(q).squaredNorm();
            d.quad_values(q, kf) = val;
            mean += quad.weights[q] * val;
        }
        d.face_means[kf] = mean;
        d.total += mean * d.face_areas[kf];
    }
    return d;
}

BoundaryCrossDensity boundary_cross_density(const CochainComplex& cc, const Eigen::VectorXcd& u,
                                            const Eigen::VectorXcd& w) {
    const auto& quad = tri_quadrature_deg4();
    const int nq = static_cast<int>(quad.points.size());
    auto su = boundary_samples(cc, u);
    auto sw = boundary_samples(cc, w);
    BoundaryCrossDensity d;
    d.face_areas = boundary_face_areas(*cc.mesh);
    const int nf = static_cast<int>(su.size());
    d.quad_values.resize(nq, nf);
    d.total = 0;
    for (int kf = 0; kf < nf; ++kf) {
        std::complex<double> mean = 0;
        for (int q = 0; q < nq; ++q) {
            std::complex<double> val = su[kf].col(q).dot(sw[kf].col(q));
            // Eigen's dot conjugates the left factor; the pairing u . conj(w)
            // is the conjugate of that
            val = std::conj(val);
            d.quad_values(q, kf) = val;
            mean += quad.weights[q] * val;
        }
        d.total += mean * d.face_areas[kf];
    }
    return d;
}

Eigen::MatrixXd speed_at_quadrature(const TetMesh& mesh, const Eigen::VectorXd& boundary_speed) {
    const auto& quad = tri_quadrature_deg4();
    const int nq = static_cast<int>(quad.points.size());
    const auto& bverts = mesh.boundary_vertices();
    if (boundary_speed.size() != static_cast<Eigen::Index>(bverts.size()))
        throw Error("speed_at_quadrature: boundary_speed size mismatch");
    std::vector<double> per_vertex(mesh.n_vertices(), 0.0);
    for (size_t i = 0; i < bverts.size(); ++i) per_vertex[bverts[i]] = boundary_speed[i];
    const auto& bfids = mesh.boundary_face_ids();
    Eigen::MatrixXd fq(nq, bfids.size());
    for (size_t kf = 0; kf < bfids.size(); ++kf) {
        const auto& tri = mesh.boundary_face_triple(kf);
        for (int q = 0; q < nq; ++q)
            fq(q, kf) = quad.points[q][0] * per_vertex[tri[0]] +
                        quad.points[q][1] * per_vertex[tri[1]] +
                        quad.points[q][2] * per_vertex[tri[2]];
    }
    return fq;
}

double boundary_integral(const TetMesh& mesh, const Eigen::MatrixXd& fq,
                         const Eigen::VectorXd& face_areas, const Eigen::MatrixXd& gq) {
    const auto& quad = tri_quadrature_deg4();
    double total = 0;
    for (int kf = 0; kf < fq.cols(); ++kf) {
        double acc = 0;
        for (int q = 0; q < fq.rows(); ++q) acc += quad.weights[q] * fq(q, kf) * gq(q, kf);
        total += acc * face_areas[kf];
    }
    return total;
}

double shape_derivative(double lambda, const BoundaryDensity& density, const TetMesh& mesh,
                        const Eigen::VectorXd& boundary_speed) {
    Eigen::MatrixXd fq = speed_at_quadrature(mesh, boundary_speed);
    return -lambda * boundary_integral(mesh, fq, density.face_areas, density.quad_values);
}

std::complex<double> cross_term(const CochainComplex& cc, const Eigen::VectorXcd& u,
                                const Eigen::VectorXcd& w, const Eigen::VectorXd& boundary_speed,
                                double lambda, double kernel_threshold) {
    if (std::abs(lambda) <= kernel_threshold) {
        std::ostringstream os;
        os << "cross_term: zero eigenvalue (|lambda| = " << std::abs(lambda)
           << " below kernel threshold " << kernel_threshold << ")";
        throw Error(os.str());
    }
    auto d = boundary_cross_density(cc, u, w);
    Eigen::MatrixXd fq = speed_at_quadrature(*cc.mesh, boundary_speed);
    const auto& quad = tri_quadrature_deg4();
    std::complex<double> total = 0;
    for (int kf = 0; kf < fq.cols(); ++kf) {
        std::complex<double> acc = 0;
        for (int q = 0; q < fq.rows(); ++q) acc += quad.weights[q] * fq(q, kf) * d.quad_values(q, kf);
        total += acc * d.face_areas[kf];
    }
    return total;
}

RellichBasis rellich_align(const CochainComplex& cc, const Eigen::MatrixXcd& cluster,
                           const TetMesh& mesh, const Eigen::VectorXd& boundary_speed) {
    const int m = static_cast<int>(cluster.cols());
    Eigen::MatrixXd fq = speed_at_quadrature(mesh, boundary_speed);
    const auto& quad = tri_quadrature_deg4();
    Eigen::MatrixXcd G(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            auto d = boundary_cross_density(cc, cluster.col(i), cluster.col(j));
            std::complex<double> total = 0;
            for (int kf = 0; kf < fq.cols(); ++kf) {
                std::complex<double> acc = 0;
                for (int q = 0; q < fq.rows(); ++q)
                    acc += quad.weights[q] * fq(q, kf) * d.quad_values(q, kf);
                total += acc * d.face_areas[kf];
            }
            G(i, j) = total;
            G(j, i) = std::conj(total);
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    RellichBasis out;
    out.vectors = cluster * es.eigenvectors();
    out.g_diagonal = es.eigenvalues();
    return out;
}

namespace {

// Overlap-based matching of the previous aligned cluster to the new solve.
// Returns matched (lambda, vector) pairs in branch order plus the smallest
// principal-angle cosine between the subspaces.
struct MatchResult {
    Eigen::VectorXd lambdas;
    Eigen::MatrixXcd vectors;
    double min_overlap;
};

MatchResult match_cluster(const Eigen::MatrixXcd& prev, const SpMat& M_new,
                          const EigenResult& res, int m) {
    // candidates: m eigenpairs nearest the previous cluster mean are the
    // first m by construction of the solve window; use all returned pairs
    const int ncand = static_cast<int>(res.eigenvalues.size());
    if (ncand < m) throw BranchLossError("track_family: solver returned too few pairs");
    Eigen::MatrixXcd Mprev = M_new.cast<std::complex<double>>() * prev;

    // subspace overlap: principal angles between prev and the span of the m
    // best-matching candidates; first build the overlap of prev with all
    Eigen::MatrixXcd O = res.eigenvectors.adjoint() * Mprev;  // ncand x m

    // greedy assignment by largest |overlap|
    std::vector<int> branch_of(m, -1);
    std::vector<char> used(ncand, 0);
    for (int pass = 0; pass < m; ++pass) {
        int bi = -1, bj = -1;
        double best = -1;
        for (int j = 0; j < m; ++j) {
            if (branch_of[j] >= 0) continue;
            for (int i = 0; i < ncand; ++i) {
                if (used[i]) continue;
                double a = std::abs(O(i, j));
                if (a > best) {
                    best = a;
                    bi = i;
                    bj = j;
                }
            }
        }
        branch_of[bj] = bi;
        used[bi] = 1;
    }

    MatchResult out;
    out.lambdas.resize(m);
    out.vectors.resize(prev.rows(), m);
    for (int j = 0; j < m; ++j) {
        int i = branch_of[j];
        out.lambdas[j] = res.eigenvalues[i];
        Eigen::VectorXcd v = res.eigenvectors.col(i);
        // phase/sign alignment with the previous branch vector
        std::complex<double> phase = O(i, j);
        if (std::abs(phase) > 0) v *= std::conj(phase) / std::abs(phase);
        out.vectors.col(j) = v;
    }
    // principal angles between the matched subspace and the previous one
    Eigen::MatrixXcd Om(m, m);
    for (int j = 0; j < m; ++j)
        for (int jj = 0; jj < m; ++jj) Om(j, jj) = out.vectors.col(j).dot(Mprev.col(jj));
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(Om);
    out.min_overlap = svd.singularValues().minCoeff();
    return out;
}

}  // namespace

TrackedBranch track_family(const TetMesh& mesh, const DeformationField& field,
                           const LagrangianSpec& lag, const HomologyBasis& basis, double shift,
                           int cluster_begin, int cluster_end, const std::vector<double>& t_grid,
                           const TrackOptions& opts) {
    const int m = cluster_end - cluster_begin;
    if (m <= 0) throw Error("track_family: empty cluster range");

    // base solve on the undeformed mesh
    auto solve_at = [&](const TetMesh& msh, double solve_shift, int k) {
        auto mptr = std::make_shared<TetMesh>(msh);
        auto cc = std::make_shared<CochainComplex>(build_complex(mptr, opts.solver.n_threads));
        SolverOptions so = opts.solver;
        so.include_harmonic_basis = false;
        auto handle = constraint_space(cc, basis, lag);
        EigenResult res = solve_spectrum(handle, k, solve_shift, so);
        return std::make_pair(cc, res);
    };

    auto [cc0, res0] = solve_at(mesh, shift, cluster_end + opts.extra_solve);
    if (cluster_end > res0.eigenvalues.size())
        throw Error("track_family: cluster range exceeds the solved window");

    TrackedBranch track;
    track.t_samples.assign(t_grid.begin(), t_grid.end());
    track.lambdas.resize(m, t_grid.size());
    track.vectors.resize(t_grid.size());
    track.min_overlaps.assign(t_grid.size(), 1.0);

    Eigen::MatrixXcd prev = res0.eigenvectors.middleCols(cluster_begin, m);
    Eigen::VectorXd prev_lambda = res0.eigenvalues.segment(cluster_begin, m);

    for (size_t s = 0; s < t_grid.size(); ++s) {
        double t = t_grid[s];
        if (t == 0.0) {
            track.lambdas.col(s) = prev_lambda;
            track.vectors[s] = prev;
            track.min_overlaps[s] = 1.0;
            continue;
        }
        TetMesh mt = deform(mesh, field, t);
        double window = prev_lambda.mean();  // shift update: cluster mean
        auto [cct, rest] = solve_at(mt, window, m + opts.extra_solve);
        MatchResult match = match_cluster(prev, cct->M1, rest, m);
        if (match.min_overlap < opts.overlap_threshold) {
            std::ostringstream os;
            os << "track_family: subspace overlap " << match.min_overlap
               << " below threshold " << opts.overlap_threshold << " at t = " << t;
            throw BranchLossError(os.str());
        }
        track.lambdas.col(s) = match.lambdas;
        track.vectors[s] = match.vectors;
        track.min_overlaps[s] = match.min_overlap;
        prev = match.vectors;
        prev_lambda = match.lambdas;
    }
    return track;
}

FdReport fd_check(const TetMesh& mesh, const DeformationField& field, const LagrangianSpec& lag,
                  const HomologyBasis& basis, int k_index, const FdOptions& opts) {
    // base solve and cluster identification
    auto mptr = std::make_shared<TetMesh>(mesh);
    auto cc0 = std::make_shared<CochainComplex>(build_complex(mptr, opts.track.solver.n_threads));
    SolverOptions so = opts.track.solver;
    so.include_harmonic_basis = false;
    auto handle = constraint_space(cc0, basis, lag);
    double probe_shift = opts.shift;
    EigenResult res0 = solve_spectrum(handle, k_index + 1 + opts.track.extra_solve,
                                      probe_shift, so);
    if (k_index >= res0.eigenvalues.size()) throw Error("fd_check: eigenvalue index out of range");
    auto clusters = cluster_multiplicity(res0.eigenvalues, opts.gap_tol);
    int cb = 0, ce = 0;
    for (auto [a, b] : clusters)
        if (k_index >= a && k_index < b) {
            cb = a;
            ce = b;
        }
    const int m = ce - cb;

    // Rellich alignment in the direction of the field fixes the branch basis
    RellichBasis aligned = rellich_align(*cc0, res0.eigenvectors.middleCols(cb, m), mesh,
                                         field.boundary_speed);

    FdReport report;
    report.lambda0 = res0.eigenvalues.segment(cb, m);
    report.quality = mesh.quality();
    report.formula_values.resize(m);
    for (int j = 0; j < m; ++j) {
        auto dens = boundary_density(*cc0, aligned.vectors.col(j));
        report.formula_values[j] = shape_derivative(report.lambda0.mean(), dens, mesh,
                                                    field.boundary_speed);
    }

    double delta0 = opts.delta0 > 0 ? opts.delta0 : 1e-3 * mesh.bbox_diameter();
    std::vector<double> deltas;
    for (int i = 0; i < opts.sweep_points; ++i) deltas.push_back(delta0 / (1 << i));
    report.deltas = deltas;
    report.fd_values.resize(m, deltas.size());

    double shift0 = report.lambda0.mean();
    for (size_t di = 0; di < deltas.size(); ++di) {
        double dt = deltas[di];
        Eigen::VectorXd lp(m), lm(m);
        for (int side = 0; side < 2; ++side) {
            double t = side == 0 ? dt : -dt;
            TetMesh mt = deform(mesh, field, t);
            auto mp = std::make_shared<TetMesh>(mt);
            auto cct = std::make_shared<CochainComplex>(
                build_complex(mp, opts.track.solver.n_threads));
            auto ht = constraint_space(cct, basis, lag);
            EigenResult rt = solve_spectrum(ht, m + opts.track.extra_solve, shift0, so);
            MatchResult mr = match_cluster(aligned.vectors, cct->M1, rt, m);
            if (mr.min_overlap < opts.track.overlap_threshold)
                throw BranchLossError("fd_check: branch overlap lost during the delta sweep");
            (side == 0 ? lp : lm) = mr.lambdas;
        }
        report.fd_values.col(di) = (lp - lm) / (2.0 * dt);
    }

    report.relative_errors.resize(m);
    report.sweep_orders.resize(m);
    for (int j = 0; j < m; ++j) {
        double fd_best = report.fd_values(j, deltas.size() - 1);
        double denom = std::max({std::abs(report.formula_values[j]), std::abs(fd_best),
                                 0.01 * std::abs(report.lambda0[j])});
        report.relative_errors[j] = std::abs(fd_best - report.formula_values[j]) / denom;
        // observed order from successive sweep differences
        double order = 0;
        int counted = 0;
        for (size_t i = 0; i + 2 < deltas.size(); ++i) {
            double e0 = std::abs(report.fd_values(j, i) - report.fd_values(j, i + 1));
            double e1 = std::abs(report.fd_values(j, i + 1) - report.fd_values(j, i + 2));
            double floor = 1e-9 * std::max(1.0, std::abs(report.lambda0[j]));
            if (e0 > floor && e1 > floor) {
                order += std::log2(e0 / e1);
                ++counted;
            }
        }
        report.sweep_orders[j] = counted > 0 ? order / counted : 2.0;
    }
    return report;
}

}  // namespace curlspec
