#include "curlspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <cstdlib>
#include <iostream>

#include "curlspec/eigen_solver.hpp"

namespace curlspec {

namespace {

// Quadrature flux functionals through the cut surfaces as sparse rows over
// edge cochains (composition of the cut-chain sum with the per-face normal
// integral of the interpolant, averaged over the adjacent tets).
SpMat flux_functional_rows(const CochainComplex& cc, const HomologyBasis& basis) {
    const TetMesh& mesh = *cc.mesh;
    const int l = basis.total_genus;
    std::vector<Eigen::Triplet<double>> trips;
    static const int ep[6][2] = {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    for (int j = 0; j < l; ++j) {
        for (const auto& fc : basis.cut_surfaces[j]) {
            const auto& tri = mesh.faces()[fc.face];
            Vec3 a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
            Vec3 nu = triangle_normal(a, b, c);
            double area = triangle_area(a, b, c);
            Vec3 centroid = (a + b + c) / 3.0;
            int sides = (mesh.face_tets(fc.face)[1] >= 0) ? 2 : 1;
            for (int s = 0; s < sides; ++s) {
                int t = mesh.face_tets(fc.face)[s];
                const auto& T = mesh.tets[t];
                auto g = barycentric_gradients(mesh.vertices[T[0]], mesh.vertices[T[1]],
                                               mesh.vertices[T[2]], mesh.vertices[T[3]]);
                std::array<double, 4> bary;
                for (int i = 0; i < 4; ++i)
                    bary[i] = (i == 0 ? 1.0 : 0.0) + g[i].dot(centroid - mesh.vertices[T[0]]);
                for (const auto& pr : ep) {
                    int x = pr[0], y = pr[1];
                    if (T[x] > T[y]) std::swap(x, y);
                    int e = mesh.edge_index(T[x], T[y]);
                    Vec3 w = bary[x] * g[y] - bary[y] * g[x];
                    trips.emplace_back(j, e, fc.sign * area * w.dot(nu) / sides);
                }
            }
        }
    }
    SpMat F(l, mesh.n_edges());
    F.setFromTriplets(trips.begin(), trips.end());
    return F;
}

// Drop one row index per class label (used for the redundant vertex and
// boundary-face constraint rows).
SpMat drop_one_per_class(const SpMat& rows, const std::vector<int>& labels, int n_classes) {
    std::vector<int> drop(n_classes, -1);
    for (size_t i = 0; i < labels.size(); ++i)
        if (drop[labels[i]] < 0) drop[labels[i]] = static_cast<int>(i);
    std::vector<int> remap(labels.size(), -1);
    int nkeep = 0;
    for (size_t i = 0; i < labels.size(); ++i)
        if (drop[labels[i]] != static_cast<int>(i)) remap[i] = nkeep++;
    std::vector<Eigen::Triplet<double>> trips;
    for (int c = 0; c < rows.outerSize(); ++c)
        for (SpMat::InnerIterator it(rows, c); it; ++it)
            if (remap[it.row()] >= 0) trips.emplace_back(remap[it.row()], c, it.value());
    SpMat out(nkeep, rows.cols());
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

SpMat scale_rows_unit(const SpMat& A) {
    Eigen::VectorXd scale(A.rows());
    scale.setZero();
    for (int c = 0; c < A.outerSize(); ++c)
        for (SpMat::InnerIterator it(A, c); it; ++it)
            scale[it.row()] = std::max(scale[it.row()], std::abs(it.value()));
    SpMat out = A;
    for (int c = 0; c < out.outerSize(); ++c)
        for (SpMat::InnerIterator it(out, c); it; ++it)
            it.valueRef() /= (scale[it.row()] > 0 ? scale[it.row()] : 1.0);
    return out;
}

SpMat vstack(const std::vector<const SpMat*>& blocks, int cols) {
    std::vector<Eigen::Triplet<double>> trips;
    int row0 = 0;
    for (const SpMat* b : blocks) {
        for (int c = 0; c < b->outerSize(); ++c)
            for (SpMat::InnerIterator it(*b, c); it; ++it)
                trips.emplace_back(row0 + static_cast<int>(it.row()), c, it.value());
        row0 += static_cast<int>(b->rows());
    }
    SpMat out(row0, cols);
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

}  // namespace

SpMat ConstraintHandle::stacked_real() const {
    if (!is_real) throw Error("ConstraintHandle: real stack requested for complex Lagrangian");
    Eigen::MatrixXd P = period_rows.real();
    std::vector<Eigen::Triplet<double>> trips;
    for (int i = 0; i < P.rows(); ++i)
        for (int j = 0; j < P.cols(); ++j)
            if (P(i, j) != 0.0) trips.emplace_back(i, j, P(i, j));
    SpMat period(P.rows(), P.cols());
    period.setFromTriplets(trips.begin(), trips.end());
    return vstack({&div_rows, &closure_rows, &period}, static_cast<int>(div_rows.cols()));
}

Eigen::SparseMatrix<std::complex<double>> ConstraintHandle::stacked_complex() const {
    using CSp = Eigen::SparseMatrix<std::complex<double>>;
    std::vector<Eigen::Triplet<std::complex<double>>> trips;
    int row0 = 0;
    auto add_real = [&](const SpMat& A) {
        for (int c = 0; c < A.outerSize(); ++c)
            for (SpMat::InnerIterator it(A, c); it; ++it)
                trips.emplace_back(row0 + static_cast<int>(it.row()), c, it.value());
        row0 += static_cast<int>(A.rows());
    };
    add_real(div_rows);
    add_real(closure_rows);
    for (int i = 0; i < period_rows.rows(); ++i) {
        for (int j = 0; j < period_rows.cols(); ++j)
            if (period_rows(i, j) != std::complex<double>(0, 0))
                trips.emplace_back(row0 + i, j, period_rows(i, j));
    }
    row0 += static_cast<int>(period_rows.rows());
    CSp out(row0, static_cast<int>(div_rows.cols()));
    out.setFromTriplets(trips.begin(), trips.end());
    return out;
}

ConstraintHandle constraint_space(std::shared_ptr<const CochainComplex> cc,
                                  const HomologyBasis& basis, const LagrangianSpec& lag) {
    validate_lagrangian(lag, basis);
    const TetMesh& mesh = *cc->mesh;
    ConstraintHandle h;
    h.cc = cc;
    h.basis = basis;
    h.lagrangian = lag;

    // (i) d0^T M1 rows for all vertices, minus one per connected component
    SpMat div_all = SpMat(cc->d0.transpose()) * cc->M1;
    h.div_rows = scale_rows_unit(
        drop_one_per_class(div_all, mesh.vertex_component(), mesh.n_components()));

    // trace-closure rows: boundary-face rows of d1, minus one per boundary
    // component (their signed sum over a closed component vanishes)
    {
        const auto& bfids = mesh.boundary_face_ids();
        std::vector<int> face_to_row(mesh.n_faces(), -1);
        for (size_t k = 0; k < bfids.size(); ++k) face_to_row[bfids[k]] = static_cast<int>(k);
        std::vector<Eigen::Triplet<double>> trips;
        for (int c = 0; c < cc->d1.outerSize(); ++c)
            for (SpMat::InnerIterator it(cc->d1, c); it; ++it)
                if (face_to_row[it.row()] >= 0)
                    trips.emplace_back(face_to_row[it.row()], c, it.value());
        SpMat closure_all(static_cast<int>(bfids.size()), mesh.n_edges());
        closure_all.setFromTriplets(trips.begin(), trips.end());
        h.closure_rows = drop_one_per_class(closure_all, mesh.boundary_face_component(),
                                            mesh.n_boundary_components());
    }

    // (ii) quadrature fluxes through the cut surfaces (reported only)
    h.flux_rows = flux_functional_rows(*cc, basis);
    h.n_flux_constraints = (lag.preset_name == "zero_flux") ? basis.total_genus : 0;

    // (iii) Lagrangian periods F * P
    SpMat P = period_matrix(mesh, basis);
    h.period_rows = lag.F * P.cast<std::complex<double>>();
    h.n_period_constraints = static_cast<int>(lag.F.rows());
    h.is_real = lag.is_real();
    return h;
}

Eigen::MatrixXd harmonic_fields(const CochainComplex& cc, const HomologyBasis& basis,
                                const SolverOptions& opts) {
    const TetMesh& mesh = *cc.mesh;
    const int l = basis.total_genus;
    if (l == 0) return Eigen::MatrixXd(mesh.n_edges(), 0);

    // curl-curl stiffness on the weakly divergence-free space: the kernel is
    // exactly the discrete harmonic space, dimension = total boundary genus.
    SpMat K = SpMat(cc.d1.transpose()) * cc.M2 * cc.d1;
    SpMat div_all = SpMat(cc.d0.transpose()) * cc.M1;
    SpMat B = scale_rows_unit(
        drop_one_per_class(div_all, mesh.vertex_component(), mesh.n_components()));

    // shift-invert at a negative shift keeps the operator definite; the
    // kernel converges first as the largest eigenvalue of the inverse
    double scale = 0;
    for (int i = 0; i < K.rows(); ++i) scale += K.coeff(i, i);
    double mscale = 0;
    for (int i = 0; i < cc.M1.rows(); ++i) mscale += cc.M1.coeff(i, i);
    double sigma = -1e-2 * (scale / std::max(1e-300, mscale));

    auto eig = constrained_eigs<double>(K, cc.M1, B, sigma, l + 2, opts.tol, 0, opts.seed,
                                        opts.shift_retries);
    // count near-zero eigenvalues of the PSD pencil
    double first_nonzero = 0;
    int dim = 0;
    for (int i = 0; i < eig.values.size(); ++i) {
        if (eig.values[i] < -1e-6 * std::abs(sigma))
            throw Error("harmonic_fields: negative curl-curl eigenvalue");
    }
    for (int i = 0; i < eig.values.size(); ++i)
        if (eig.values[i] > 1e-8 * std::abs(sigma)) {
            first_nonzero = eig.values[i];
            break;
        }
    for (int i = 0; i < eig.values.size(); ++i)
        if (eig.values[i] < std::max(1e-8 * std::abs(sigma),
                                     first_nonzero > 0 ? 1e-6 * first_nonzero : 0.0))
            ++dim;
    if (dim != l) {
        std::ostringstream os;
        os << "harmonic_fields: kernel dimension " << dim << ", expected genus " << l;
        throw DimensionMismatchError(os.str());
    }
    Eigen::MatrixXd H = eig.vectors.leftCols(dim);

    // the flux map on the harmonic basis must be invertible
    Eigen::MatrixXd FH = harmonic_flux_matrix(cc, basis, H);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(FH);
    if (!lu.isInvertible())
        throw DimensionMismatchError("harmonic_fields: flux map on the kernel is singular");
    return H;
}

Eigen::MatrixXd harmonic_flux_matrix(const CochainComplex& cc, const HomologyBasis& basis,
                                     const Eigen::MatrixXd& hbasis) {
    const int l = basis.total_genus;
    SpMat Fq = flux_functional_rows(cc, basis);
    Eigen::MatrixXd out(l, hbasis.cols());
    for (int j = 0; j < hbasis.cols(); ++j) out.col(j) = Fq * hbasis.col(j);
    return out;
}

std::vector<std::pair<int, int>> cluster_multiplicity(const Eigen::VectorXd& eigenvalues,
                                                      double gap_tol) {
    std::vector<std::pair<int, int>> clusters;
    const int n = static_cast<int>(eigenvalues.size());
    int start = 0;
    for (int i = 1; i <= n; ++i) {
        bool split = (i == n);
        if (!split) {
            double gap = std::abs(eigenvalues[i] - eigenvalues[i - 1]);
            double mag = std::max({std::abs(eigenvalues[i]), std::abs(eigenvalues[i - 1]), 1e-300});
            split = gap_tol <= 0.0 ? (gap > 0.0) : (gap / mag >= gap_tol);
        }
        if (split) {
            clusters.emplace_back(start, i);
            start = i;
        }
    }
    if (n == 0) clusters.clear();
    return clusters;
}

double check_selfadjointness(const CochainComplex& cc, const EigenResult& result) {
    SpMat skew = cc.curl_skew();
    double defect = 0;
    const auto& V = result.eigenvectors;
    Eigen::MatrixXcd SV = skew.cast<std::complex<double>>() * V;
    for (int i = 0; i < V.cols(); ++i)
        for (int j = 0; j < V.cols(); ++j)
            defect = std::max(defect, std::abs(std::complex<double>(V.col(i).adjoint() * SV.col(j))));
    return defect;
}

namespace {

inline double scalar_real(double v) { return v; }
inline double scalar_real(const std::complex<double>& v) { return v.real(); }

template <class Scalar>
void run_solve(const ConstraintHandle& handle, int k, double shift, const SolverOptions& opts,
               const Eigen::SparseMatrix<Scalar>& B, EigenResult& result) {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    const CochainComplex& cc = *handle.cc;
    SpMat K = SpMat(cc.d1.transpose()) * cc.M2 * cc.d1;
    SpMat Csym = cc.curl_sym();
    const SpMat& M = cc.M1;
    const int n = static_cast<int>(K.rows());

    const double sigma_nu = shift * shift;
    const int space_dim = std::max(1, n - static_cast<int>(B.rows()));
    int k_nu = std::min(2 * k + 6, space_dim);

    struct Signed {
        double lambda;
        double nu_resid;
        bool trusted;  // sign resolution passed the consistency checks
        Vec vec;
    };
    std::vector<Signed> pool;
    int iterations = 0;
    double shift_used = shift;

    for (int round = 0; round < 3; ++round) {
        pool.clear();
        auto eig = constrained_eigs<Scalar>(K, M, B, sigma_nu, k_nu, opts.tol, opts.max_dim,
                                            opts.seed, opts.shift_retries);
        iterations = eig.iterations;
        shift_used = shift;

        const Eigen::VectorXd& nu_res = eig.residuals;

        // Group the nu values into physical clusters.  The tolerance is loose:
        // discretization splits one continuum |lambda|^2 into nearby nu values
        // (mirror-parity components carry different O(h) errors) and the
        // C_sym sign resolution below needs the complete group.
        std::vector<std::pair<int, int>> nu_groups;
        {
            double nscale = std::max(1e-300, eig.values.cwiseAbs().maxCoeff());
            int start = 0;
            for (int i = 1; i <= eig.values.size(); ++i) {
                bool split = (i == static_cast<int>(eig.values.size())) ||
                             (eig.values[i] - eig.values[i - 1] >
                              std::max(0.15 * std::abs(eig.values[i - 1]), 1e-8 * nscale));
                if (split) {
                    nu_groups.emplace_back(start, i);
                    start = i;
                }
            }
        }
        // The converged set covers a window around sigma_nu; pairs assembled
        // too close to its far boundary may lack their sign partner and are
        // excluded below.
        double nu_max_conv = eig.values.size() ? eig.values.maxCoeff() : 0.0;
        bool whole_space = eig.values.size() >= space_dim;

        // Signs come from Rayleigh-Ritz of C_sym over each group (first-order
        // accurate but sign-robust); magnitudes from a nested Rayleigh-Ritz
        // of the squared-curl form within each sign subspace, which keeps the
        // quadratic accuracy of the nu-pencil.  A pair is accepted only if
        // the two routes are commensurate, |s| within a factor of sqrt(nu):
        // badly mixed vectors from a window-cut group fail this test.
        for (auto [a, b] : nu_groups) {
            const int mc = b - a;
            Mat Vc = eig.vectors.middleCols(a, mc);
            Mat Ac = Vc.adjoint() * (Csym.template cast<Scalar>() * Vc);
            Ac = Scalar(0.5) * (Ac + Ac.adjoint()).eval();
            Eigen::SelfAdjointEigenSolver<Mat> es(Ac);
            double group_res = nu_res.segment(a, mc).maxCoeff();
            double lam_scale = std::sqrt(std::max(std::abs(eig.values[b - 1]), 0.0));
            for (int sign_pass = 0; sign_pass < 2; ++sign_pass) {
                std::vector<int> idx;
                for (int i = 0; i < mc; ++i) {
                    double s = es.eigenvalues()[i];
                    if (sign_pass == 0 && s >= 0) idx.push_back(i);
                    if (sign_pass == 1 && s < 0) idx.push_back(i);
                }
                if (idx.empty()) continue;
                Mat Vs(Vc.rows(), idx.size());
                Eigen::VectorXd svals(idx.size());
                for (size_t q = 0; q < idx.size(); ++q) {
                    Vs.col(q) = Vc * es.eigenvectors().col(idx[q]);
                    svals[q] = es.eigenvalues()[idx[q]];
                }
                Mat Ks = Vs.adjoint() * (K.template cast<Scalar>() * Vs);
                Ks = Scalar(0.5) * (Ks + Ks.adjoint()).eval();
                Eigen::SelfAdjointEigenSolver<Mat> esk(Ks);
                for (int q = 0; q < esk.eigenvalues().size(); ++q) {
                    double nu_ref = std::max(0.0, esk.eigenvalues()[q]);
                    double mag = std::sqrt(nu_ref);
                    bool kernel_like = mag <= 1e-8 * std::max(lam_scale, 1.0);
                    if (!kernel_like) {
                        // consistency of the two eigenvalue routes: honest
                        // pairs have |s| within a factor of sqrt(nu) (they
                        // agree up to O(h)); mixtures from a window-cut group
                        // or a sign-unresolvable coarse space fail
                        Vec x = Vs * esk.eigenvectors().col(q);
                        double s_val = scalar_real(
                            Scalar(x.adjoint() * (Csym.template cast<Scalar>() * x)));
                        double ratio = std::abs(s_val) / mag;
                        bool trusted = ratio >= 0.15 && ratio <= 6.0;
                        // window safety margin: partner may be unconverged
                        if (!whole_space && nu_ref > 0.98 * nu_max_conv) trusted = false;
                        Signed s;
                        s.lambda = (sign_pass == 0 ? mag : -mag);
                        s.trusted = trusted;
                        s.vec = std::move(x);
                        s.nu_resid = group_res;
                        pool.push_back(std::move(s));
                    } else {
                        Signed s;
                        s.lambda = 0.0;
                        s.trusted = true;
                        s.vec = Vs * esk.eigenvectors().col(q);
                        s.nu_resid = group_res;
                        pool.push_back(std::move(s));
                    }
                }
            }
        }
        int trusted_count = 0;
        for (const auto& s : pool) trusted_count += s.trusted ? 1 : 0;
        if (trusted_count >= k) break;
        if (k_nu >= space_dim) break;
        k_nu = std::min(2 * k_nu, space_dim);  // widen the window and retry
    }
    if (static_cast<int>(pool.size()) < std::min(k, space_dim))
        throw NoConvergenceError("solve_spectrum: could not assemble enough signed pairs",
                                 iterations);
    k = std::min(k, static_cast<int>(pool.size()));

    // keep the k pairs nearest the requested shift, preferring pairs whose
    // sign resolution is trusted (untrusted ones only fill a shortfall, which
    // happens on very coarse meshes that cannot separate the signed pair)
    std::sort(pool.begin(), pool.end(), [&](const Signed& x, const Signed& y) {
        if (x.trusted != y.trusted) return x.trusted;
        return std::abs(x.lambda - shift) < std::abs(y.lambda - shift);
    });
    pool.resize(k);
    std::sort(pool.begin(), pool.end(),
              [](const Signed& x, const Signed& y) { return x.lambda < y.lambda; });

    // kernel threshold from the coarse pass: 1e-6 x first nonzero |lambda|
    double lscale = 0;
    for (const auto& s : pool) lscale = std::max(lscale, std::abs(s.lambda));
    double first_nonzero = 0;
    for (const auto& s : pool) {
        double a = std::abs(s.lambda);
        if (a > 1e-7 * std::max(lscale, 1e-300) && (first_nonzero == 0 || a < first_nonzero))
            first_nonzero = a;
    }
    result.kernel_threshold =
        1e-6 * (first_nonzero > 0 ? first_nonzero : std::max(std::abs(shift), 1e-6));
    result.iterations = iterations;
    result.shift = shift_used;

    std::vector<int> genuine, harmonic;
    for (size_t i = 0; i < pool.size(); ++i) {
        if (std::abs(pool[i].lambda) < result.kernel_threshold) harmonic.push_back(i);
        else genuine.push_back(i);
    }
    result.eigenvalues.resize(genuine.size());
    result.eigenvectors.resize(n, genuine.size());
    result.residual_norms.resize(genuine.size());
    for (size_t i = 0; i < genuine.size(); ++i) {
        const Signed& s = pool[genuine[i]];
        result.eigenvalues[i] = s.lambda;
        result.eigenvectors.col(i) = s.vec.template cast<std::complex<double>>();
        result.residual_norms[i] = s.nu_resid;
    }
    result.harmonic_eigenvalues.resize(harmonic.size());
    Eigen::MatrixXcd hvec(n, harmonic.size());
    for (size_t i = 0; i < harmonic.size(); ++i) {
        result.harmonic_eigenvalues[i] = pool[harmonic[i]].lambda;
        hvec.col(i) = pool[harmonic[i]].vec.template cast<std::complex<double>>();
    }
    result.harmonic_basis = hvec;
    result.vectors_real = std::is_same_v<Scalar, double>;

    // first-order consistency defect diagnostic in a diagonally scaled norm
    // (converges at the discretization rate; not a solver tolerance)
    {
        Eigen::VectorXd dinv(n);
        for (int i = 0; i < n; ++i) dinv[i] = 1.0 / std::sqrt(M.coeff(i, i));
        result.csym_residuals.resize(result.eigenvalues.size());
        for (int i = 0; i < result.eigenvalues.size(); ++i) {
            Vec v(n);
            if constexpr (std::is_same_v<Scalar, double>)
                v = result.eigenvectors.col(i).real();
            else
                v = result.eigenvectors.col(i);
            Vec r = Csym.template cast<Scalar>() * v -
                    Scalar(result.eigenvalues[i]) * (M.template cast<Scalar>() * v);
            double acc = 0;
            for (int q = 0; q < n; ++q) acc += std::norm(std::complex<double>(r[q])) * dinv[q] * dinv[q];
            result.csym_residuals[i] = std::sqrt(acc) / std::max(1.0, std::abs(result.eigenvalues[i]));
        }
    }
}

}  // namespace

EigenResult solve_spectrum(const ConstraintHandle& handle, int k, double shift,
                           const SolverOptions& opts) {
    EigenResult result;
    result.gap_tol_used = opts.gap_tol;
    if (handle.is_real) {
        SpMat B = handle.stacked_real();
        run_solve<double>(handle, k, shift, opts, B, result);
    } else {
        auto B = handle.stacked_complex();
        run_solve<std::complex<double>>(handle, k, shift, opts, B, result);
    }

    // constraint violations per returned eigenvector: div, closure, period, flux
    const CochainComplex& cc = *handle.cc;
    const int kk = static_cast<int>(result.eigenvalues.size());
    result.constraint_violations.resize(4, kk);
    SpMat div_all = SpMat(cc.d0.transpose()) * cc.M1;
    for (int i = 0; i < kk; ++i) {
        Eigen::VectorXcd v = result.eigenvectors.col(i);
        result.constraint_violations(0, i) = (div_all.cast<std::complex<double>>() * v).norm();
        result.constraint_violations(1, i) =
            (handle.closure_rows.cast<std::complex<double>>() * v).norm();
        result.constraint_violations(2, i) = (handle.period_rows * v).norm();
        result.constraint_violations(3, i) =
            (handle.flux_rows.cast<std::complex<double>>() * v).norm();
    }

    result.clusters = cluster_multiplicity(result.eigenvalues, opts.gap_tol);

    if (opts.include_harmonic_basis && handle.basis.total_genus > 0) {
        Eigen::MatrixXd H = harmonic_fields(cc, handle.basis, opts);
        result.harmonic_basis = H.cast<std::complex<double>>();
    }
    return result;
}

}  // namespace curlspec
