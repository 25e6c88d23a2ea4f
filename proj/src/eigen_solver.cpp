#include "curlspec/eigen_solver.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

namespace curlspec {

namespace {

inline double conj_scalar(double v) { return v; }
inline std::complex<double> conj_scalar(const std::complex<double>& v) { return std::conj(v); }

template <class Scalar>
double real_part(Scalar v);
template <>
double real_part<double>(double v) { return v; }
template <>
double real_part<std::complex<double>>(std::complex<double> v) { return v.real(); }

template <class Scalar>
Eigen::SparseMatrix<Scalar> augmented_matrix(const Eigen::SparseMatrix<double>& A,
                                             const Eigen::SparseMatrix<double>& M, double sigma,
                                             const Eigen::SparseMatrix<Scalar>& B) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.rows());
    std::vector<Eigen::Triplet<Scalar>> trips;
    trips.reserve(A.nonZeros() + M.nonZeros() + 2 * B.nonZeros());
    for (int c = 0; c < A.outerSize(); ++c)
        for (Eigen::SparseMatrix<double>::InnerIterator it(A, c); it; ++it)
            trips.emplace_back(static_cast<int>(it.row()), c, Scalar(it.value()));
    if (sigma != 0.0)
        for (int c = 0; c < M.outerSize(); ++c)
            for (Eigen::SparseMatrix<double>::InnerIterator it(M, c); it; ++it)
                trips.emplace_back(static_cast<int>(it.row()), c, Scalar(-sigma * it.value()));
    for (int c = 0; c < B.outerSize(); ++c)
        for (typename Eigen::SparseMatrix<Scalar>::InnerIterator it(B, c); it; ++it) {
            trips.emplace_back(n + static_cast<int>(it.row()), c, it.value());
            trips.emplace_back(c, n + static_cast<int>(it.row()), conj_scalar(it.value()));
        }
    Eigen::SparseMatrix<Scalar> S(n + m, n + m);
    S.setFromTriplets(trips.begin(), trips.end());
    return S;
}

}  // namespace

// Block Krylov Rayleigh-Ritz with the M-inner product on the shift-inverted
// constrained operator.  A block start and full reorthogonalization make
// exactly degenerate eigenvalues (mesh symmetries produce multiplicity up to
// four in the squared-curl pencil) reliable.
template <class Scalar>
ConstrainedEigs<Scalar> constrained_eigs(const Eigen::SparseMatrix<double>& A,
                                         const Eigen::SparseMatrix<double>& M,
                                         const Eigen::SparseMatrix<Scalar>& B, double shift,
                                         int k, double tol, int max_dim,
                                         unsigned long long seed, int retries) {
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.rows());
    const int nk = std::max(1, n - m);  // dimension of the constraint space
    if (k <= 0) throw Error("constrained_eigs: k must be positive");
    k = std::min(k, nk);
    const int block = std::min(nk, std::max(4, std::min(6, k)));
    if (max_dim <= 0) max_dim = std::max(5 * k + 10 * block, 120);
    max_dim = std::min(max_dim, nk);

    Eigen::SparseLU<Eigen::SparseMatrix<Scalar>> lu;
    double sigma = shift;
    int attempts = 0;
    while (true) {
        Eigen::SparseMatrix<Scalar> S = augmented_matrix(A, M, sigma, B);
        lu.compute(S);
        if (lu.info() == Eigen::Success) break;
        if (++attempts > retries) {
            std::ostringstream os;
            os << "constrained_eigs: factorization failed after " << attempts
               << " shift retries near " << shift;
            throw FactorizationFailureError(os.str());
        }
        sigma = sigma == 0.0 ? 1e-3 : sigma * (1.0 + 0.01 * attempts);
    }

    auto apply_op = [&](const Mat& X) -> Mat {
        Mat rhs = Mat::Zero(n + m, X.cols());
        rhs.topRows(n) = M * X;
        Mat sol = lu.solve(rhs);
        return sol.topRows(n);
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    auto random_block = [&](int cols) {
        Mat R(n, cols);
        for (int j = 0; j < cols; ++j)
            for (int i = 0; i < n; ++i) R(i, j) = Scalar(gauss(rng));
        return R;
    };

    Mat V(n, 0);    // M-orthonormal Krylov basis
    Mat OPV(n, 0);  // Op applied to the corresponding columns of V
    auto m_norm = [&](const Vec& w) {
        return std::sqrt(std::max(0.0, real_part<Scalar>(Scalar(w.adjoint() * (M * w)))));
    };
    // append W after reorthogonalization, dropping numerically dependent
    // columns by a relative tolerance; returns number of accepted columns
    auto append_block = [&](Mat W) {
        int accepted = 0;
        for (int j = 0; j < W.cols(); ++j) {
            Vec w = W.col(j);
            double n0 = m_norm(w);
            if (!(n0 > 0)) continue;
            for (int pass = 0; pass < 2; ++pass)
                if (V.cols() > 0) w -= V * (V.adjoint() * (M * w)).eval();
            double n1 = m_norm(w);
            if (n1 < 1e-7 * n0) continue;  // dependent direction
            V.conservativeResize(Eigen::NoChange, V.cols() + 1);
            V.col(V.cols() - 1) = w / Scalar(n1);
            ++accepted;
        }
        return accepted;
    };

    append_block(apply_op(random_block(block)));
    if (V.cols() == 0) throw Error("constrained_eigs: degenerate start block");

    Eigen::VectorXd theta;
    Mat ritz_coeff;
    Mat H(0, 0);  // V^H M (Op V), maintained incrementally
    int converged = 0;
    int iterations = 0;

    while (true) {
        // extend OPV (and the projected operator) to cover all of V
        if (OPV.cols() < V.cols()) {
            const int c0 = static_cast<int>(OPV.cols());
            const int d_now = static_cast<int>(V.cols());
            Mat dV = V.rightCols(d_now - c0);
            Mat fresh = apply_op(dV);
            Mat nOPV(n, d_now);
            if (c0 > 0) nOPV.leftCols(c0) = OPV;
            nOPV.rightCols(fresh.cols()) = fresh;
            OPV = std::move(nOPV);
            Mat Hn(d_now, d_now);
            if (c0 > 0) Hn.topLeftCorner(c0, c0) = H;
            Hn.block(0, c0, d_now, d_now - c0) = V.adjoint() * (M * OPV.rightCols(d_now - c0));
            if (c0 > 0)
                Hn.block(c0, 0, d_now - c0, c0) = dV.adjoint() * (M * OPV.leftCols(c0));
            H = std::move(Hn);
            iterations = d_now;
        }
        // Rayleigh-Ritz for the M-self-adjoint operator
        Mat Hs = Scalar(0.5) * (H + H.adjoint()).eval();
        Eigen::SelfAdjointEigenSolver<Mat> es(Hs);
        const int d = static_cast<int>(V.cols());
        theta = es.eigenvalues().real();
        ritz_coeff = es.eigenvectors();

        std::vector<int> order(d);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](int x, int y) { return std::abs(theta[x]) > std::abs(theta[y]); });
        double tscale = std::abs(theta[order[0]]);
        // converged count over a slightly larger front so one stubborn pair
        // (typically a degenerate partner straddling the request width) does
        // not stall the whole iteration
        converged = 0;
        for (int r = 0; r < std::min(d, k + 2); ++r) {
            int i = order[r];
            Vec x = V * ritz_coeff.col(i);
            Vec rv = OPV * ritz_coeff.col(i) - Scalar(theta[i]) * x;
            double rn = std::sqrt(std::max(0.0, real_part<Scalar>(Scalar(rv.adjoint() * (M * rv)))));
            if (rn <= tol * std::max(std::abs(theta[i]), 1e-3 * tscale)) ++converged;
        }
        if (converged >= k) break;
        if (d >= max_dim || d >= nk) break;
        int got = append_block(apply_op(V.rightCols(std::min<int>(block, d))));
        if (got == 0) {
            // Krylov space saturated; replenish inside ker(B) via the operator
            got = append_block(apply_op(random_block(block)));
            if (got == 0) {
                // the constraint space is exhausted: the Ritz data is exact
                converged = std::min<int>(k, static_cast<int>(V.cols()));
                break;
            }
        }
    }

    const int d = static_cast<int>(V.cols());
    if (converged == 0 && d < nk) {
        std::ostringstream os;
        os << "constrained_eigs: no pair converged with a " << d
           << "-dimensional Krylov space";
        throw NoConvergenceError(os.str(), d);
    }

    std::vector<int> order(d);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int x, int y) { return std::abs(theta[x]) > std::abs(theta[y]); });
    // Exhausting the constraint space makes the Ritz data exact; otherwise
    // keep converged pairs from a slightly larger front (callers oversample
    // and retry on shortfall).
    std::vector<int> sel;
    if (d >= nk) {
        for (int r = 0; r < std::min(k, d); ++r) sel.push_back(order[r]);
    } else {
        double tscale = std::abs(theta[order[0]]);
        for (int r = 0; r < std::min(d, k + 2) && static_cast<int>(sel.size()) < k; ++r) {
            int i = order[r];
            Vec x = V * ritz_coeff.col(i);
            Vec rv = OPV * ritz_coeff.col(i) - Scalar(theta[i]) * x;
            double rn = std::sqrt(std::max(0.0, real_part<Scalar>(Scalar(rv.adjoint() * (M * rv)))));
            if (rn <= tol * std::max(std::abs(theta[i]), 1e-3 * tscale)) sel.push_back(i);
        }
    }
    const int take = static_cast<int>(sel.size());
    if (take == 0) throw NoConvergenceError("constrained_eigs: no usable pair", d);

    ConstrainedEigs<Scalar> out;
    out.iterations = d;
    out.shift_used = sigma;
    out.values.resize(take);
    out.vectors.resize(n, take);
    out.residuals.resize(take);
    for (int r = 0; r < take; ++r) {
        int i = sel[r];
        out.values[r] = sigma + 1.0 / theta[i];
        Vec x = V * ritz_coeff.col(i);
        out.vectors.col(r) = x;
        // operator-space Ritz residual, scaled back to the pencil: from
        // Op x = theta x + e it follows (A - nu M) x = -(A - sigma M) e / theta
        Vec rv = OPV * ritz_coeff.col(i) - Scalar(theta[i]) * x;
        double rho = std::sqrt(std::max(0.0, real_part<Scalar>(Scalar(rv.adjoint() * (M * rv)))));
        out.residuals[r] = rho / std::max(std::abs(theta[i]), 1e-300);
    }
    // ascending eigenvalue order
    std::vector<int> perm(take);
    std::iota(perm.begin(), perm.end(), 0);
    std::sort(perm.begin(), perm.end(),
              [&](int x, int y) { return out.values[x] < out.values[y]; });
    Eigen::VectorXd sv(take), sres(take);
    Mat svec(n, take);
    for (int r = 0; r < take; ++r) {
        sv[r] = out.values[perm[r]];
        svec.col(r) = out.vectors.col(perm[r]);
        sres[r] = out.residuals[perm[r]];
    }
    out.values = sv;
    out.vectors = svec;
    out.residuals = sres;

    // final M-orthonormalization pass
    for (int r = 0; r < take; ++r) {
        Vec x = out.vectors.col(r);
        for (int q = 0; q < r; ++q) {
            Scalar c = out.vectors.col(q).adjoint() * (M * x);
            x -= c * out.vectors.col(q);
        }
        double nx = std::sqrt(std::max(0.0, real_part<Scalar>(Scalar(x.adjoint() * (M * x)))));
        if (!(nx > 0)) throw Error("constrained_eigs: orthonormalization breakdown");
        out.vectors.col(r) = x / Scalar(nx);
    }
    return out;
}

template ConstrainedEigs<double> constrained_eigs<double>(
    const Eigen::SparseMatrix<double>&, const Eigen::SparseMatrix<double>&,
    const Eigen::SparseMatrix<double>&, double, int, double, int, unsigned long long, int);
template ConstrainedEigs<std::complex<double>> constrained_eigs<std::complex<double>>(
    const Eigen::SparseMatrix<double>&, const Eigen::SparseMatrix<double>&,
    const Eigen::SparseMatrix<std::complex<double>>&, double, int, double, int,
    unsigned long long, int);

template <class Scalar>
ConstraintProjector<Scalar>::ConstraintProjector(const Eigen::SparseMatrix<double>& M,
                                                 const Eigen::SparseMatrix<Scalar>& B)
    : M_(M), n_(static_cast<int>(M.rows())), m_(static_cast<int>(B.rows())) {
    Eigen::SparseMatrix<Scalar> S = augmented_matrix<Scalar>(
        M, Eigen::SparseMatrix<double>(M.rows(), M.cols()), 0.0, B);
    lu_.compute(S);
    if (lu_.info() != Eigen::Success)
        throw Error("ConstraintProjector: factorization failed (constraints rank-deficient?)");
}

template <class Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ConstraintProjector<Scalar>::project(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n_ + m_);
    rhs.head(n_) = M_.cast<Scalar>() * r;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sol = lu_.solve(rhs);
    return sol.head(n_);
}

template <class Scalar>
double ConstraintProjector<Scalar>::dual_norm(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& r) const {
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> rhs =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(n_ + m_);
    rhs.head(n_) = r;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sol = lu_.solve(rhs);
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = sol.head(n_);
    double v = real_part<Scalar>(Scalar(y.adjoint() * (M_.cast<Scalar>() * y)));
    return std::sqrt(std::max(0.0, v));
}

template class ConstraintProjector<double>;
template class ConstraintProjector<std::complex<double>>;

}  // namespace curlspec
