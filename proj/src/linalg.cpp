#include "edgeperturb/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <random>

namespace ep::linalg {
namespace {

template <class MatrixT>
TopKSvd top_k_impl(const MatrixT& m, int k, double tol, int max_iters) {
    const Eigen::Index n = m.rows();
    if (m.cols() != n) throw ValidationError("top_k_singular expects a square matrix");
    if (k < 1 || k > n) throw ValidationError("k must be in [1, N]");
    if (tol <= 0.0) throw ValidationError("tol must be positive");

    // oversampling sharpens the convergence rate for the wanted k values
    const Eigen::Index p = std::min<Eigen::Index>(n, k + 8);

    std::mt19937_64 rng(0x5eedbeef);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix v(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) v(i, j) = gauss(rng);
    v = Eigen::HouseholderQR<Matrix>(v).householderQ() * Matrix::Identity(n, p);

    auto finalize = [&](const Matrix& basis, const Vector& sigma_all, int iters) {
        TopKSvd out;
        out.sigma = sigma_all.head(k);
        out.V = basis.leftCols(k);
        out.U = Matrix::Zero(n, k);
        Matrix mv = m * out.V;
        for (int i = 0; i < k; ++i) {
            double s = out.sigma(i);
            if (s > 1e-300) out.U.col(i) = mv.col(i) / s;
        }
        out.iterations = iters;
        return out;
    };

    Vector sigma = Vector::Zero(p);
    for (int iter = 1; iter <= max_iters; ++iter) {
        Matrix z = m * v;
        // Rayleigh-Ritz on the current subspace: eigenpairs of VᵀMᵀMV
        Matrix b = z.transpose() * z;
        Eigen::SelfAdjointEigenSolver<Matrix> es(b);
        if (es.info() != Eigen::Success)
            throw SvdConvergenceError("Rayleigh-Ritz eigensolve failed",
                                      finalize(v, sigma, iter));
        // eigenvalues ascend; flip to descending singular order
        Matrix rot = es.eigenvectors().rowwise().reverse();
        Vector sigma_next =
            es.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
        v = v * rot;
        z = z * rot;

        // movement measured against σ₁: tiny trailing values sit at the
        // absolute accuracy floor of the Gram matrix anyway
        double scale = std::max(sigma_next(0), 1e-300);
        double worst = 0.0;
        for (int i = 0; i < k; ++i)
            worst = std::max(worst, std::abs(sigma_next(i) - sigma(i)) / scale);
        sigma = sigma_next;
        if (worst < tol) return finalize(v, sigma, iter);

        // power step + re-orthonormalization for the next sweep
        Matrix w = m.transpose() * z;
        v = Eigen::HouseholderQR<Matrix>(w).householderQ() * Matrix::Identity(n, p);
    }
    throw SvdConvergenceError("singular values still moving after " +
                                  std::to_string(max_iters) + " iterations",
                              finalize(v, sigma, max_iters));
}

} // namespace

TopKSvd top_k_singular(const Matrix& m, int k, double tol, int max_iters) {
    return top_k_impl(m, k, tol, max_iters);
}

TopKSvd top_k_singular(const SparseMatrix& m, int k, double tol, int max_iters) {
    return top_k_impl(m, k, tol, max_iters);
}

} // namespace ep::linalg
