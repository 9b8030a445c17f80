#ifndef EDGEPERTURB_LINALG_HPP
#define EDGEPERTURB_LINALG_HPP

#include "edgeperturb/errors.hpp"
#include "edgeperturb/types.hpp"

namespace ep::linalg {

struct TopKSvd {
    Vector sigma;  // descending, size k
    Matrix U;      // N x k, columns orthonormal
    Matrix V;      // N x k, columns orthonormal
    int iterations = 0;
};

struct SvdConvergenceError : NumericalError {
    SvdConvergenceError(const std::string& msg, TopKSvd last_iterate)
        : NumericalError(msg), last(std::move(last_iterate)) {}
    TopKSvd last;
};

/// Leading k singular triplets of a square matrix by block power iteration
/// on MᵀM with QR re-orthonormalization and a Rayleigh-Ritz rotation each
/// sweep. The start block is seeded internally so results are reproducible.
/// Converged when no σ estimate moves by more than tol relatively.
TopKSvd top_k_singular(const Matrix& m, int k, double tol = 1e-10, int max_iters = 3000);
TopKSvd top_k_singular(const SparseMatrix& m, int k, double tol = 1e-10, int max_iters = 3000);

} // namespace ep::linalg

#endif
