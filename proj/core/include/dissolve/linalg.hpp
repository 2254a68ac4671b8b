#pragma once

#include "dissolve/types.hpp"

namespace dissolve {

struct EighResult {
  Vector eigenvalues;          // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, matching order
};

// Eigendecomposition of a symmetric matrix. Throws non_symmetric if the
// input deviates from its transpose by more than 1e-12 relative,
// no_convergence if the iteration fails.
EighResult sym_eigh(const Eigen::MatrixXd& s);

// Minimal-norm least-squares solution of M y = b for symmetric positive
// semidefinite M. Uses Cholesky when M is numerically definite and falls
// back to an eigendecomposition that discards eigenvalues below
// rtol * lambda_max.
Vector pinv_solve(const Eigen::MatrixXd& m, const Vector& b,
                  double rtol = 1e-12);

// Thomas algorithm for a tridiagonal system with constant structure:
// diag holds the main diagonal, off the sub/super diagonal (symmetric).
// Throws singular_pivot when elimination hits a vanishing pivot.
Vector tridiag_solve(const Vector& diag, const Vector& off, const Vector& b);

}  // namespace dissolve
