#pragma once

#include "dissolve/manifold.hpp"

namespace dissolve {

// Flat Euclidean space; the constraint is vacuous and A is the identity.
Manifold make_euclidean(Index rows, Index cols = 1);

// Unit sphere {x in R^n : x^T x = 1} with A(x) = 2x / (1 + |x|^2).
Manifold make_sphere(Index n);

// Rows of unit norm, diag(X X^T) = I. A rescales each row like the sphere.
Manifold make_oblique(Index rows, Index cols);

// Orthonormal columns, X^T X = I, with A(X) = X(1.5 I - 0.5 X^T X).
Manifold make_stiefel(Index rows, Index cols);

// Same constraint set and mapping as Stiefel under a different name;
// objectives on it are expected (not enforced) to be rotation invariant.
Manifold make_grassmann(Index rows, Index cols);

// X^T B X = I for symmetric positive definite B.
Manifold make_generalized_stiefel(Index rows, Index cols, Eigen::MatrixXd b);

// X^T B X = I for symmetric indefinite B (indefiniteness is the caller's
// claim; only symmetry is validated). B needs at least `cols` positive
// eigenvalues for feasible points to exist.
Manifold make_hyperbolic(Index rows, Index cols, Eigen::MatrixXd b);

// X^T Q_m X = Q_s with the canonical skew forms Q_k = [[0, I], [-I, 0]].
// rows = 2m and cols = 2s must both be even.
Manifold make_symplectic_stiefel(Index rows, Index cols);

// Orthonormal columns whose range contains the unit vector e:
// X^T X = I and X X^T e = e.
Manifold make_stiefel_range(Index rows, Index cols, Vector e);

// String-keyed construction used by the CLI and the test harness. Kinds:
// euclidean, sphere, oblique, stiefel, grassmann, generalized_stiefel
// (random SPD B from param_rng), hyperbolic (B = diag(+1/-1) split),
// symplectic_stiefel, stiefel_range (random unit e), product (sphere x
// Stiefel demo block), auto (Stiefel constraint through the auto mapping).
Manifold make_named_manifold(const std::string& kind, Index rows, Index cols,
                             Rng& param_rng);

}  // namespace dissolve
