#pragma once

#include <functional>

#include "dissolve/finite_diff.hpp"
#include "dissolve/manifold.hpp"

namespace dissolve {

// Tuning knobs for the generated mapping
//   A_c(x) = x - J_c(x) (J_c(x)^T J_c(x) + sigma |c(x)|^2 I_p)^+ c(x).
//
// sigma keeps the p x p system definite away from the constraint set while
// the regularizer vanishes on it; 1.0 is this library's default. fd_step
// is the relative step used when the Jacobian is assembled by finite
// differences, pinv_rtol the eigenvalue cutoff of the pseudo-inverse
// solve.
struct AutoManifoldConfig {
  double sigma = 1.0;
  double fd_step = 1e-5;
  double pinv_rtol = 1e-12;
};

// n x p transposed Jacobian of the residual (column q holds the gradient of
// residual entry q), evaluated at a flat ambient vector.
using ConstraintJacobianFn = std::function<MatrixRM(const Vector&)>;

// Builds a manifold from a residual oracle alone. Derivatives of c are
// assembled by central differences, so this route is meant for moderate
// ambient dimensions. `p` is the residual length and must be >= 1.
Manifold make_auto_manifold(VectorField c_oracle, Shape shape, Index p,
                            AutoManifoldConfig config = {});

// Same mapping, but with a user-supplied Jacobian oracle replacing the
// finite-difference assembly. This is the variant to use when c comes with
// cheap analytic (or autodiff) derivatives.
Manifold make_auto_manifold(VectorField c_oracle, ConstraintJacobianFn jac,
                            Shape shape, Index p,
                            AutoManifoldConfig config = {});

}  // namespace dissolve
