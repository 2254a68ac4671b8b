#pragma once

#include <functional>

#include "dissolve/types.hpp"

namespace dissolve {

using ScalarField = std::function<double(const Vector&)>;
using VectorField = std::function<Vector(const Vector&)>;

// Central-difference gradient of a scalar field. Each coordinate uses the
// step rel_step * (1 + |x_i|).
Vector fd_gradient(const ScalarField& fn, const Vector& x,
                   double rel_step = 1e-5);

// Central-difference directional derivative (Jacobian-vector product) of a
// vector field along v. When step <= 0 the step is chosen as
// sqrt(eps) * (1 + |x|) / |v|.
Vector fd_jvp(const VectorField& map, const Vector& x, const Vector& v,
              double step = 0.0);

}  // namespace dissolve
