#include "dissolve/finite_diff.hpp"

#include <cmath>
#include <limits>

namespace dissolve {

Vector fd_gradient(const ScalarField& fn, const Vector& x, double rel_step) {
  if (!(rel_step > 0.0))
    fail(ErrorCode::invalid_dims, "fd_gradient step must be positive");
  Vector g(x.size());
  Vector probe = x;
  for (Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * (1.0 + std::abs(x[i]));
    const double xi = x[i];
    probe[i] = xi + h;
    const double fp = fn(probe);
    probe[i] = xi - h;
    const double fm = fn(probe);
    probe[i] = xi;
    require_finite(fp, "fd_gradient probe");
    require_finite(fm, "fd_gradient probe");
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

Vector fd_jvp(const VectorField& map, const Vector& x, const Vector& v,
              double step) {
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Vector::Zero(map(x).size());
  double t = step;
  if (!(t > 0.0)) {
    const double eps = std::numeric_limits<double>::epsilon();
    t = std::sqrt(eps) * (1.0 + x.norm()) / vnorm;
  }
  const Vector fp = map(x + t * v);
  const Vector fm = map(x - t * v);
  require_finite(fp, "fd_jvp probe");
  require_finite(fm, "fd_jvp probe");
  return (fp - fm) / (2.0 * t);
}

}  // namespace dissolve
