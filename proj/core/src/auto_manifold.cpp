#include "dissolve/auto_manifold.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "dissolve/linalg.hpp"

namespace dissolve {

namespace {

// The mapping A_c(x) = x - J(x) u(x) with u = (J^T J + sigma |c|^2 I)^+ c
// satisfies A_c(x) = x and J_{A_c}(x) J_c(x) = 0 on the constraint set for
// any sigma >= 0, which is all the solver layer relies on.
//
// The adjoint below is the exact transposed Jacobian of that expression.
// Writing J = J_c(x), S = J^T J + sigma |c|^2 I, u = S^+ c, q = J^T w,
// y = S^+ q, and (DJ[d])z for the directional derivative of x -> J(x) z
// along d, differentiating A_c and collecting adjoints term by term gives
//
//   J_{A_c}(x) w = w - (DJ[w])u - J y
//                  + (DJ[J u])y + (DJ[J y])u + 2 sigma <u, y> J c.
//
// The swap of direction and argument between the forward and adjoint forms
// of the (DJ[.]). terms is legitimate because each residual entry has a
// symmetric Hessian. On the constraint set u vanishes and the expression
// collapses to w - J y, the projector onto the complement of range(J).
class AutoManifold final : public ManifoldBase,
                           public std::enable_shared_from_this<AutoManifold> {
 public:
  AutoManifold(VectorField c, ConstraintJacobianFn jac, Shape shape, Index p,
               AutoManifoldConfig cfg)
      : c_(std::move(c)),
        jac_(std::move(jac)),
        shape_(shape),
        p_(p),
        cfg_(cfg) {
    if (!c_) fail(ErrorCode::config_error, "auto manifold needs a residual oracle");
    if (p_ < 1)
      fail(ErrorCode::invalid_dims, "auto manifold needs at least one residual entry");
    if (shape_.rows < 1 || shape_.cols < 1)
      fail(ErrorCode::invalid_dims, "auto manifold needs a nonempty shape");
    if (cfg_.sigma < 0.0)
      fail(ErrorCode::config_error, "auto manifold regularizer must be >= 0");
  }

  std::string kind() const override { return "auto"; }
  Shape shape() const override { return shape_; }
  Index constraint_dim() const override { return p_; }

  Vector constraint(const Point& x) const override { return residual(x.data); }

  Vector penalty_grad(const Point& x) const override {
    if (jac_) return jacobian(x.data) * residual(x.data);
    const VectorField c = c_;
    return fd_gradient(
        [&c](const Vector& y) { return 0.5 * c(y).squaredNorm(); }, x.data,
        cfg_.fd_step);
  }

  Point cd_map(const Point& x) const override {
    const Vector c = residual(x.data);
    const double feas = c.norm();
    if (feas <= fixed_point_floor(x.data)) return x;
    const MatrixRM j = jacobian(x.data);
    const Vector u = pinv_solve(gram(j, feas), c, cfg_.pinv_rtol);
    Point out = x.with_data(x.data - j * u);
    require_finite(out.data, "auto cd_map");
    return out;
  }

  Vector cd_map_adjoint(const Point& x, const Vector& w) const override {
    const Vector c = residual(x.data);
    const double feas = c.norm();
    const MatrixRM j = jacobian(x.data);
    const Eigen::MatrixXd s = gram(j, feas);
    const Vector q = j.transpose() * w;
    const Vector y = pinv_solve(s, q, cfg_.pinv_rtol);
    Vector out = w - j * y;
    if (feas > fixed_point_floor(x.data)) {
      const Vector u = pinv_solve(s, c, cfg_.pinv_rtol);
      out -= dj_product(x.data, w, u);
      out += dj_product(x.data, j * u, y);
      out += dj_product(x.data, j * y, u);
      out += (2.0 * cfg_.sigma * u.dot(y)) * (j * c);
    }
    require_finite(out, "auto cd_map_adjoint");
    return out;
  }

  Point init_point(Rng& rng) const override {
    const double scale =
        1.0 / std::sqrt(static_cast<double>(shape_.rows));
    const Manifold self(shared_from_this());
    FeasibilityOptions opts;
    opts.tol = 1e-15;  // drive to the roundoff floor
    for (int attempt = 0; attempt < 5; ++attempt) {
      Point x0(scale * rng.gaussian_vector(shape_.size()), shape_);
      try {
        FeasibilityResult res = feasibility_map(self, x0, opts);
        if (res.feas <= 1e-10) return std::move(res.point);
      } catch (const Error&) {
        // fall through to the next attempt
      }
    }
    fail(ErrorCode::infeasible_init,
         "auto manifold: no random start reached the constraint set");
  }

  bool has_constraint_jacobian() const override {
    return static_cast<bool>(jac_);
  }

  MatrixRM constraint_jacobian(const Point& x) const override {
    if (!jac_) return ManifoldBase::constraint_jacobian(x);
    return jacobian(x.data);
  }

 private:
  Vector residual(const Vector& x) const {
    Vector c = c_(x);
    if (c.size() != p_)
      fail(ErrorCode::dimension_mismatch,
           "auto manifold residual returned length " +
               std::to_string(c.size()) + ", expected " + std::to_string(p_));
    require_finite(c, "auto manifold residual");
    return c;
  }

  // n x p transposed Jacobian, analytic when available, otherwise one
  // central difference of c per ambient coordinate.
  MatrixRM jacobian(const Vector& x) const {
    if (jac_) {
      MatrixRM j = jac_(x);
      if (j.rows() != x.size() || j.cols() != p_)
        fail(ErrorCode::dimension_mismatch,
             "auto manifold Jacobian oracle returned wrong dimensions");
      return j;
    }
    const Index n = x.size();
    MatrixRM j(n, p_);
    Vector probe = x;
    for (Index k = 0; k < n; ++k) {
      const double h = cfg_.fd_step * (1.0 + std::abs(x[k]));
      probe[k] = x[k] + h;
      const Vector fwd = residual(probe);
      probe[k] = x[k] - h;
      const Vector bwd = residual(probe);
      probe[k] = x[k];
      j.row(k) = ((fwd - bwd) / (2.0 * h)).transpose();
    }
    return j;
  }

  Eigen::MatrixXd gram(const MatrixRM& j, double feas) const {
    Eigen::MatrixXd s = j.transpose() * j;
    s.diagonal().array() += cfg_.sigma * feas * feas;
    return s;
  }

  // (DJ[d]) z by a central difference of x -> J(x) z along d.
  Vector dj_product(const Vector& x, const Vector& d, const Vector& z) const {
    const double dnorm = d.norm();
    if (dnorm == 0.0) return Vector::Zero(x.size());
    const double t = std::sqrt(std::numeric_limits<double>::epsilon()) *
                     (1.0 + x.norm()) / dnorm;
    return (jacobian(x + t * d) * z - jacobian(x - t * d) * z) / (2.0 * t);
  }

  static double fixed_point_floor(const Vector& x) {
    return 1e-14 * (1.0 + x.norm());
  }

  VectorField c_;
  ConstraintJacobianFn jac_;
  Shape shape_;
  Index p_;
  AutoManifoldConfig cfg_;
};

}  // namespace

Manifold make_auto_manifold(VectorField c_oracle, Shape shape, Index p,
                            AutoManifoldConfig config) {
  return Manifold(std::make_shared<AutoManifold>(
      std::move(c_oracle), ConstraintJacobianFn{}, shape, p, config));
}

Manifold make_auto_manifold(VectorField c_oracle, ConstraintJacobianFn jac,
                            Shape shape, Index p, AutoManifoldConfig config) {
  if (!jac)
    fail(ErrorCode::config_error,
         "auto manifold: Jacobian overload called without a Jacobian");
  return Manifold(std::make_shared<AutoManifold>(std::move(c_oracle),
                                                 std::move(jac), shape, p,
                                                 config));
}

}  // namespace dissolve
