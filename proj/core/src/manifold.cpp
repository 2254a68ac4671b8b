#include "dissolve/manifold.hpp"

namespace dissolve {

std::string ManifoldBase::describe() const {
  const Shape s = shape();
  return kind() + "(" + std::to_string(s.rows) + "x" + std::to_string(s.cols) +
         ")";
}

MatrixRM ManifoldBase::constraint_jacobian(const Point&) const {
  fail(ErrorCode::invalid_dims,
       describe() + " does not expose a constraint Jacobian");
}

void Manifold::check_point(const Point& x) const {
  if (x.shape != impl_->shape())
    fail(ErrorCode::dimension_mismatch,
         "point shaped " + std::to_string(x.rows()) + "x" +
             std::to_string(x.cols()) + " passed to " + impl_->describe());
}

Vector Manifold::constraint(const Point& x) const {
  check_point(x);
  return impl_->constraint(x);
}

Vector Manifold::penalty_grad(const Point& x) const {
  check_point(x);
  return impl_->penalty_grad(x);
}

Point Manifold::cd_map(const Point& x) const {
  check_point(x);
  return impl_->cd_map(x);
}

Vector Manifold::cd_map_adjoint(const Point& x, const Vector& w) const {
  check_point(x);
  if (w.size() != impl_->ambient_dim())
    fail(ErrorCode::dimension_mismatch,
         "adjoint probe length " + std::to_string(w.size()) +
             " does not match ambient dimension " +
             std::to_string(impl_->ambient_dim()));
  return impl_->cd_map_adjoint(x, w);
}

Point Manifold::init_point(Rng& rng) const { return impl_->init_point(rng); }

MatrixRM Manifold::constraint_jacobian(const Point& x) const {
  check_point(x);
  return impl_->constraint_jacobian(x);
}

FeasibilityResult feasibility_map(const Manifold& m, const Point& x,
                                  const FeasibilityOptions& opts) {
  Point cur = x;
  double feas = m.feasibility(cur);
  const double target = opts.tol * (1.0 + feas);
  // Nothing beats roundoff; below this floor the iteration has converged.
  const double floor = 1e-14 * (1.0 + cur.data.norm());
  if (feas <= target) return {std::move(cur), feas, 0};

  int rises = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    cur = m.cd_map(cur);
    const double next = m.feasibility(cur);
    if (next <= target || next <= floor) return {std::move(cur), next, it};
    rises = (next > feas) ? rises + 1 : 0;
    if (rises >= opts.divergence_window)
      fail(ErrorCode::diverged,
           m.describe() + " feasibility rose for " + std::to_string(rises) +
               " consecutive dissolving steps (now " + std::to_string(next) +
               ")");
    feas = next;
  }
  fail(ErrorCode::max_iter_exceeded,
       m.describe() + " feasibility " + std::to_string(feas) +
           " did not reach " + std::to_string(target) + " in " +
           std::to_string(opts.max_iter) + " dissolving steps");
}

}  // namespace dissolve
