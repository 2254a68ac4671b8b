#pragma once

#include <memory>
#include <optional>
#include <string>

#include "dissolve/rng.hpp"
#include "dissolve/types.hpp"

namespace dissolve {

// Implementation interface for a constraint set M = {x : c(x) = 0} together
// with its dissolving map A. cd_map_adjoint applies the transposed Jacobian
// of A, i.e. the adjoint of the directional-derivative map v -> DA(x)[v].
class ManifoldBase {
 public:
  virtual ~ManifoldBase() = default;

  virtual std::string kind() const = 0;
  virtual Shape shape() const = 0;
  virtual Index constraint_dim() const = 0;
  Index ambient_dim() const { return shape().size(); }
  virtual std::string describe() const;

  virtual Vector constraint(const Point& x) const = 0;
  // J_c(x) c(x), the gradient of 0.5 |c(x)|^2.
  virtual Vector penalty_grad(const Point& x) const = 0;
  virtual Point cd_map(const Point& x) const = 0;
  virtual Vector cd_map_adjoint(const Point& x, const Vector& w) const = 0;
  virtual Point init_point(Rng& rng) const = 0;

  // Closed-form n x p constraint Jacobian (column i is the gradient of the
  // i-th residual entry). Not every manifold provides one.
  virtual bool has_constraint_jacobian() const { return false; }
  virtual MatrixRM constraint_jacobian(const Point& x) const;
};

// Value-semantic handle. All calls validate dimensions before dispatching.
class Manifold {
 public:
  explicit Manifold(std::shared_ptr<const ManifoldBase> impl)
      : impl_(std::move(impl)) {}

  std::string kind() const { return impl_->kind(); }
  std::string describe() const { return impl_->describe(); }
  Shape shape() const { return impl_->shape(); }
  Index ambient_dim() const { return impl_->ambient_dim(); }
  Index constraint_dim() const { return impl_->constraint_dim(); }

  Vector constraint(const Point& x) const;
  Vector penalty_grad(const Point& x) const;
  Point cd_map(const Point& x) const;
  Vector cd_map_adjoint(const Point& x, const Vector& w) const;
  Point init_point(Rng& rng) const;

  bool has_constraint_jacobian() const {
    return impl_->has_constraint_jacobian();
  }
  MatrixRM constraint_jacobian(const Point& x) const;

  double feasibility(const Point& x) const { return constraint(x).norm(); }

  const ManifoldBase& base() const { return *impl_; }
  std::shared_ptr<const ManifoldBase> shared() const { return impl_; }

 private:
  void check_point(const Point& x) const;
  std::shared_ptr<const ManifoldBase> impl_;
};

struct FeasibilityResult {
  Point point;
  double feas{0.0};
  int iterations{0};
};

struct FeasibilityOptions {
  double tol = 1e-13;
  int max_iter = 100;
  int divergence_window = 3;
};

// Iterates x <- A(x) until |c(x)| <= tol * (1 + |c(x0)|). Throws `diverged`
// after `divergence_window` consecutive increases of the feasibility norm
// and `max_iter_exceeded` when the budget runs out.
FeasibilityResult feasibility_map(const Manifold& m, const Point& x,
                                  const FeasibilityOptions& opts = {});

}  // namespace dissolve
