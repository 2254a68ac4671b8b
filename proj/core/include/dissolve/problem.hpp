#pragma once

#include <optional>
#include <string>

#include "dissolve/manifold.hpp"
#include "dissolve/objective.hpp"

namespace dissolve {

// Hyperparameters of the Monte-Carlo penalty estimator: sample count,
// sampling radius around the reference point, division guard, safety
// factor, and the clamp applied to the final estimate.
struct BetaConfig {
  int n_samples = 100;
  double radius = 0.01;
  double guard = 1e-14;
  double safety = 2.0;
  double beta_min = 1e-4;
  double beta_max = 1e8;
};

// Outcome of the estimator. beta is the clamped value that callers should
// use; raw keeps the unclamped safety-scaled maximum for diagnostics,
// together with the two ratio families it maximized over.
struct BetaEstimate {
  double beta{0.0};
  double raw{0.0};
  double max_decrease_ratio{0.0};
  double max_adjoint_ratio{0.0};
  Point reference;
};

// Penalty selection: either a fixed positive value or a request to run the
// estimator.
struct BetaSpec {
  static BetaSpec automatic() { return BetaSpec{true, 0.0}; }
  static BetaSpec fixed(double value) { return BetaSpec{false, value}; }

  bool is_auto{true};
  double value{0.0};
};

// Feasibility and stationarity of an iterate. stat is the gradient norm of
// h at the projected point A^inf(x); at feasible points this coincides with
// the norm of the Riemannian gradient. When the manifold exposes a
// constraint Jacobian of modest width, the least-squares multiplier and the
// classical residual |grad f - J_c lambda| are attached as a cross-check.
struct StationarityReport {
  double stat{0.0};
  double feas{0.0};
  Point projected_point;
  int projection_iterations{0};
  std::optional<Vector> lambda;
  std::optional<double> classical_stat;
};

// The smooth unconstrained reformulation
//   h(x) = f(A(x)) + (beta/2) |c(x)|^2
// of minimizing f over {x : c(x) = 0}. Evaluation, gradient, and
// Hessian-vector products are what the solver layer consumes.
class CdfProblem {
 public:
  CdfProblem(ObjectiveOracle objective, Manifold manifold, double beta);

  double value(const Point& x) const;
  Point gradient(const Point& x) const;

  // Central difference of the analytic gradient along v; step
  // sqrt(machine eps) * (1 + |x|) / |v|. Rejects v = 0.
  Point hvp(const Point& x, const Vector& v) const;

  StationarityReport stationarity(const Point& x) const;

  // Flat-vector adapters for solvers and finite-difference oracles.
  double value_flat(const Vector& x) const;
  Vector gradient_flat(const Vector& x) const;

  const ObjectiveOracle& objective() const { return objective_; }
  const Manifold& manifold() const { return manifold_; }
  double beta() const { return beta_; }
  Shape shape() const { return manifold_.shape(); }

  // Same problem with fresh evaluation counters.
  CdfProblem fork() const;

 private:
  ObjectiveOracle objective_;
  Manifold manifold_;
  double beta_;
};

// Monte-Carlo estimate of the penalty threshold: draws
// cfg.n_samples points in the radius-cfg.radius ball around a feasible
// reference (init_point when none is given) and maximizes the two guarded
// ratios; the result is safety-scaled and clamped to
// [cfg.beta_min, cfg.beta_max]. Deterministic in the rng state; the
// objective's counters are not advanced.
BetaEstimate estimate_beta(const ObjectiveOracle& objective,
                           const Manifold& manifold, const BetaConfig& cfg,
                           std::optional<Point> reference, Rng& rng);

// Assembles a CdfProblem, running the estimator when spec.is_auto. An
// explicit beta must be positive and finite.
CdfProblem with_beta(ObjectiveOracle objective, Manifold manifold,
                     const BetaSpec& spec, const BetaConfig& cfg, Rng& rng);

}  // namespace dissolve
