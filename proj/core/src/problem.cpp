#include "dissolve/problem.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "dissolve/linalg.hpp"

namespace dissolve {

namespace {

// Multipliers are only cross-checked where the explicit Jacobian is cheap.
constexpr Index kMultiplierWidthCap = 512;

void check_beta_config(const BetaConfig& cfg) {
  if (cfg.n_samples < 1)
    fail(ErrorCode::config_error, "beta estimator needs at least one sample");
  if (!(cfg.radius > 0.0))
    fail(ErrorCode::config_error, "beta estimator radius must be positive");
  if (cfg.guard < 0.0)
    fail(ErrorCode::config_error, "beta estimator guard must be >= 0");
  if (cfg.safety < 1.0)
    fail(ErrorCode::config_error, "beta estimator safety factor must be >= 1");
  if (!(cfg.beta_min > 0.0) || !(cfg.beta_max >= cfg.beta_min))
    fail(ErrorCode::config_error,
         "beta clamp needs 0 < beta_min <= beta_max");
}

}  // namespace

CdfProblem::CdfProblem(ObjectiveOracle objective, Manifold manifold,
                       double beta)
    : objective_(std::move(objective)),
      manifold_(std::move(manifold)),
      beta_(beta) {
  if (!std::isfinite(beta_) || beta_ <= 0.0)
    fail(ErrorCode::invalid_beta,
         "penalty parameter must be positive and finite, got " +
             std::to_string(beta_));
}

double CdfProblem::value(const Point& x) const {
  const double penalty = manifold_.constraint(x).squaredNorm();
  const double fval = objective_.value(manifold_.cd_map(x));
  const double h = fval + 0.5 * beta_ * penalty;
  require_finite(h, "cdf value");
  return h;
}

Point CdfProblem::gradient(const Point& x) const {
  const Point ax = manifold_.cd_map(x);
  const Vector gf = objective_.gradient(ax);
  Vector g = manifold_.cd_map_adjoint(x, gf);
  g.noalias() += beta_ * manifold_.penalty_grad(x);
  require_finite(g, "cdf gradient");
  return x.with_data(std::move(g));
}

Point CdfProblem::hvp(const Point& x, const Vector& v) const {
  if (v.size() != x.size())
    fail(ErrorCode::dimension_mismatch,
         "hvp direction has length " + std::to_string(v.size()) +
             ", expected " + std::to_string(x.size()));
  const double vnorm = v.norm();
  if (vnorm == 0.0)
    fail(ErrorCode::invalid_dims, "hvp direction must be nonzero");
  const double t = std::sqrt(std::numeric_limits<double>::epsilon()) *
                   (1.0 + x.data.norm()) / vnorm;
  const Vector forward = gradient(x.with_data(x.data + t * v)).data;
  const Vector backward = gradient(x.with_data(x.data - t * v)).data;
  return x.with_data((forward - backward) / (2.0 * t));
}

StationarityReport CdfProblem::stationarity(const Point& x) const {
  StationarityReport report;
  report.feas = manifold_.feasibility(x);
  FeasibilityResult proj = feasibility_map(manifold_, x);
  report.stat = gradient(proj.point).data.norm();
  report.projection_iterations = proj.iterations;

  const Index p = manifold_.constraint_dim();
  if (manifold_.has_constraint_jacobian() && p >= 1 &&
      p <= kMultiplierWidthCap) {
    const MatrixRM j = manifold_.constraint_jacobian(proj.point);
    const Vector gf = objective_.gradient(proj.point);
    const Vector lambda =
        pinv_solve(j.transpose() * j, j.transpose() * gf);
    report.classical_stat = (gf - j * lambda).norm();
    report.lambda = lambda;
  }
  report.projected_point = std::move(proj.point);
  return report;
}

double CdfProblem::value_flat(const Vector& x) const {
  return value(Point(x, shape()));
}

Vector CdfProblem::gradient_flat(const Vector& x) const {
  return gradient(Point(x, shape())).data;
}

CdfProblem CdfProblem::fork() const {
  return CdfProblem(objective_.fork(), manifold_, beta_);
}

BetaEstimate estimate_beta(const ObjectiveOracle& objective,
                           const Manifold& manifold, const BetaConfig& cfg,
                           std::optional<Point> reference, Rng& rng) {
  check_beta_config(cfg);

  // Tuning is a pure function of (oracles, cfg, rng); keep the caller's
  // evaluation counters out of it.
  const ObjectiveOracle f = objective.fork();

  Point ref = reference ? std::move(*reference) : manifold.init_point(rng);
  if (!(ref.shape == manifold.shape()))
    fail(ErrorCode::dimension_mismatch,
         "beta reference point does not match the manifold shape");
  const double ref_feas = manifold.feasibility(ref);
  if (ref_feas > 1e-6 * (1.0 + ref.data.norm()))
    fail(ErrorCode::infeasible_init,
         "beta reference point is infeasible (|c| = " +
             std::to_string(ref_feas) + ")");

  double max_decrease = 0.0;
  double max_adjoint = 0.0;
  for (int i = 0; i < cfg.n_samples; ++i) {
    const Point xi = sample_uniform_ball(ref, cfg.radius, rng);
    const double c_sq = manifold.constraint(xi).squaredNorm();
    const Point axi = manifold.cd_map(xi);
    const double ca_sq = manifold.constraint(axi).squaredNorm();
    const Point aaxi = manifold.cd_map(axi);

    const double f_a = f.value(axi);
    const double f_aa = f.value(aaxi);
    const double decrease =
        2.0 * (f_aa - f_a) / (std::abs(c_sq - ca_sq) + cfg.guard);

    const Vector grad_a = f.gradient(axi);
    const Vector pulled = manifold.cd_map_adjoint(xi, grad_a);
    const Vector step = axi.data - xi.data;
    const double adjoint_ratio =
        step.dot(pulled) /
        (std::abs(step.dot(manifold.penalty_grad(xi))) + cfg.guard);

    max_decrease = std::max(max_decrease, decrease);
    max_adjoint = std::max(max_adjoint, adjoint_ratio);
  }

  BetaEstimate est;
  est.max_decrease_ratio = max_decrease;
  est.max_adjoint_ratio = max_adjoint;
  est.raw = cfg.safety * std::max({max_decrease, max_adjoint, 0.0});
  est.beta = std::clamp(est.raw, cfg.beta_min, cfg.beta_max);
  require_finite(est.beta, "beta estimate");
  est.reference = std::move(ref);
  return est;
}

CdfProblem with_beta(ObjectiveOracle objective, Manifold manifold,
                     const BetaSpec& spec, const BetaConfig& cfg, Rng& rng) {
  if (spec.is_auto) {
    const BetaEstimate est =
        estimate_beta(objective, manifold, cfg, std::nullopt, rng);
    return CdfProblem(std::move(objective), std::move(manifold), est.beta);
  }
  if (!std::isfinite(spec.value) || spec.value <= 0.0)
    fail(ErrorCode::invalid_beta,
         "explicit penalty parameter must be positive and finite");
  return CdfProblem(std::move(objective), std::move(manifold), spec.value);
}

}  // namespace dissolve
