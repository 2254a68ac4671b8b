#include "dissolve/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>
#include <vector>

namespace dissolve {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kCurvatureSkip = 1e-12;   // lbfgs pair admission
constexpr double kRestartSlope = 1e-12;    // cg descent threshold
constexpr double kRadiusCollapse = 1e-14;  // tr giving-up radius
constexpr double kBoundaryFrac = 0.99;     // tr "step hit the boundary"
constexpr double kMaxTrialStep = 1e12;

void validate(const SolverOptions& opts, bool needs_line_search) {
  if (!(opts.gtol > 0.0))
    fail(ErrorCode::config_error, "gtol must be positive");
  if (opts.max_iter < 0)
    fail(ErrorCode::config_error, "max_iter must be >= 0");
  if (opts.lbfgs_memory < 1)
    fail(ErrorCode::config_error, "lbfgs memory must be >= 1");
  if (needs_line_search) {
    const double c2 = opts.wolfe_c2.value_or(0.5);
    if (!(opts.wolfe_c1 > 0.0 && opts.wolfe_c1 < c2 && c2 < 1.0))
      fail(ErrorCode::config_error, "need 0 < wolfe_c1 < wolfe_c2 < 1");
    if (opts.ls_max_trials < 1)
      fail(ErrorCode::config_error, "line search needs at least one trial");
  }
  if (!(opts.tr_init_radius > 0.0) ||
      !(opts.tr_max_radius >= opts.tr_init_radius))
    fail(ErrorCode::config_error,
         "need 0 < tr_init_radius <= tr_max_radius");
  if (!(opts.tr_accept_eta > 0.0 && opts.tr_accept_eta < 1.0))
    fail(ErrorCode::config_error, "tr_accept_eta must lie in (0, 1)");
}

// ----------------------------------------------------------------------
// Strong-Wolfe line search (bracketing plus zoom with cubic interpolation).
// The solver core sees the problem only through these two callables.

struct Flat {
  const CdfProblem* problem;
  double operator()(const Vector& x) const { return problem->value_flat(x); }
  Vector grad(const Vector& x) const { return problem->gradient_flat(x); }
};

struct Trial {
  double alpha{0.0};
  double f{kInf};
  double df{0.0};  // slope along the search direction; valid when usable
  Vector g;
  bool usable{false};  // value and gradient both finite
};

struct LineSearchResult {
  bool ok{false};  // accepted a strictly decreasing step
  double alpha{0.0};
  double f{0.0};
  Vector g;
  int trials{0};
};

class LineSearch {
 public:
  LineSearch(const Flat& flat, const Vector& x, const Vector& d, double f0,
             double slope0, double c1, double c2, int budget,
             double initial = 1.0)
      : flat_(flat),
        x_(x),
        d_(d),
        f0_(f0),
        slope0_(slope0),
        c1_(c1),
        c2_(c2),
        budget_(budget),
        initial_(initial) {}

  LineSearchResult run() {
    LineSearchResult out;
    if (slope0_ >= 0.0) return out;  // not a descent direction

    Trial prev;
    prev.alpha = 0.0;
    prev.f = f0_;
    prev.df = slope0_;
    prev.usable = true;

    double alpha = initial_;
    bool first = true;
    while (trials_ < budget_) {
      Trial t = eval(alpha);
      if (!t.usable || t.f > f0_ + c1_ * t.alpha * slope0_ ||
          (!first && t.f >= prev.f)) {
        zoom(prev, t);
        break;
      }
      if (std::abs(t.df) <= -c2_ * slope0_) {
        accept(t);
        break;
      }
      if (t.df >= 0.0) {
        zoom(t, prev);
        break;
      }
      prev = t;
      alpha = std::min(2.0 * alpha, kMaxTrialStep);
      first = false;
    }

    if (accepted_) {
      out.ok = true;
      out.alpha = accepted_->alpha;
      out.f = accepted_->f;
      out.g = std::move(accepted_->g);
      out.trials = trials_;
      return out;
    }
    // Budget exhausted without the curvature condition: fall back to the
    // best strictly decreasing trial so the outer loop keeps h monotone.
    if (best_) {
      out.ok = true;
      out.alpha = best_->alpha;
      out.f = best_->f;
      out.g = std::move(best_->g);
    }
    out.trials = trials_;
    return out;
  }

 private:
  Trial eval(double alpha) {
    ++trials_;
    Trial t;
    t.alpha = alpha;
    try {
      const Vector xt = x_ + alpha * d_;
      t.f = flat_(xt);
      t.g = flat_.grad(xt);
      t.df = t.g.dot(d_);
      t.usable = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_finite_evaluation) throw;
      t.f = kInf;
      t.usable = false;
    }
    if (t.usable && t.f < f0_ && (!best_ || t.f < best_->f)) best_ = t;
    return t;
  }

  void accept(Trial t) { accepted_ = std::move(t); }

  // lo always satisfies the sufficient-decrease condition and has the
  // lowest value seen; hi brackets it.
  void zoom(Trial lo, Trial hi) {
    // Bracket widths of this round and of two rounds back. Interpolation
    // must shrink the bracket by a third every two rounds or the next
    // trial is forced to the midpoint.
    double width = std::abs(hi.alpha - lo.alpha);
    double width_old = 2.0 * width;
    while (trials_ < budget_) {
      const double lo_end = std::min(lo.alpha, hi.alpha);
      const double hi_end = std::max(lo.alpha, hi.alpha);
      const double span = hi_end - lo_end;
      if (span < 1e-16 * (1.0 + lo_end)) break;

      double alpha;
      if (span > 0.66 * width_old) {
        alpha = 0.5 * (lo_end + hi_end);
      } else {
        alpha = interpolate(lo, hi);
        // Keep trials strictly interior. The guard by hi is wide since
        // hugging the rejected end stalls the search; the guard by lo is
        // thin because a catastrophically bad hi legitimately pulls the
        // minimizer next to lo, and the width rule above stops that from
        // degenerating into no progress.
        const double near_lo = 1e-3 * span;
        const double near_hi = 0.1 * span;
        const double lower =
            lo.alpha < hi.alpha ? lo.alpha + near_lo : hi.alpha + near_hi;
        const double upper =
            lo.alpha < hi.alpha ? hi.alpha - near_hi : lo.alpha - near_lo;
        if (!std::isfinite(alpha))
          alpha = 0.5 * (lo_end + hi_end);
        else
          alpha = std::clamp(alpha, lower, upper);
      }
      width_old = width;
      width = span;

      Trial t = eval(alpha);
      if (!t.usable || t.f > f0_ + c1_ * t.alpha * slope0_ || t.f >= lo.f) {
        hi = std::move(t);
        continue;
      }
      if (std::abs(t.df) <= -c2_ * slope0_) {
        accept(std::move(t));
        return;
      }
      if (t.df * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = std::move(t);
    }
  }

  // Cubic minimizer from values and slopes at both ends, with fallbacks
  // for degenerate endpoints. When hi sits orders of magnitude above lo
  // the cubic is dominated by hi and says nothing about the valley floor
  // near lo; the quadratic through lo's value, lo's slope and hi's value
  // lands essentially at lo, which is the right move, so the closer of
  // the two estimates to lo wins.
  double interpolate(const Trial& lo, const Trial& hi) const {
    if (!hi.usable) {
      // Only lo carries derivative information: quadratic through
      // (lo.f, lo.df) and the fact that hi blew up -> bisect toward lo.
      return lo.alpha + 0.25 * (hi.alpha - lo.alpha);
    }
    const double d1 = lo.df + hi.df -
                      3.0 * (lo.f - hi.f) / (lo.alpha - hi.alpha);
    const double radicand = d1 * d1 - lo.df * hi.df;
    double cubic = std::numeric_limits<double>::quiet_NaN();
    if (radicand >= 0.0) {
      const double sign = hi.alpha >= lo.alpha ? 1.0 : -1.0;
      const double d2 = sign * std::sqrt(radicand);
      const double denom = hi.df - lo.df + 2.0 * d2;
      if (denom != 0.0)
        cubic = hi.alpha -
                (hi.alpha - lo.alpha) * (hi.df + d2 - d1) / denom;
    }
    if (hi.f > lo.f) {
      const double span = hi.alpha - lo.alpha;
      const double denom = hi.f - lo.f - lo.df * span;
      if (denom > 0.0) {
        const double quad = lo.alpha - 0.5 * lo.df * span * span / denom;
        if (!std::isfinite(cubic) ||
            std::abs(quad - lo.alpha) < std::abs(cubic - lo.alpha))
          return quad;
      }
    }
    return cubic;
  }

  const Flat& flat_;
  const Vector& x_;
  const Vector& d_;
  double f0_, slope0_, c1_, c2_;
  int budget_;
  double initial_;
  int trials_{0};
  std::optional<Trial> accepted_;
  std::optional<Trial> best_;
};

// ----------------------------------------------------------------------
// Report assembly. The returned iterate is the feasibility projection of
// the last point the solver visited, and fval, stat and feas are all
// measured there (the raw point is kept if projection fails). Evaluation
// counts are the deltas over the whole call, including these diagnostics,
// so a report taken on a fresh problem equals the oracle's counters
// exactly.

struct Diagnostics {
  Point point;
  double fval{0.0};
  double stat{0.0};
  double feas{0.0};
};

Diagnostics diagnose(const CdfProblem& p, const Point& x) {
  Diagnostics d;
  d.point = x;
  try {
    d.point = feasibility_map(p.manifold(), x).point;
  } catch (const Error&) {
    // Projection can fail from a bad final iterate; report the raw point.
  }
  d.feas = p.manifold().feasibility(d.point);
  d.fval = p.objective().value(d.point);
  d.stat = p.gradient(d.point).data.norm();
  return d;
}

class ReportBuilder {
 public:
  explicit ReportBuilder(const CdfProblem& p)
      : problem_(p),
        f0_(p.objective().value_evals()),
        g0_(p.objective().gradient_evals()),
        start_(std::chrono::steady_clock::now()) {}

  SolverReport finish(const Point& x, int iter, SolveStatus status,
                      std::optional<Diagnostics> diag = std::nullopt) {
    SolverReport r;
    Diagnostics d = diag ? std::move(*diag) : diagnose(problem_, x);
    r.fval = d.fval;
    r.stat = d.stat;
    r.feas = d.feas;
    r.x_final = std::move(d.point);
    r.iter = iter;
    r.status = status;
    r.eval_f = problem_.objective().value_evals() - f0_;
    r.eval_grad = problem_.objective().gradient_evals() - g0_;
    r.time_s = std::chrono::duration<double>(
                   std::chrono::steady_clock::now() - start_)
                   .count();
    return r;
  }

 private:
  const CdfProblem& problem_;
  std::int64_t f0_, g0_;
  std::chrono::steady_clock::time_point start_;
};

// Convergence is declared on the projected iterate, so a Converged status
// certifies the reported stat, not merely the raw gradient norm.
bool converged(const CdfProblem& p, const Point& x, double gnorm,
               double gtol, std::optional<Diagnostics>& diag_out) {
  if (gnorm > gtol) return false;
  Diagnostics d = diagnose(p, x);
  if (d.stat > gtol) return false;
  diag_out = d;
  return true;
}

}  // namespace

const char* to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged:
      return "Converged";
    case SolveStatus::max_iter:
      return "MaxIter";
    case SolveStatus::line_search_failure:
      return "LineSearchFailure";
    case SolveStatus::trust_region_collapse:
      return "TrustRegionCollapse";
  }
  return "Unknown";
}

SolverReport lbfgs(const CdfProblem& problem, const Point& x0,
                   const SolverOptions& opts) {
  validate(opts, true);
  require_finite(x0.data, "lbfgs start point");
  const double c2 = opts.wolfe_c2.value_or(0.9);
  ReportBuilder builder(problem);
  const Flat flat{&problem};
  const Shape shape = problem.shape();

  Vector x = x0.data;
  double f = flat(x);
  Vector g = flat.grad(x);

  std::deque<std::pair<Vector, Vector>> pairs;  // (s, y), newest in back
  std::vector<double> alpha_buf;

  for (int iter = 0;; ++iter) {
    std::optional<Diagnostics> diag;
    if (converged(problem, Point(x, shape), g.norm(), opts.gtol, diag))
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::converged, diag);
    if (iter >= opts.max_iter)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::max_iter);

    // Two-loop recursion for d = -H g.
    Vector q = g;
    alpha_buf.assign(pairs.size(), 0.0);
    for (std::size_t i = pairs.size(); i-- > 0;) {
      const auto& [s, y] = pairs[i];
      const double rho = 1.0 / y.dot(s);
      alpha_buf[i] = rho * s.dot(q);
      q.noalias() -= alpha_buf[i] * y;
    }
    if (!pairs.empty()) {
      const auto& [s, y] = pairs.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < pairs.size(); ++i) {
      const auto& [s, y] = pairs[i];
      const double rho = 1.0 / y.dot(s);
      const double beta = rho * y.dot(q);
      q.noalias() += (alpha_buf[i] - beta) * s;
    }
    Vector d = -q;
    double slope = d.dot(g);
    if (slope >= 0.0) {  // numerical breakdown: fall back to steepest descent
      d = -g;
      slope = -g.squaredNorm();
    }

    LineSearchResult ls = LineSearch(flat, x, d, f, slope, opts.wolfe_c1, c2,
                                     opts.ls_max_trials)
                              .run();
    if (!ls.ok)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::line_search_failure);

    Vector x_new = x + ls.alpha * d;
    Vector s = x_new - x;
    Vector y = ls.g - g;
    const double sy = s.dot(y);
    if (sy > kCurvatureSkip * s.norm() * y.norm()) {
      pairs.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(pairs.size()) > opts.lbfgs_memory)
        pairs.pop_front();
    }
    x = std::move(x_new);
    f = ls.f;
    g = std::move(ls.g);
  }
}

SolverReport nonlinear_cg(const CdfProblem& problem, const Point& x0,
                          const SolverOptions& opts) {
  validate(opts, true);
  require_finite(x0.data, "cg start point");
  const double c2 = opts.wolfe_c2.value_or(0.1);
  ReportBuilder builder(problem);
  const Flat flat{&problem};
  const Shape shape = problem.shape();
  const Index n = shape.size();

  Vector x = x0.data;
  double f = flat(x);
  Vector g = flat.grad(x);
  Vector d = -g;
  Index since_restart = 0;
  double prev_alpha = 0.0;  // accepted step and slope of the previous
  double prev_slope = 0.0;  // iteration, for scaling the first trial

  for (int iter = 0;; ++iter) {
    std::optional<Diagnostics> diag;
    if (converged(problem, Point(x, shape), g.norm(), opts.gtol, diag))
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::converged, diag);
    if (iter >= opts.max_iter)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::max_iter);

    double slope = d.dot(g);
    if (slope >= -kRestartSlope * d.norm() * g.norm() || since_restart >= n) {
      d = -g;
      slope = -g.squaredNorm();
      since_restart = 0;
    }

    // Unlike quasi-Newton steps, cg directions carry no natural unit
    // scale, so seed the search with the step that matches the previous
    // iteration's first-order decrease.
    const auto first_trial = [&](double s) {
      if (prev_alpha <= 0.0 || s >= 0.0) return 1.0;
      const double a = prev_alpha * prev_slope / s;
      return std::isfinite(a) ? std::clamp(a, 1e-12, kMaxTrialStep) : 1.0;
    };

    LineSearchResult ls = LineSearch(flat, x, d, f, slope, opts.wolfe_c1, c2,
                                     opts.ls_max_trials, first_trial(slope))
                              .run();
    if (!ls.ok && since_restart > 0) {
      // The momentum direction defeated the search; drop the history and
      // retry once from steepest descent before giving up.
      d = -g;
      slope = -g.squaredNorm();
      since_restart = 0;
      ls = LineSearch(flat, x, d, f, slope, opts.wolfe_c1, c2,
                      opts.ls_max_trials, first_trial(slope))
               .run();
    }
    if (!ls.ok)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::line_search_failure);

    x += ls.alpha * d;
    f = ls.f;
    prev_alpha = ls.alpha;
    prev_slope = slope;
    // Polak-Ribiere+ coefficient, clipped at zero.
    const double beta =
        std::max(0.0, ls.g.dot(ls.g - g) / g.squaredNorm());
    d = -ls.g + beta * d;
    g = std::move(ls.g);
    ++since_restart;
  }
}

namespace {

struct SteihaugResult {
  Vector step;
  double predicted{0.0};  // model decrease -m(step), m(0) = 0
};

// Truncated CG on the quadratic model within |z| <= radius. Negative
// curvature and boundary crossings follow the direction to the boundary.
SteihaugResult steihaug(const CdfProblem& p, const Point& x, const Vector& g,
                        double radius) {
  const Index n = g.size();
  const double gnorm = g.norm();
  const double tol = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  const Index max_cg = std::min<Index>(n, 500);

  Vector z = Vector::Zero(n);
  Vector r = g;
  Vector d = -g;
  double r_sq = r.squaredNorm();

  auto model_decrease = [&](const Vector& step, const Vector& b_step) {
    return -(g.dot(step) + 0.5 * step.dot(b_step));
  };
  auto to_boundary = [&](const Vector& base, const Vector& dir) {
    const double dd = dir.squaredNorm();
    const double bd = base.dot(dir);
    const double bb = base.squaredNorm();
    const double tau =
        (-bd + std::sqrt(bd * bd + dd * (radius * radius - bb))) / dd;
    return Vector(base + tau * dir);
  };

  Vector b_accum = Vector::Zero(n);  // B z, maintained incrementally
  for (Index j = 0; j < max_cg; ++j) {
    Vector bd;
    try {
      bd = p.hvp(x, d).data;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_finite_evaluation) throw;
      break;  // keep the interior progress made so far
    }
    const double curvature = d.dot(bd);
    if (curvature <= 0.0) {
      Vector step = to_boundary(z, d);
      // One extra product to price the boundary step in the model.
      Vector b_step = b_accum;
      const double tau = d.squaredNorm() > 0.0
                             ? (step - z).dot(d) / d.squaredNorm()
                             : 0.0;
      b_step.noalias() += tau * bd;
      SteihaugResult out{std::move(step), 0.0};
      out.predicted = model_decrease(out.step, b_step);
      return out;
    }
    const double alpha = r_sq / curvature;
    Vector z_next = z + alpha * d;
    if (z_next.norm() >= radius) {
      Vector step = to_boundary(z, d);
      Vector b_step = b_accum;
      const double tau = (step - z).dot(d) / d.squaredNorm();
      b_step.noalias() += tau * bd;
      SteihaugResult out{std::move(step), 0.0};
      out.predicted = model_decrease(out.step, b_step);
      return out;
    }
    z = std::move(z_next);
    b_accum.noalias() += alpha * bd;
    r.noalias() += alpha * bd;
    const double r_sq_next = r.squaredNorm();
    if (std::sqrt(r_sq_next) <= tol) break;
    d = -r + (r_sq_next / r_sq) * d;
    r_sq = r_sq_next;
  }
  SteihaugResult out{z, 0.0};
  out.predicted = model_decrease(z, b_accum);
  return out;
}

}  // namespace

SolverReport trust_region(const CdfProblem& problem, const Point& x0,
                          const SolverOptions& opts) {
  validate(opts, false);
  require_finite(x0.data, "trust region start point");
  ReportBuilder builder(problem);
  const Flat flat{&problem};
  const Shape shape = problem.shape();

  Vector x = x0.data;
  double f = flat(x);
  Vector g = flat.grad(x);
  double radius = opts.tr_init_radius;

  for (int iter = 0;; ++iter) {
    std::optional<Diagnostics> diag;
    if (converged(problem, Point(x, shape), g.norm(), opts.gtol, diag))
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::converged, diag);
    if (iter >= opts.max_iter)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::max_iter);
    if (radius < kRadiusCollapse)
      return builder.finish(Point(std::move(x), shape), iter,
                            SolveStatus::trust_region_collapse);

    SteihaugResult sub = steihaug(problem, Point(x, shape), g, radius);
    if (!(sub.predicted > 0.0)) {
      radius *= 0.25;  // model gave nothing to work with
      continue;
    }

    double f_trial = kInf;
    try {
      f_trial = flat(x + sub.step);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::non_finite_evaluation) throw;
    }
    const double rho = (f - f_trial) / sub.predicted;
    const double step_norm = sub.step.norm();

    if (rho < 0.25) {
      radius *= 0.25;
    } else if (rho > 0.75 && step_norm >= kBoundaryFrac * radius) {
      radius = std::min(2.0 * radius, opts.tr_max_radius);
    }
    if (rho > opts.tr_accept_eta) {
      x += sub.step;
      f = f_trial;
      g = flat.grad(x);
    }
  }
}

SolverReport solve(const std::string& solver, const CdfProblem& problem,
                   const Point& x0, const SolverOptions& opts) {
  if (solver == "lbfgs") return lbfgs(problem, x0, opts);
  if (solver == "cg") return nonlinear_cg(problem, x0, opts);
  if (solver == "tr") return trust_region(problem, x0, opts);
  fail(ErrorCode::config_error,
       "unknown solver '" + solver + "' (expected lbfgs, cg, or tr)");
}

}  // namespace dissolve
