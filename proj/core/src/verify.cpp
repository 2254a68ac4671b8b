#include "dissolve/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <utility>

#include "dissolve/finite_diff.hpp"

namespace dissolve {

namespace {

volatile double g_timing_sink = 0.0;

// Probe scales of the quadratic-decrease check.
const double kQuadSteps[] = {1e-2, 1e-3, 1e-4};

// Draws a unit direction whose normal velocity is not tiny: when d is
// nearly tangent, |c(x+td)| is dominated by its t^2 term over part of the
// probe range and the fixed t^2 normalization of the band test would
// compare different regimes. Resampling keeps the probes in the regime the
// quadratic bound describes. Constraint-free manifolds never satisfy the
// resampling condition; the caller's roundoff guard covers them.
Vector normal_leaning_direction(const Manifold& m, const Point& x, Rng& rng) {
  const double t_probe = kQuadSteps[0];
  Vector d = rng.gaussian_vector(x.size());
  for (int attempt = 0; attempt < 50; ++attempt) {
    const double norm = d.norm();
    if (norm > 1e-12) {
      d /= norm;
      if (m.feasibility(x.with_data(x.data + t_probe * d)) >= 0.1 * t_probe)
        return d;
    }
    d = rng.gaussian_vector(x.size());
  }
  return d / d.norm();  // flat or degenerate constraint: give up resampling
}

double relative_gap(double a, double b) {
  return std::abs(a - b) / (1.0 + std::max(std::abs(a), std::abs(b)));
}

}  // namespace

AxiomReport check_axioms(const Manifold& m, int n_samples, Rng& rng,
                         const AxiomTols& tols) {
  if (n_samples < 1)
    fail(ErrorCode::config_error, "check_axioms needs at least one sample");
  AxiomReport report;
  report.manifold = m.describe();
  report.samples = n_samples;
  report.tols = tols;
  report.quadratic_pass = true;

  const Shape shape = m.shape();
  const VectorField a_flat = [&m, shape](const Vector& v) {
    return m.cd_map(Point(v, shape)).data;
  };

  double exponent_sum = 0.0;
  int exponent_count = 0;

  for (int s = 0; s < n_samples; ++s) {
    const Point x = m.init_point(rng);
    const double x_scale = 1.0 + x.data.norm();

    // (i) A fixes feasible points.
    const double fp =
        (m.cd_map(x).data - x.data).norm() / x_scale;
    report.fixed_point_error = std::max(report.fixed_point_error, fp);

    // (ii) One application of A shrinks the violation quadratically.
    const Vector d = normal_leaning_direction(m, x, rng);
    double ratios[3];
    double worst = 0.0;
    for (int i = 0; i < 3; ++i) {
      const double t = kQuadSteps[i];
      const Point probe = x.with_data(x.data + t * d);
      const double viol = m.feasibility(m.cd_map(probe));
      ratios[i] = viol / (t * t);
      worst = std::max(worst, viol);
    }
    if (worst > 1e-12) {  // below that everything is roundoff: trivially ok
      const double hi = *std::max_element(ratios, ratios + 3);
      const double lo = *std::min_element(ratios, ratios + 3);
      const double band = lo > 0.0 ? hi / lo
                                   : std::numeric_limits<double>::infinity();
      report.band_ratio = std::max(report.band_ratio, band);
      if (band > tols.band_ratio) report.quadratic_pass = false;
      // Informational slope of log viol against log t (expect about 2).
      if (ratios[0] > 0.0 && ratios[2] > 0.0) {
        const double num = std::log(ratios[0] * kQuadSteps[0] * kQuadSteps[0]) -
                           std::log(ratios[2] * kQuadSteps[2] * kQuadSteps[2]);
        const double den =
            std::log(kQuadSteps[0]) - std::log(kQuadSteps[2]);
        exponent_sum += num / den;
        ++exponent_count;
      }
    }

    // (iii) The adjoint is idempotent at feasible points.
    Vector w = rng.gaussian_vector(x.size());
    if (w.norm() > 0.0) w /= w.norm();
    const Vector jw = m.cd_map_adjoint(x, w);
    const double idem = (m.cd_map_adjoint(x, jw) - jw).norm();
    report.idempotency_error = std::max(report.idempotency_error, idem);

    // (iv) Adjoint-JVP duality, at the sample and slightly off it.
    for (int off = 0; off < 2; ++off) {
      Point at = x;
      if (off == 1) {
        Vector shift = rng.gaussian_vector(x.size());
        if (shift.norm() > 0.0) shift *= 0.05 / shift.norm();
        at = x.with_data(x.data + shift);
      }
      const Vector v = rng.gaussian_vector(x.size());
      const Vector u = rng.gaussian_vector(x.size());
      const double lhs = fd_jvp(a_flat, at.data, v).dot(u);
      const double rhs = v.dot(m.cd_map_adjoint(at, u));
      report.duality_error =
          std::max(report.duality_error, relative_gap(lhs, rhs));
    }
  }

  if (exponent_count > 0)
    report.quadratic_exponent = exponent_sum / exponent_count;
  report.fixed_point_pass = report.fixed_point_error <= tols.fixed_point;
  report.idempotency_pass = report.idempotency_error <= tols.idempotency;
  report.duality_pass = report.duality_error <= tols.duality;
  return report;
}

double check_gradients(const CdfProblem& problem, int n_samples, Rng& rng) {
  if (n_samples < 1)
    fail(ErrorCode::config_error, "check_gradients needs at least one sample");
  const Manifold& m = problem.manifold();
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const Point center = m.init_point(rng);
    const Point x = sample_uniform_ball(center, 0.01, rng);
    const Vector g = problem.gradient(x).data;
    const Vector g_fd = fd_gradient(
        [&problem](const Vector& v) { return problem.value_flat(v); },
        x.data);
    worst = std::max(worst, (g - g_fd).norm() / (1.0 + g.norm()));
  }
  return worst;
}

ExactnessReport check_exactness(const ObjectiveOracle& objective,
                                const Manifold& m, Rng& rng,
                                std::optional<double> forced_beta, int runs) {
  if (runs < 1)
    fail(ErrorCode::config_error, "check_exactness needs at least one run");
  const BetaConfig cfg;
  const Point ref = m.init_point(rng);

  ExactnessReport report;
  report.runs = runs;
  report.beta = forced_beta
                    ? *forced_beta
                    : estimate_beta(objective, m, cfg, ref, rng).beta;

  const SolverOptions opts;
  report.reports.reserve(runs);
  for (int r = 0; r < runs; ++r) {
    const Point x0 = sample_uniform_ball(ref, cfg.radius, rng);
    const CdfProblem problem(objective.fork(), m, report.beta);
    SolverReport run = lbfgs(problem, x0, opts);
    if (run.status == SolveStatus::converged) {
      ++report.converged;
      if (run.feas <= 1e-10 && run.stat <= opts.gtol)
        ++report.feasible_stationary;
    }
    report.reports.push_back(std::move(run));
  }
  report.pass = report.feasible_stationary == report.converged;
  return report;
}

std::vector<TimingRecord> compare_map_timing(
    const ManifoldFactory& predefined, const ManifoldFactory& auto_variant,
    const std::vector<Index>& dims, int reps, Rng& rng) {
  if (reps < 30)
    fail(ErrorCode::config_error,
         "timing comparison needs at least 30 repetitions");
  if (!predefined || !auto_variant)
    fail(ErrorCode::config_error, "timing comparison needs both factories");

  constexpr int kWarmup = 5;
  std::vector<TimingRecord> records;
  records.reserve(dims.size() * 4);

  for (const Index dim : dims) {
    const Manifold pre = predefined(dim);
    const Manifold aut = auto_variant(dim);
    if (!(pre.shape() == aut.shape()) ||
        pre.constraint_dim() != aut.constraint_dim())
      fail(ErrorCode::dimension_mismatch,
           "mapping variants disagree on dimensions at size " +
               std::to_string(dim));

    // Identical evaluation points and probes for every series.
    std::vector<Point> points;
    std::vector<Vector> probes;
    points.reserve(reps + kWarmup);
    probes.reserve(reps + kWarmup);
    for (int i = 0; i < reps + kWarmup; ++i) {
      const Point center = pre.init_point(rng);
      points.push_back(sample_uniform_ball(center, 0.01, rng));
      Vector w = rng.gaussian_vector(pre.ambient_dim());
      if (w.norm() > 0.0) w /= w.norm();
      probes.push_back(std::move(w));
    }

    struct Series {
      const Manifold* m;
      const char* variant;
      const char* operation;
    };
    const Series series[] = {
        {&pre, "predefined", "A"},
        {&pre, "predefined", "adjoint"},
        {&aut, "auto", "A"},
        {&aut, "auto", "adjoint"},
    };

    for (const Series& s : series) {
      double sink = 0.0;
      std::vector<double> times;
      times.reserve(reps);
      const bool adjoint = std::string(s.operation) == "adjoint";
      for (int i = 0; i < reps + kWarmup; ++i) {
        const auto start = std::chrono::steady_clock::now();
        if (adjoint)
          sink += s.m->cd_map_adjoint(points[i], probes[i]).sum();
        else
          sink += s.m->cd_map(points[i]).data.sum();
        const auto stop = std::chrono::steady_clock::now();
        if (i >= kWarmup)
          times.push_back(
              std::chrono::duration<double>(stop - start).count());
      }
      g_timing_sink = sink;

      // Median of 5 bucket means, then the plain sample deviation.
      const int buckets = 5;
      std::vector<double> means(buckets, 0.0);
      const int per = reps / buckets;
      for (int b = 0; b < buckets; ++b) {
        const int lo = b * per;
        const int hi = (b == buckets - 1) ? reps : lo + per;
        for (int i = lo; i < hi; ++i) means[b] += times[i];
        means[b] /= (hi - lo);
      }
      std::sort(means.begin(), means.end());
      const double mean = means[buckets / 2];

      double plain_mean = 0.0;
      for (double t : times) plain_mean += t;
      plain_mean /= reps;
      double var = 0.0;
      for (double t : times) var += (t - plain_mean) * (t - plain_mean);
      const double stddev = reps > 1 ? std::sqrt(var / (reps - 1)) : 0.0;

      records.push_back(TimingRecord{pre.kind(), s.variant, s.operation, dim,
                                     reps, mean, stddev});
    }
  }
  return records;
}

}  // namespace dissolve
