#include <cmath>
#include <memory>

#include "doctest.h"

#include "dissolve/manifolds.hpp"
#include "dissolve/solvers.hpp"
#include "support.hpp"

using namespace dissolve;

namespace {

struct QuadraticSetup {
  CdfProblem problem;
  Point x0;
  Vector minimizer;
};

// Strictly convex quadratic on flat space with a known minimizer.
QuadraticSetup convex_quadratic(Index n, std::uint64_t seed) {
  Rng rng(seed);
  const MatrixRM m = rng.gaussian_matrix(n, n);
  auto q = std::make_shared<const Eigen::MatrixXd>(
      m.transpose() * m / static_cast<double>(n) +
      Eigen::MatrixXd::Identity(n, n));
  auto b = std::make_shared<const Vector>(rng.gaussian_vector(n));
  ObjectiveOracle obj(
      [q, b](const Point& x) {
        return 0.5 * x.data.dot(*q * x.data) - b->dot(x.data);
      },
      [q, b](const Point& x) { return Vector(*q * x.data - *b); });
  CdfProblem p(std::move(obj), make_euclidean(n), 1.0);
  return {std::move(p), Point::from_vector(rng.gaussian_vector(n)),
          q->ldlt().solve(*b)};
}

CdfProblem sphere_rayleigh() {
  Vector d(3);
  d << 1.0, 2.0, 3.0;
  return CdfProblem(testing::rayleigh_objective(d), make_sphere(3), 5.0);
}

}  // namespace

TEST_SUITE_BEGIN("solvers");

TEST_CASE("all methods minimize a convex quadratic to the known solution") {
  SolverOptions opts;
  // Tight but double-precision-achievable: at this scale the value drop
  // between Wolfe trials stays above rounding noise.
  opts.gtol = 1e-7;
  for (const char* name : {"lbfgs", "cg", "tr"}) {
    QuadraticSetup s = convex_quadratic(10, 91);
    const SolverReport rep = solve(name, s.problem, s.x0, opts);
    CAPTURE(name);
    CHECK(rep.status == SolveStatus::converged);
    CHECK((rep.x_final.data - s.minimizer).norm() <= 1e-6);
    CHECK(rep.iter <= 200);
    CHECK(rep.fval <= s.problem.value(s.x0));
  }
}

TEST_CASE("all methods reach the smallest Rayleigh value on the sphere") {
  Rng rng(17);
  for (const char* name : {"lbfgs", "cg", "tr"}) {
    CdfProblem p = sphere_rayleigh();
    // Start away from the e2/e3 saddles.
    Vector x0(3);
    x0 << 0.9, 0.3, -0.3;
    x0.normalize();
    x0 += 0.05 * rng.gaussian_vector(3);
    const SolverReport rep = solve(name, p, Point::from_vector(x0));
    CAPTURE(name);
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.fval == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(rep.feas <= 1e-10);
    CHECK(rep.stat <= SolverOptions{}.gtol);
  }
}

TEST_CASE("a stationary start returns immediately") {
  CdfProblem p = sphere_rayleigh();
  const Point x0 = Point::from_vector(Vector::Unit(3, 0));
  for (const char* name : {"lbfgs", "cg", "tr"}) {
    const SolverReport rep = solve(name, p, x0);
    CAPTURE(name);
    CHECK(rep.status == SolveStatus::converged);
    CHECK(rep.iter == 0);
    CHECK(rep.fval == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("iteration budget is honored") {
  QuadraticSetup s = convex_quadratic(12, 5);
  SolverOptions opts;
  opts.max_iter = 2;
  opts.gtol = 1e-14;
  const SolverReport rep = lbfgs(s.problem, s.x0, opts);
  CHECK(rep.status == SolveStatus::max_iter);
  CHECK(rep.iter == 2);
}

TEST_CASE("reports account for every oracle call") {
  CdfProblem p = sphere_rayleigh().fork();
  Vector x0(3);
  x0 << 0.8, 0.4, 0.2;
  const SolverReport rep = lbfgs(p, Point::from_vector(x0));
  CHECK(rep.eval_f == p.objective().value_evals());
  CHECK(rep.eval_grad == p.objective().gradient_evals());
  CHECK(rep.eval_f > 0);
  CHECK(rep.time_s >= 0.0);
}

TEST_CASE("final reports describe the projected point") {
  // Loose gtol leaves the raw iterate visibly off the set; the report
  // must still present a feasible point with matching measurements.
  CdfProblem p = sphere_rayleigh();
  Vector x0(3);
  x0 << 0.7, 0.5, -0.4;
  SolverOptions opts;
  opts.gtol = 1e-3;
  const SolverReport rep = nonlinear_cg(p, Point::from_vector(x0), opts);
  REQUIRE(rep.status == SolveStatus::converged);
  CHECK(rep.feas <= 1e-10);
  CHECK(std::abs(rep.x_final.data.squaredNorm() - 1.0) <= 1e-10);
  CHECK(rep.fval ==
        doctest::Approx(p.value(rep.x_final)).epsilon(1e-14));
  CHECK(rep.stat ==
        doctest::Approx(p.gradient(rep.x_final).data.norm()).epsilon(1e-12));
}

TEST_CASE("solver dispatch rejects unknown names") {
  CdfProblem p = sphere_rayleigh();
  CHECK_ERROR_CODE(solve("newton", p, Point::from_vector(Vector::Unit(3, 0))),
                   ErrorCode::config_error);
}

TEST_CASE("status labels are stable") {
  CHECK(std::string(to_string(SolveStatus::converged)) == "Converged");
  CHECK(std::string(to_string(SolveStatus::max_iter)) == "MaxIter");
  CHECK(std::string(to_string(SolveStatus::line_search_failure)) ==
        "LineSearchFailure");
  CHECK(std::string(to_string(SolveStatus::trust_region_collapse)) ==
        "TrustRegionCollapse");
}

TEST_SUITE_END();
