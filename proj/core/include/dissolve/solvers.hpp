#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "dissolve/problem.hpp"

namespace dissolve {

// Shared solver knobs. wolfe_c2 is solver-specific when unset: 0.9 for
// lbfgs (quasi-Newton steps tolerate loose curvature) and 0.1 for cg
// (conjugacy wants nearly exact line searches).
struct SolverOptions {
  double gtol = 1e-5;
  int max_iter = 10000;
  int lbfgs_memory = 10;
  double wolfe_c1 = 1e-4;
  std::optional<double> wolfe_c2;
  int ls_max_trials = 25;
  double tr_init_radius = 1.0;
  double tr_max_radius = 1000.0;
  double tr_accept_eta = 0.1;
};

enum class SolveStatus {
  converged,
  max_iter,
  line_search_failure,
  trust_region_collapse,
};

// Short status labels used in reports and CSV output.
const char* to_string(SolveStatus status);

// x_final is the feasibility projection of the last iterate (the raw point
// when projection fails), and fval, stat and feas all describe x_final.
// Converged certifies stat <= gtol, re-checkable with one gradient call.
struct SolverReport {
  double fval{0.0};
  Point x_final;
  int iter{0};
  std::int64_t eval_f{0};
  std::int64_t eval_grad{0};
  double stat{0.0};  // gradient norm of h at x_final
  double feas{0.0};  // constraint norm at x_final
  double time_s{0.0};
  SolveStatus status{SolveStatus::max_iter};
};

// Limited-memory BFGS with a strong-Wolfe line search.
SolverReport lbfgs(const CdfProblem& problem, const Point& x0,
                   const SolverOptions& opts = {});

// Polak-Ribiere+ nonlinear conjugate gradient with automatic restarts.
SolverReport nonlinear_cg(const CdfProblem& problem, const Point& x0,
                          const SolverOptions& opts = {});

// Trust-region method with a Steihaug truncated-CG subproblem solver;
// curvature enters through Hessian-vector products only.
SolverReport trust_region(const CdfProblem& problem, const Point& x0,
                          const SolverOptions& opts = {});

// Dispatch by name: "lbfgs", "cg", or "tr".
SolverReport solve(const std::string& solver, const CdfProblem& problem,
                   const Point& x0, const SolverOptions& opts = {});

}  // namespace dissolve
